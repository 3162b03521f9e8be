#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "fields.hpp"

namespace bfda {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

/// Binary field snapshot.
///
/// Layout: "BFED", uint32 version (1), uint32 n, f64 l, f64 dealias_fraction,
/// f64 time, then 3*n*n*(n/2+1) complex coefficients as (re, im) f64 pairs,
/// ordered by component, then x index, then y index, then z index 0..n/2.
struct Snapshot {
    static constexpr std::uint32_t version = 1;

    static void write(const std::string& path, const SpectralField& s, double time) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw InvalidInput("snapshot: cannot open " + path + " for writing");
        const Grid& g = s.grid();
        const std::uint32_t v = version, n = static_cast<std::uint32_t>(g.n());
        const double l = g.length(), frac = g.dealias_fraction();
        out.write("BFED", 4);
        out.write(reinterpret_cast<const char*>(&v), 4);
        out.write(reinterpret_cast<const char*>(&n), 4);
        out.write(reinterpret_cast<const char*>(&l), 8);
        out.write(reinterpret_cast<const char*>(&frac), 8);
        out.write(reinterpret_cast<const char*>(&time), 8);
        out.write(reinterpret_cast<const char*>(s.coeffs().data()),
                  static_cast<std::streamsize>(s.coeffs().size() * sizeof(Complex)));
        if (!out) throw InvalidInput("snapshot: write failed for " + path);
    }

    struct Loaded {
        SpectralField field;
        double time;
    };

    static Loaded read(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw InvalidInput("snapshot: cannot open " + path);
        char magic[4];
        std::uint32_t v = 0, n = 0;
        double l = 0, frac = 0, time = 0;
        in.read(magic, 4);
        if (!in || std::memcmp(magic, "BFED", 4) != 0) throw InvalidInput("snapshot: bad magic in " + path);
        in.read(reinterpret_cast<char*>(&v), 4);
        if (v != version) throw InvalidInput("snapshot: unsupported version " + std::to_string(v));
        in.read(reinterpret_cast<char*>(&n), 4);
        in.read(reinterpret_cast<char*>(&l), 8);
        in.read(reinterpret_cast<char*>(&frac), 8);
        in.read(reinterpret_cast<char*>(&time), 8);
        if (!in) throw InvalidInput("snapshot: truncated header in " + path);
        SpectralField s(Grid(l, static_cast<int>(n), frac));
        in.read(reinterpret_cast<char*>(s.coeffs().data()),
                static_cast<std::streamsize>(s.coeffs().size() * sizeof(Complex)));
        if (!in) throw InvalidInput("snapshot: truncated coefficient data in " + path);
        return {std::move(s), time};
    }
};

} // namespace bfda
