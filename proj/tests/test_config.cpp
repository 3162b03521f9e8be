#include <gtest/gtest.h>

#include <sstream>

#include "bfda/config.hpp"

using namespace bfda;

namespace {

ExperimentConfig parse(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is, "test");
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Config, EmptyFileGivesResolvedDefaults) {
    const auto c = parse("# nothing\n\n");
    EXPECT_EQ(c.n, 32);
    EXPECT_DOUBLE_EQ(c.physical.alpha, 2.0);
    EXPECT_DOUBLE_EQ(c.assim.interpolant.h, c.physical.l / 4);
    EXPECT_DOUBLE_EQ(c.assim.interpolant.c0, InterpolantSpec::declared(InterpolantKind::FourierLowpass, 1).c0);
    EXPECT_EQ(c.assim.interpolant.c1, 0.0);
    EXPECT_EQ(c.forcing.kind, ForcingKind::RandomLowMode);
    EXPECT_DOUBLE_EQ(c.forcing.amplitude, 0.2);
    EXPECT_FALSE(c.sweep.any());
}

TEST(Config, ValuesAndCommentsAreParsed) {
    const auto c = parse("physical.alpha = 1.5   # subcritical\nassim.eta=20\ninterpolant.kind = trilinear-nodal\n"
                         "stepper.adaptive = true\nsweep.b_tilde_delta = 0.01, 0.02,0.04\n");
    EXPECT_DOUBLE_EQ(c.physical.alpha, 1.5);
    EXPECT_DOUBLE_EQ(c.assim.eta, 20);
    EXPECT_EQ(c.assim.interpolant.kind, InterpolantKind::TrilinearNodal);
    EXPECT_GT(c.assim.interpolant.c1, 0.0);
    EXPECT_TRUE(c.stepper.adaptive);
    EXPECT_EQ(c.sweep.b_tilde_delta, (std::vector<double>{0.01, 0.02, 0.04}));
    EXPECT_EQ(c.sweep.points(), 3u);
}

TEST(Config, UnknownKeyIsRejectedWithLocation) {
    const auto msg = error_of("physical.nu = 0.1\nalpha_guess = 2\n");
    EXPECT_NE(msg.find("test:2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("alpha_guess"), std::string::npos) << msg;
}

TEST(Config, RepeatedAndEmptyKeysAreRejected) {
    EXPECT_NE(error_of("assim.eta = 1\nassim.eta = 2\n").find("twice"), std::string::npos);
    EXPECT_NE(error_of("assim.eta =\n").find("no value"), std::string::npos);
    EXPECT_NE(error_of("assim.eta 3\n").find("key = value"), std::string::npos);
}

TEST(Config, MalformedValuesNameTheKey) {
    EXPECT_NE(error_of("physical.nu = fast\n").find("physical.nu"), std::string::npos);
    EXPECT_NE(error_of("grid.n = 3.5\n").find("grid.n"), std::string::npos);
    EXPECT_NE(error_of("run.seed = -4\n").find("run.seed"), std::string::npos);
    EXPECT_NE(error_of("stepper.adaptive = maybe\n").find("stepper.adaptive"), std::string::npos);
}

TEST(Config, InvariantViolationsBecomeConfigErrors) {
    EXPECT_FALSE(error_of("physical.nu = -1\n").empty());
    EXPECT_FALSE(error_of("assim.beta = 0.5\n").empty());
    EXPECT_FALSE(error_of("interpolant.c1 = 0.3\n").empty());  // type-1 needs c1 = 0
    EXPECT_FALSE(error_of("interpolant.kind = volume-average\ninterpolant.h = 2.0943951023931953\n").empty());
    EXPECT_FALSE(error_of("grid.n = 7\n").empty());
    EXPECT_FALSE(error_of("run.w0 = noise\n").empty());
    EXPECT_FALSE(error_of("sweep.beta = 2\nsweep.beta_delta = 0.1\n").empty());
    EXPECT_FALSE(error_of("forcing.kind = gusty\n").empty());
}

TEST(Config, EmitThenParseRoundTrips) {
    auto c = parse("physical.alpha = 1.5\nassim.b_tilde = 0.10400000000000001\nsweep.eta = 10, 20\n"
                   "interpolant.kind = volume-average\nrun.output = some/dir\nforcing.omega = 0.3\n");
    std::ostringstream os;
    emit_config(os, c);
    const auto back = parse(os.str());
    EXPECT_TRUE(back == c);
    std::ostringstream again;
    emit_config(again, back);
    EXPECT_EQ(again.str(), os.str());
}

TEST(Config, SweepAxesMultiply) {
    const auto c = parse("sweep.beta_delta = 0.01, 0.02\nsweep.eta = 10, 20, 40\n");
    EXPECT_EQ(c.sweep.points(), 6u);
}
