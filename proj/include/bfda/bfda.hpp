#pragma once

#include "assimilation.hpp"
#include "bounds.hpp"
#include "config.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "fft.hpp"
#include "fields.hpp"
#include "forcing.hpp"
#include "grid.hpp"
#include "harness.hpp"
#include "interpolants.hpp"
#include "log_real.hpp"
#include "params.hpp"
#include "properties.hpp"
#include "random_fields.hpp"
#include "snapshot.hpp"
#include "spectral.hpp"
#include "timestepper.hpp"
