#pragma once

#include "gaugelab/core.hpp"
#include "gaugelab/quadrature.hpp"
#include "gaugelab/fields.hpp"
#include "gaugelab/gauge.hpp"
#include "gaugelab/multipole.hpp"
#include "gaugelab/operators.hpp"
#include "gaugelab/stationary.hpp"
#include "gaugelab/dynamics.hpp"
#include "gaugelab/io.hpp"
#include "gaugelab/config.hpp"
#include "gaugelab/verify.hpp"
#include "gaugelab/cli.hpp"
