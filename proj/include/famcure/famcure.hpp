#pragma once

// Umbrella header.

#include "famcure/baseline.hpp"
#include "famcure/cure.hpp"
#include "famcure/data.hpp"
#include "famcure/estimate.hpp"
#include "famcure/io.hpp"
#include "famcure/likelihood.hpp"
#include "famcure/metrics.hpp"
#include "famcure/oracle.hpp"
#include "famcure/predict.hpp"
#include "famcure/quadrature.hpp"
#include "famcure/replicate.hpp"
#include "famcure/rng.hpp"
#include "famcure/simulate.hpp"
#include "famcure/special.hpp"
#include "famcure/validate.hpp"
