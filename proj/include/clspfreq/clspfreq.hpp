#ifndef CLSPFREQ_CLSPFREQ_HPP
#define CLSPFREQ_CLSPFREQ_HPP

#include "asymptotics.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "grid.hpp"
#include "harness.hpp"
#include "periodogram.hpp"
#include "random.hpp"
#include "sampling.hpp"
#include "signal.hpp"

#endif
