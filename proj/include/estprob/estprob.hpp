#pragma once

#include "estprob/calibration.hpp"
#include "estprob/data.hpp"
#include "estprob/errors.hpp"
#include "estprob/inference.hpp"
#include "estprob/numerics.hpp"
#include "estprob/report.hpp"
