#pragma once

#include "utrad/classify/feature_table.hpp"
#include "utrad/classify/folds.hpp"
#include "utrad/classify/learners.hpp"
#include "utrad/classify/metrics.hpp"
#include "utrad/classify/pipeline.hpp"
#include "utrad/classify/selectors.hpp"
#include "utrad/classify/threshold.hpp"
