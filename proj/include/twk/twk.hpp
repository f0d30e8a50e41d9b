#pragma once

#include "twk/error.hpp"
#include "twk/timeseries.hpp"
#include "twk/edit_dp.hpp"
#include "twk/distances.hpp"
#include "twk/summative.hpp"
#include "twk/kernels.hpp"
#include "twk/linalg.hpp"
#include "twk/parallel.hpp"
#include "twk/gram.hpp"
#include "twk/measure.hpp"
#include "twk/classify.hpp"
#include "twk/datasets.hpp"
