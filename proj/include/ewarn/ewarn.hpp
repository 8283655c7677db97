#pragma once

// Umbrella header for the early-warning analysis library.

#include "ewarn/errors.hpp"
#include "ewarn/explain.hpp"
#include "ewarn/gra.hpp"
#include "ewarn/grading.hpp"
#include "ewarn/indicator_matrix.hpp"
#include "ewarn/linalg.hpp"
#include "ewarn/mlp.hpp"
#include "ewarn/pipeline.hpp"
#include "ewarn/random.hpp"
#include "ewarn/screening.hpp"
#include "ewarn/serialize.hpp"
