#pragma once

#include "stpdft/errors.hpp"
#include "stpdft/matrix.hpp"
#include "stpdft/core_algebra.hpp"
#include "stpdft/projection.hpp"
#include "stpdft/hypervector.hpp"
#include "stpdft/stochastic.hpp"
#include "stpdft/nominal.hpp"
#include "stpdft/transformer.hpp"
#include "stpdft/prng.hpp"
