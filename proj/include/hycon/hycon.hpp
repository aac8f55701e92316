#pragma once

#include "hycon/error.hpp"
#include "hycon/gain.hpp"
#include "hycon/graph.hpp"
#include "hycon/hybrid_sim.hpp"
#include "hycon/linalg.hpp"
#include "hycon/matrix.hpp"
#include "hycon/partition.hpp"
#include "hycon/predict.hpp"
#include "hycon/spectral.hpp"
