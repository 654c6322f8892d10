#ifndef NETREC_NETREC_HPP
#define NETREC_NETREC_HPP

// Umbrella header: sparse network reconstruction from observational data by
// greedy coordinate descent with a stochastic second-neighbor candidate
// search, plus the quadratic baselines and oracles used to validate it.

#include "netrec/bench.hpp"
#include "netrec/common.hpp"
#include "netrec/find_best.hpp"
#include "netrec/io.hpp"
#include "netrec/knn.hpp"
#include "netrec/line_search.hpp"
#include "netrec/model.hpp"
#include "netrec/parallel.hpp"
#include "netrec/random.hpp"
#include "netrec/reconstruct.hpp"
#include "netrec/sample_matrix.hpp"
#include "netrec/sparse_weights.hpp"
#include "netrec/synth.hpp"

#endif
