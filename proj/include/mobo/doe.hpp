#pragma once

#include <cstdint>

#include "mobo/types.hpp"

namespace mobo {

/// Latin Hypercube design: one point per axis stratum, entries at stratum
/// centers (i + 0.5) / n.
struct Design {
    Matrix points;  // n x d in [0,1]
    std::uint64_t seed = 0;
    double maximin_distance = 0.0;
};

/// Minimum pairwise Euclidean distance.
double maximin_score(const Matrix& points);

/// Unoptimized LHS: independent random column permutations.
Design lhs_basic(int n, int d, std::uint64_t seed);

/// LHS improved by column-permutation hill climbing under the maximin
/// criterion; proposals < 0 uses the default budget of 10000 * d.
Design lhs_maximin(int n, int d, std::uint64_t seed, long proposals = -1);

}  // namespace mobo
