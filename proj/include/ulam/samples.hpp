#pragma once

#include "ulam/vector.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace ulam {

using PairSample = std::pair<Vector, Vector>;

struct TupleSample {
    Vector x, y, z, w;
};

/// Dyadic grid k / 2^depth over [-range, range] (range is rounded down to the
/// grid), ascending.
std::vector<double> dyadic_axis(double range, int depth);

/// All vectors of the given dimension whose coordinates lie on the axis.
std::vector<Vector> dyadic_vectors(int dim, double range, int depth);

/// Seeded cloud of vectors with dyadic coordinates k / 2^depth in [-range, range].
std::vector<Vector> random_dyadic_vectors(int dim, double range, int depth, std::size_t count,
                                          std::uint64_t seed);

/// Cartesian product a x b, first component varying slowest.
std::vector<PairSample> pair_grid(const std::vector<Vector>& a, const std::vector<Vector>& b);

/// Cartesian product v^4 in lexicographic (x, y, z, w) order.
std::vector<TupleSample> tuple_grid(const std::vector<Vector>& v);

/// Random tuples drawn from the seeded dyadic cloud.
std::vector<TupleSample> random_tuples(int dim, double range, int depth, std::size_t count, std::uint64_t seed);

}  // namespace ulam
