#include "ulam/samples.hpp"

#include "ulam/errors.hpp"

#include <cmath>
#include <random>

namespace ulam {

std::vector<double> dyadic_axis(double range, int depth)
{
    if (!(range >= 0.0) || !std::isfinite(range)) throw InputError("sample range must be finite and >= 0");
    if (depth < 0 || depth > 30) throw InputError("dyadic depth must lie in [0, 30]");
    const auto kmax = static_cast<long long>(std::floor(std::ldexp(range, depth)));
    std::vector<double> axis;
    axis.reserve(static_cast<std::size_t>(2 * kmax + 1));
    for (long long k = -kmax; k <= kmax; ++k) axis.push_back(std::ldexp(static_cast<double>(k), -depth));
    return axis;
}

std::vector<Vector> dyadic_vectors(int dim, double range, int depth)
{
    if (dim < 1) throw InputError("dimension must be positive");
    const auto axis = dyadic_axis(range, depth);
    std::vector<Vector> out{Vector::zeros(static_cast<std::size_t>(dim))};
    for (int d = 0; d < dim; ++d) {
        std::vector<Vector> next;
        next.reserve(out.size() * axis.size());
        for (const auto& v : out) {
            for (double a : axis) {
                Vector w = v;
                w[static_cast<std::size_t>(d)] = a;
                next.push_back(std::move(w));
            }
        }
        out = std::move(next);
    }
    return out;
}

std::vector<Vector> random_dyadic_vectors(int dim, double range, int depth, std::size_t count,
                                          std::uint64_t seed)
{
    if (dim < 1) throw InputError("dimension must be positive");
    const auto kmax = static_cast<long long>(std::floor(std::ldexp(range, depth)));
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long long> dist(-kmax, kmax);
    std::vector<Vector> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Vector v(static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d)
            v[static_cast<std::size_t>(d)] = std::ldexp(static_cast<double>(dist(rng)), -depth);
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<PairSample> pair_grid(const std::vector<Vector>& a, const std::vector<Vector>& b)
{
    std::vector<PairSample> out;
    out.reserve(a.size() * b.size());
    for (const auto& x : a)
        for (const auto& z : b) out.emplace_back(x, z);
    return out;
}

std::vector<TupleSample> tuple_grid(const std::vector<Vector>& v)
{
    std::vector<TupleSample> out;
    out.reserve(v.size() * v.size() * v.size() * v.size());
    for (const auto& x : v)
        for (const auto& y : v)
            for (const auto& z : v)
                for (const auto& w : v) out.push_back({x, y, z, w});
    return out;
}

std::vector<TupleSample> random_tuples(int dim, double range, int depth, std::size_t count, std::uint64_t seed)
{
    auto cloud = random_dyadic_vectors(dim, range, depth, 4 * count, seed);
    std::vector<TupleSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back({cloud[4 * i], cloud[4 * i + 1], cloud[4 * i + 2], cloud[4 * i + 3]});
    return out;
}

}  // namespace ulam
