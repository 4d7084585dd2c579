#include "ulam/errors.hpp"
#include "ulam/samples.hpp"
#include "ulam/spaces.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <random>

using namespace ulam;

namespace {

std::vector<Vector> scalars(std::initializer_list<double> xs)
{
    std::vector<Vector> out;
    for (double x : xs) out.push_back(Vector{x});
    return out;
}

}  // namespace

TEST(NormEval, ZeroVectorHasZeroNorm)
{
    EXPECT_EQ(norm_eval(SpaceSpec::beta_homogeneous(1, 1.0), Vector{0.0}), 0.0);
}

TEST(NormEval, HalfHomogeneousOfFour)
{
    EXPECT_DOUBLE_EQ(norm_eval(SpaceSpec::beta_homogeneous(1, 0.5), Vector{4.0}), 2.0);
}

TEST(NormEval, SymmetricUnderSign)
{
    EXPECT_DOUBLE_EQ(norm_eval(SpaceSpec::beta_homogeneous(1, 1.0), Vector{-3.0}), 3.0);
}

TEST(NormEval, DimensionMismatchThrows)
{
    EXPECT_THROW(norm_eval(SpaceSpec::beta_homogeneous(2, 1.0), Vector{1.0}), StructuralError);
}

TEST(SpaceSpec, RejectsOutOfRangeParameters)
{
    EXPECT_THROW(SpaceSpec::beta_homogeneous(1, 1.5), InputError);
    EXPECT_THROW(SpaceSpec::beta_homogeneous(1, 0.0), InputError);
    EXPECT_THROW(SpaceSpec::quasi(1, 0.5), InputError);
    EXPECT_THROW(SpaceSpec::p_norm(1, 0.0), InputError);
    EXPECT_THROW(SpaceSpec::beta_homogeneous(0, 1.0), InputError);
}

TEST(SpaceSpec, JsonRoundTrip)
{
    for (const SpaceSpec& s : {SpaceSpec::beta_homogeneous(2, 0.5), SpaceSpec::quasi(3, 2.0), SpaceSpec::p_norm(1, 0.5)}) {
        nlohmann::json j = s;
        EXPECT_EQ(j.get<SpaceSpec>(), s);
    }
}

TEST(SpaceSpec, JsonRejectsUnknownKey)
{
    const auto j = nlohmann::json::parse(R"({"dimension":1,"kind":"beta_homogeneous","beta":1,"gamma":2})");
    EXPECT_THROW(j.get<SpaceSpec>(), ConfigError);
}

TEST(FnormAxioms, AbsoluteValuePassesAll)
{
    const SpaceSpec s = SpaceSpec::beta_homogeneous(1, 1.0);
    const auto samples = random_dyadic_vectors(1, 4.0, 4, 40, 7);
    const auto nulls = default_null_sequences();
    const AuditReport rep = check_fnorm_axioms(s, samples, nulls);
    EXPECT_EQ(rep.entries().size(), 6u);
    EXPECT_TRUE(rep.all_pass());
    const AuditEntry* tri = rep.find("axiom.triangle");
    ASSERT_NE(tri, nullptr);
    EXPECT_LE(tri->values.at("worst_violation"), 1e-12);
}

TEST(FnormAxioms, QuasiNormFailsTriangleWithWitness)
{
    const SpaceSpec s = SpaceSpec::quasi(2, 2.0);
    const std::vector<Vector> samples = {Vector{1.0, 0.0}, Vector{0.0, 1.0}, Vector{1.0, 1.0}};
    const auto nulls = default_null_sequences();
    const AuditReport rep = check_fnorm_axioms(s, samples, nulls);
    const AuditEntry* tri = rep.find("axiom.triangle");
    ASSERT_NE(tri, nullptr);
    EXPECT_EQ(tri->status, Status::fail);
    ASSERT_TRUE(tri->witness.has_value());
    EXPECT_EQ(tri->witness->point.size(), 2u);
    EXPECT_GT(tri->values.at("worst_violation"), 0.0);
}

TEST(FnormAxioms, SquareRootIsSubadditive)
{
    const SpaceSpec s = SpaceSpec::beta_homogeneous(1, 0.5);
    const auto samples = scalars({1.0, 4.0, 9.0});
    const auto nulls = default_null_sequences();
    const AuditReport rep = check_fnorm_axioms(s, samples, nulls);
    EXPECT_EQ(rep.find("axiom.triangle")->status, Status::pass);
}

TEST(BetaHomogeneity, SpecExamples)
{
    const double t3[] = {3.0};
    EXPECT_TRUE(check_beta_homogeneity(SpaceSpec::beta_homogeneous(1, 1.0), scalars({2.0}), t3).all_pass());
    const double t4[] = {4.0, 0.0};
    const AuditReport r = check_beta_homogeneity(SpaceSpec::beta_homogeneous(1, 0.5), scalars({1.0}), t4);
    EXPECT_TRUE(r.all_pass());
    EXPECT_EQ(r.entries().front().values.at("worst_violation"), 0.0);
}

TEST(BetaHomogeneity, RefusesQuasiSpaces)
{
    const double t[] = {2.0};
    EXPECT_THROW(check_beta_homogeneity(SpaceSpec::quasi(1, 2.0), scalars({1.0}), t), ContractError);
}

TEST(BetaHomogeneity, SeededPropertyOverRandomSpaces)
{
    std::mt19937_64 rng(20261016);
    std::uniform_real_distribution<double> ub(0.05, 1.0), ut(-8.0, 8.0), uv(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int dim = 1 + trial % 3;
        const SpaceSpec s = SpaceSpec::beta_homogeneous(dim, ub(rng));
        Vector v(static_cast<std::size_t>(dim));
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = uv(rng);
        const double t = ut(rng);
        const double lhs = norm_eval(s, t * v);
        const double rhs = std::pow(std::abs(t), s.beta) * norm_eval(s, v);
        EXPECT_LE(std::abs(lhs - rhs), 1e-12 * (1.0 + norm_eval(s, v)) * std::max(1.0, std::abs(t)));
    }
}

TEST(QuasiConstant, TrueNormIsAtMostOne)
{
    EXPECT_LE(quasi_constant_estimate(SpaceSpec::beta_homogeneous(1, 1.0), dyadic_vectors(1, 2.0, 2)), 1.0);
}

TEST(QuasiConstant, SquareRootNormOnEqualPair)
{
    EXPECT_NEAR(quasi_constant_estimate(SpaceSpec::beta_homogeneous(1, 0.5), scalars({1.0})), std::sqrt(2.0) / 2.0,
                1e-15);
}

TEST(QuasiConstant, LHalfQuasiNormOnBasisPair)
{
    const SpaceSpec s = SpaceSpec::quasi(2, 2.0);  // l_{1/2}
    const std::vector<Vector> basis = {Vector{1.0, 0.0}, Vector{0.0, 1.0}};
    EXPECT_NEAR(quasi_constant_estimate(s, basis), 2.0, 1e-12);
}

TEST(QuasiConstant, BetaSpacesStayBelowOnePlusTol)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ub(0.05, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const SpaceSpec s = SpaceSpec::beta_homogeneous(2, ub(rng));
        const auto samples = random_dyadic_vectors(2, 3.0, 3, 30, 100 + static_cast<std::uint64_t>(trial));
        EXPECT_LE(quasi_constant_estimate(s, samples), 1.0 + 1e-12);
    }
}

TEST(AokiRolewicz, SpecValues)
{
    EXPECT_EQ(aoki_rolewicz_exponent(1.0), 1.0);
    EXPECT_DOUBLE_EQ(aoki_rolewicz_exponent(2.0), 0.5);
    EXPECT_NEAR(aoki_rolewicz_exponent(4.0), 1.0 / 3.0, 1e-15);
    EXPECT_THROW(aoki_rolewicz_exponent(0.9), InputError);
}

TEST(AokiRolewicz, StrictlyDecreasing)
{
    double prev = aoki_rolewicz_exponent(1.0);
    for (double C = 1.25; C <= 64.0; C *= 1.25) {
        const double p = aoki_rolewicz_exponent(C);
        EXPECT_LT(p, prev);
        prev = p;
    }
}

TEST(InducedFnorm, IdentityAtPOne)
{
    const SpaceSpec induced = induce_fnorm_from_pnorm(SpaceSpec::p_norm(1, 1.0));
    EXPECT_EQ(induced.kind, NormKind::beta_homogeneous);
    EXPECT_EQ(induced.beta, 1.0);
    for (double x : {-2.0, 0.5, 3.0}) EXPECT_EQ(norm_eval(induced, Vector{x}), std::abs(x));
}

TEST(InducedFnorm, HalfPowerIsHalfHomogeneous)
{
    const SpaceSpec induced = induce_fnorm_from_pnorm(SpaceSpec::p_norm(1, 0.5));
    EXPECT_DOUBLE_EQ(norm_eval(induced, Vector{4.0}), 2.0);
    const double t[] = {0.0, 2.0, -3.0, 0.25};
    EXPECT_TRUE(check_beta_homogeneity(induced, scalars({1.0, 2.0, -0.5}), t).all_pass());
    EXPECT_LE(norm_eval(induced, Vector{2.0}), norm_eval(induced, Vector{1.0}) + norm_eval(induced, Vector{1.0}));
}

TEST(InducedFnorm, EqualsPthPowerPointwise)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> up(0.1, 1.0), uv(-4.0, 4.0);
    for (int trial = 0; trial < 100; ++trial) {
        const SpaceSpec pn = SpaceSpec::p_norm(3, up(rng));
        const SpaceSpec induced = induce_fnorm_from_pnorm(pn);
        const Vector v{uv(rng), uv(rng), uv(rng)};
        EXPECT_EQ(norm_eval(induced, v), std::pow(norm_eval(pn, v), pn.p_exponent));
    }
}

TEST(InducedFnorm, RejectsOtherKinds)
{
    EXPECT_THROW(induce_fnorm_from_pnorm(SpaceSpec::beta_homogeneous(1, 1.0)), ContractError);
}
