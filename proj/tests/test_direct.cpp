#include "ulam/direct.hpp"
#include "ulam/errors.hpp"
#include "ulam/samples.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ulam;

namespace {

const SpaceSpec kX1 = SpaceSpec::beta_homogeneous(1, 1.0);
const Vector kOne{1.0};

Mapping power_product(double eta, double a, double b)
{
    return Mapping::zero(kX1, kX1).with_perturbation(PerturbationSpec::power_product(eta, a, b));
}

ControlFunction power(double r, double theta = 1.0) { return ControlFunction::power(kX1, theta, r); }

std::vector<PairSample> grid_pairs(int depth = 2)
{
    const auto v = dyadic_vectors(1, 2.0, depth);
    return pair_grid(v, v);
}

}  // namespace

TEST(ExtractPDiv, CubicFixtureFollowsClosedForm)
{
    const auto t = extract_P_div(power_product(0.01, 3, 3), power(3.0), 1.0, kOne, kOne);
    ASSERT_EQ(t.verdict, Verdict::converged);
    for (std::size_t k = 0; k < t.iterates.size(); ++k)
        EXPECT_DOUBLE_EQ(t.iterates[k][0], 0.01 * std::exp2(-2.0 * double(k)));
    EXPECT_LE(std::abs((*t.limit)[0]), 1e-10);
}

TEST(ExtractPDiv, ZeroMappingIsConstantZero)
{
    const auto t = extract_P_div(Mapping::zero(kX1, kX1), power(3.0, 0.0), 1.0, kOne, kOne);
    ASSERT_EQ(t.verdict, Verdict::converged);
    for (const auto& s : t.iterates) EXPECT_TRUE(s.is_zero());
    EXPECT_EQ(*t.limit, t.iterates.front());
}

TEST(ExtractPDiv, LinearFirstSlotDoesNotContract)
{
    // iterates are constant in k and the Cauchy tail diverges at r = 1
    const auto t = extract_P_div(power_product(0.01, 1, 3), power(1.0), 1.0, kOne, kOne);
    EXPECT_NE(t.verdict, Verdict::converged);
    for (const auto& s : t.iterates) EXPECT_DOUBLE_EQ(s[0], 0.01);
}

TEST(ExtractPDiv, FixedPointOfScalingIsExactFromTheStart)
{
    const Mapping f = Mapping::separable(kX1, kX1, {{1.0}}, {{1.0}});
    const auto t = extract_P_div(f, power(3.0), 1.0, Vector{1.5}, Vector{-0.5});
    ASSERT_EQ(t.verdict, Verdict::converged);
    for (const auto& s : t.iterates) EXPECT_EQ(s, t.iterates.front());
}

TEST(ExtractQDiv, CubicFixtureFollowsClosedForm)
{
    const auto t = extract_Q_div(power_product(0.01, 3, 3), power(3.0), 1.0, kOne, kOne);
    ASSERT_EQ(t.verdict, Verdict::converged);
    for (std::size_t k = 0; k < t.iterates.size(); ++k)
        EXPECT_DOUBLE_EQ(t.iterates[k][0], 0.01 * std::exp2(-double(k)));
    EXPECT_LE(std::abs((*t.limit)[0]), 1e-10);
}

TEST(ExtractQDiv, ZeroMapping)
{
    const auto t = extract_Q_div(Mapping::zero(kX1, kX1), power(3.0, 0.0), 1.0, kOne, kOne);
    ASSERT_EQ(t.verdict, Verdict::converged);
    EXPECT_TRUE(t.limit->is_zero());
}

TEST(ExtractQDiv, QuadraticSecondSlotDoesNotConverge)
{
    const auto t = extract_Q_div(power_product(0.01, 3, 2), power(2.0), 1.0, kOne, kOne);
    EXPECT_NE(t.verdict, Verdict::converged);
    for (const auto& s : t.iterates) EXPECT_DOUBLE_EQ(s[0], 0.01);
}

TEST(ExtractPMul, SquareRootFirstSlotDecays)
{
    ExtractionOptions o;
    o.k_max = 120;
    const auto t = extract_P_mul(power_product(0.01, 0.5, 3), power(0.5), 1.0, kOne, kOne, o);
    ASSERT_EQ(t.verdict, Verdict::converged);
    for (std::size_t k = 0; k < 40; ++k) EXPECT_NEAR(t.iterates[k][0], 0.01 * std::exp2(-0.5 * double(k)), 1e-17);
    EXPECT_LE(std::abs((*t.limit)[0]), 1e-10);
}

TEST(ExtractPMul, ZeroMapping)
{
    const auto t = extract_P_mul(Mapping::zero(kX1, kX1), power(0.5, 0.0), 1.0, kOne, kOne);
    ASSERT_EQ(t.verdict, Verdict::converged);
    EXPECT_TRUE(t.limit->is_zero());
}

TEST(ExtractPMul, LinearFirstSlotIsUndecided)
{
    ExtractionOptions o;
    o.k_max = 30;
    const auto t = extract_P_mul(power_product(0.01, 1, 3), power(1.0), 1.0, kOne, kOne, o);
    EXPECT_EQ(t.verdict, Verdict::undecided);
    EXPECT_EQ(t.k_stop, 30);
}

TEST(ExtractPMul, SuperlinearGrowthDiverges)
{
    const auto t = extract_P_mul(power_product(0.01, 3, 3), power(0.5), 1.0, kOne, kOne);
    EXPECT_EQ(t.verdict, Verdict::diverged);
}

TEST(ExtractPMul, OverflowIsADivergenceVerdict)
{
    ExtractionOptions o;
    o.k_max = 1000;
    const auto t = extract_P_mul(power_product(1.0, 40, 1), power(0.5), 1.0, Vector{1.0}, kOne, o);
    EXPECT_EQ(t.verdict, Verdict::diverged);
}

TEST(ExtractQMul, SquareRootSecondSlotDecays)
{
    ExtractionOptions o;
    o.k_max = 120;
    const auto t = extract_Q_mul(power_product(0.01, 3, 0.5), power(0.5), 1.0, kOne, kOne, o);
    ASSERT_EQ(t.verdict, Verdict::converged);
    EXPECT_LE(std::abs((*t.limit)[0]), 1e-10);
}

TEST(CauchyTail, SingleTermEqualsTerm)
{
    const auto phi = power(3.0);
    for (Route r : {Route::P_div, Route::Q_div, Route::P_mul, Route::Q_mul})
        for (int l = 0; l < 5; ++l)
            EXPECT_EQ(cauchy_tail_bound(phi, 1.0, l, l + 1, r, Vector{1.5}, Vector{0.75}),
                      cauchy_term(phi, 1.0, l, r, Vector{1.5}, Vector{0.75}));
}

TEST(CauchyTail, FullTailMatchesSeriesOracle)
{
    EXPECT_NEAR(cauchy_tail_bound(power(3.0), 1.0, 0, std::nullopt, Route::P_div, kOne, kOne), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(cauchy_tail_bound(power(3.0), 1.0, 0, std::nullopt, Route::Q_div, kOne, kOne), 0.5, 1e-12);
}

TEST(CauchyTail, ZeroPhi)
{
    for (Route r : {Route::P_div, Route::Q_div, Route::P_mul, Route::Q_mul})
        EXPECT_EQ(cauchy_tail_bound(power(3.0, 0.0), 1.0, 0, std::nullopt, r, kOne, kOne), 0.0);
}

TEST(CauchyTail, DivergentSeriesGivesInfinity)
{
    EXPECT_TRUE(std::isinf(cauchy_tail_bound(power(1.0), 1.0, 0, std::nullopt, Route::P_div, kOne, kOne)));
}

TEST(CauchyDomination, HoldsForEveryFixtureTrace)
{
    const Mapping f = power_product(1.0 / 16.0, 3, 3);
    const auto phi = power(3.0);
    for (const auto& [x, z] : grid_pairs()) {
        for (Route r : {Route::P_div, Route::Q_div}) {
            const auto t = extract(r, f, phi, 1.0, x, z);
            ASSERT_EQ(t.verdict, Verdict::converged);
            const AuditEntry e = check_cauchy_domination(t, phi, 1.0).entries().front();
            EXPECT_EQ(e.status, Status::pass) << to_string(r) << " at " << x.to_string() << "," << z.to_string();
            EXPECT_EQ(e.values.at("violations"), 0.0);
        }
    }
}

TEST(Reconcile, CubicFixtureGivesZero)
{
    const auto pairs = grid_pairs();
    const Reconciliation rec = reconcile_F(power_product(1.0 / 16.0, 3, 3), power(3.0), 1.0, pairs, Family::halving);
    ASSERT_EQ(rec.report.entries().front().status, Status::pass);
    ASSERT_EQ(rec.F.size(), pairs.size());
    for (const auto& v : rec.F) EXPECT_LE(std::abs(v[0]), 1e-10);
}

TEST(Reconcile, ZeroMappingGivesZero)
{
    const auto pairs = grid_pairs(1);
    for (Family fam : {Family::halving, Family::doubling}) {
        const Reconciliation rec = reconcile_F(Mapping::zero(kX1, kX1), power(3.0, 0.0), 1.0, pairs, fam);
        ASSERT_EQ(rec.report.entries().front().status, Status::pass);
        for (const auto& v : rec.F) EXPECT_TRUE(v.is_zero());
    }
}

TEST(Reconcile, RefusesWhenTheQRouteFails)
{
    const auto pairs = grid_pairs(1);
    const Reconciliation rec = reconcile_F(power_product(0.01, 3, 2), power(2.0), 1.0, pairs, Family::halving);
    const AuditEntry& e = rec.report.entries().front();
    EXPECT_EQ(e.status, Status::refused);
    EXPECT_NE(e.notes.find("Q_div"), std::string::npos);
    EXPECT_EQ(e.notes.find("P_div"), std::string::npos);
    EXPECT_TRUE(rec.F.empty());
}

TEST(ExtractedMapping, EvaluatesTheLimit)
{
    const Mapping F = extracted_mapping(power_product(1.0 / 16.0, 3, 3), power(3.0), 1.0, Family::halving);
    EXPECT_LE(std::abs(F(Vector{1.5}, Vector{-2.0})[0]), 1e-10);
    const Mapping G = extracted_mapping(power_product(0.01, 1, 3), power(1.0), 1.0, Family::halving);
    EXPECT_THROW(G(kOne, kOne), NumericError);
}

TEST(Rassias, SquareRootPerturbationOfIdentity)
{
    const double eps = 0.1, p = 0.5;
    auto g = [](double x) { return x + 0.1 * std::sqrt(std::abs(x)); };
    std::vector<double> xs;
    for (double x : dyadic_axis(4.0, 2)) xs.push_back(x);
    const RassiasResult res = rassias_calibration(g, p, eps, xs, 1e-12);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        EXPECT_NEAR(res.T[i], xs[i], 1e-10);
        if (xs[i] != 0.0) {
            EXPECT_NEAR(res.measured_ratio[i], 1.0, 1e-9);
        }
    }
    EXPECT_TRUE(res.report.all_pass());
    EXPECT_NEAR(res.report.find("rassias.bound")->values.at("bound_factor"), 2.0 / (2.0 - std::sqrt(2.0)), 1e-12);
}

TEST(Rassias, LinearMapIsItsOwnLimit)
{
    auto g = [](double x) { return 3.0 * x; };
    const std::vector<double> xs = {-2.0, -0.5, 0.0, 1.0, 1.75};
    const RassiasResult res = rassias_calibration(g, 0.5, 0.1, xs, 1e-12);
    for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_DOUBLE_EQ(res.T[i], 3.0 * xs[i]);
    EXPECT_TRUE(res.report.all_pass());
}

TEST(Rassias, BoundFormula)
{
    EXPECT_NEAR(rassias_bound(0.5, 1.0, 1.0), 3.414214, 1e-6);
}
