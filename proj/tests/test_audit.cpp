#include "ulam/audit.hpp"
#include "ulam/direct.hpp"
#include "ulam/errors.hpp"
#include "ulam/report.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ulam;

namespace {

const SpaceSpec kX1 = SpaceSpec::beta_homogeneous(1, 1.0);

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

// Tuples on the nonnegative axis {0, 1/2, 1}.
std::vector<TupleSample> unit_tuples()
{
    std::vector<Vector> v;
    for (double t : {0.0, 0.5, 1.0}) v.push_back(Vector{t});
    return tuple_grid(v);
}

}  // namespace

TEST(Report, AddEnforcesWitnessAndMargin)
{
    AuditReport r;
    EXPECT_THROW(r.add({.check_id = "x", .status = Status::fail}), ContractError);
    EXPECT_THROW(r.add({.check_id = "x", .status = Status::flagged}), ContractError);
    EXPECT_THROW(r.add({.check_id = "x", .status = Status::pass, .margin = -1.0}), ContractError);
}

TEST(Report, ExitCodeIsMaximumSeverity)
{
    AuditReport r;
    EXPECT_EQ(r.exit_code(), 0);
    r.add({.check_id = "a", .status = Status::pass});
    EXPECT_EQ(r.exit_code(), 0);
    r.add({.check_id = "b", .status = Status::flagged, .witness = Witness{{Vector{1.0}}, {}}});
    EXPECT_EQ(r.exit_code(), 1);
    r.add({.check_id = "c", .status = Status::refused});
    EXPECT_EQ(r.exit_code(), 2);
}

TEST(Report, SortIsByIdThenPoint)
{
    AuditReport r;
    r.add({.check_id = "b", .status = Status::pass});
    r.add({.check_id = "a", .status = Status::fail, .witness = Witness{{Vector{2.0}}, {}}});
    r.add({.check_id = "a", .status = Status::fail, .witness = Witness{{Vector{1.0}}, {}}});
    r.sort();
    EXPECT_EQ(r.entries()[0].witness->point[0], Vector{1.0});
    EXPECT_EQ(r.entries()[1].witness->point[0], Vector{2.0});
    EXPECT_EQ(r.entries()[2].check_id, "b");
}

TEST(Structure, ZeroMappingHasZeroResiduals)
{
    const AuditReport r = check_structure(Mapping::zero(kX1, kX1), unit_tuples(), 1e-9);
    ASSERT_EQ(r.entries().size(), 3u);
    for (const auto& e : r.entries()) {
        EXPECT_EQ(e.status, Status::pass);
        EXPECT_EQ(e.values.at("max_residual"), 0.0);
    }
}

TEST(Structure, SlotwiseStructureDoesNotImplyTheEquation)
{
    const Mapping F = Mapping::separable(kX1, kX1, {{1.0}}, {{1.0}});
    const AuditReport r = check_structure(F, unit_tuples(), 1e-9);
    EXPECT_EQ(r.find("structure.first_slot")->status, Status::pass);
    EXPECT_EQ(r.find("structure.second_slot")->status, Status::pass);
    const AuditEntry* full = r.find("structure.full_equation");
    EXPECT_EQ(full->status, Status::fail);
    ASSERT_TRUE(full->witness.has_value());
    const auto& p = full->witness->point;
    ASSERT_EQ(p.size(), 4u);
    EXPECT_EQ(p[0], Vector{0.0});
    EXPECT_EQ(p[1], Vector{1.0});
    EXPECT_EQ(p[2], Vector{1.0});
    EXPECT_EQ(p[3], Vector{1.0});
    EXPECT_EQ(full->witness->values.at("residual"), 4.0);
}

TEST(Structure, FirstSlotResidualVanishesOnTheAxis)
{
    // with y = 0 the first-slot residual is ||F(0, z)||, zero by the axis condition
    std::vector<TupleSample> t;
    for (double x : {-1.0, 0.5, 2.0})
        for (double z : {-2.0, 0.25, 1.0}) t.push_back({Vector{x}, Vector{0.0}, Vector{z}, Vector{0.0}});
    const Mapping F = power_product(0.3, 2.0, 5.0);
    EXPECT_EQ(check_structure(F, t, 1e-12).find("structure.first_slot")->values.at("max_residual"), 0.0);
}

TEST(Structure, ExtractedFromFixtureIsAdditiveQuadratic)
{
    const Mapping F = extracted_mapping(power_product(1.0 / 16.0, 3, 3), power(3.0), 1.0, Family::halving);
    const auto tuples = tuple_grid(dyadic_vectors(1, 1.0, 0));
    EXPECT_TRUE(check_structure(F, tuples, 1e-9).all_pass());
}

TEST(DirectBound, FixtureHolds)
{
    const auto pairs = grid_pairs();
    const Mapping f = power_product(1.0 / 16.0, 3, 3);
    const Reconciliation rec = reconcile_F(f, power(3.0), 1.0, pairs, Family::halving);
    const AuditEntry e = verify_direct_bound(f, rec.F, power(3.0), 1.0, Family::halving, pairs).entries().front();
    EXPECT_EQ(e.status, Status::pass);
    EXPECT_GE(e.values.at("min_slack"), 0.0);
    // with F = 0 the deviation is eta |x|^3 |z|^3 and the bound is |x|^3 |z|^3 / 3
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double x = pairs[i].first[0], z = pairs[i].second[0];
        EXPECT_NEAR(std::abs(f(pairs[i].first, pairs[i].second)[0] - rec.F[i][0]),
                    std::abs(x * x * x * z * z * z) / 16.0, 1e-10);
    }
}

TEST(DirectBound, ZeroMappingHasFullSlack)
{
    const auto pairs = grid_pairs(1);
    const std::vector<Vector> F(pairs.size(), Vector{0.0});
    const AuditEntry e =
        verify_direct_bound(Mapping::zero(kX1, kX1), F, power(3.0), 1.0, Family::halving, pairs).entries().front();
    EXPECT_EQ(e.status, Status::pass);
    EXPECT_NEAR(e.values.at("min_slack"), 0.0, 1e-300);  // slack equals the bound, whose minimum is at the axis
}

TEST(DirectBound, InadmissibleCoreStillEvaluates)
{
    const auto pairs = grid_pairs();
    const std::vector<Vector> F(pairs.size(), Vector{0.0});
    const Mapping f = Mapping::separable(kX1, kX1, {{1.0}}, {{1.0}});
    const AuditEntry e = verify_direct_bound(f, F, power(3.0), 1.0, Family::halving, pairs).entries().front();
    EXPECT_EQ(e.status, Status::fail);
    ASSERT_TRUE(e.witness.has_value());
    EXPECT_LT(e.values.at("min_slack"), 0.0);
}

TEST(DirectBound, RefusedWhenTheSeriesDiverge)
{
    const auto pairs = grid_pairs(1);
    const std::vector<Vector> F(pairs.size(), Vector{0.0});
    const AuditEntry e = verify_direct_bound(Mapping::zero(kX1, kX1), F, power(1.5), 1.0, Family::halving, pairs)
                             .entries()
                             .front();
    EXPECT_EQ(e.status, Status::refused);
    EXPECT_NE(e.notes.find("halving_quadratic"), std::string::npos);
}

TEST(Corollary, DirectHalvingPowerConstant)
{
    const AuditReport r = audit_corollary(CorollaryId::direct_halving_power, 1.0, 3.0, 1.0, grid_pairs());
    const AuditEntry* c = r.find("direct_halving_power.constant");
    EXPECT_EQ(c->status, Status::pass);
    EXPECT_NEAR(c->values.at("printed"), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(c->values.at("recomputed"), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(c->values.at("additive_term"), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(c->values.at("quadratic_term"), 0.5, 1e-12);
    EXPECT_TRUE(r.all_pass());
}

TEST(Corollary, DirectDoublingPowerConstant)
{
    const AuditReport r = audit_corollary(CorollaryId::direct_doubling_power, 1.0, 0.5, 1.0, grid_pairs());
    const AuditEntry* c = r.find("direct_doubling_power.constant");
    EXPECT_EQ(c->status, Status::pass);
    EXPECT_NEAR(c->values.at("recomputed"), 2.0 / (4.0 - std::sqrt(2.0)), 1e-12);
}

TEST(Corollary, FixpointHalvingHypothesisIsFlagged)
{
    const AuditReport r = audit_corollary(CorollaryId::fixpoint_halving_power, 1.0, 1.5, 1.0, grid_pairs());
    const AuditEntry* h = r.find("fixpoint_halving_power.hypothesis");
    ASSERT_NE(h, nullptr);
    EXPECT_EQ(h->status, Status::flagged);
    EXPECT_NEAR(h->values.at("stated_L"), (std::pow(2.0, 1.5) - 2.0) / (std::pow(2.0, 1.5) - 1.0), 1e-12);
    EXPECT_NEAR(h->values.at("required_L"), std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(h->values.at("available_halving_ratio"), 0.1133, 1e-4);
    EXPECT_NEAR(h->values.at("observed_halving_ratio"), std::pow(2.0, -1.5), 1e-12);
    ASSERT_TRUE(h->witness.has_value());
    // the printed constants disagree with the bound terms recomputed from the stated L
    EXPECT_EQ(r.find("fixpoint_halving_power.constant")->status, Status::flagged);
}

TEST(Corollary, FixpointDoublingHypothesisIsFlagged)
{
    const AuditReport r = audit_corollary(CorollaryId::fixpoint_doubling_power, 1.0, 0.5, 1.0, grid_pairs());
    const AuditEntry* h = r.find("fixpoint_doubling_power.hypothesis");
    EXPECT_EQ(h->status, Status::flagged);
    EXPECT_NEAR(h->values.at("stated_L"), std::pow(2.0, -1.5), 1e-12);
    EXPECT_NEAR(h->values.at("required_L"), std::pow(2.0, -0.5), 1e-12);
    EXPECT_EQ(r.find("fixpoint_doubling_power.constant")->status, Status::pass);
}

TEST(Corollary, QuasiVariants)
{
    const AuditReport a = audit_corollary(CorollaryId::direct_halving_quasi, 1.0, 3.0, 0.5, grid_pairs());
    EXPECT_EQ(a.find("direct_halving_quasi.constant")->status, Status::pass);
    EXPECT_EQ(a.find("direct_halving_quasi.min_identity"), nullptr);
    const AuditReport b = audit_corollary(CorollaryId::direct_doubling_quasi, 1.0, 0.5, 0.5, grid_pairs());
    const AuditEntry* c = b.find("direct_doubling_quasi.constant");
    EXPECT_EQ(c->status, Status::flagged);
    ASSERT_TRUE(c->witness.has_value());
}

TEST(Corollary, OutOfRangeExponentIsAnInputError)
{
    EXPECT_THROW(audit_corollary(CorollaryId::direct_halving_power, 1.0, 1.5, 1.0, grid_pairs()), InputError);
    EXPECT_THROW(audit_corollary(CorollaryId::fixpoint_doubling_power, 1.0, 1.5, 1.0, grid_pairs()), InputError);
}

TEST(Corollary, DirectConstantsMatchClosedFormsOnRandomParameters)
{
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> ut(0.1, 5.0), ub(0.2, 1.0), uhi(2.2, 6.0), ulo(0.1, 0.9);
    for (int trial = 0; trial < 20; ++trial) {
        const double theta = ut(rng), beta = ub(rng);
        for (CorollaryId id : {CorollaryId::direct_halving_power, CorollaryId::direct_doubling_power}) {
            const bool halving = id == CorollaryId::direct_halving_power;
            const double r = halving ? uhi(rng) : ulo(rng);
            const AuditReport rep = audit_corollary(id, theta, r, beta, grid_pairs(1));
            const AuditEntry* c = rep.find(std::string(to_string(id)) + ".constant");
            const SeriesId sa = halving ? SeriesId::halving_additive : SeriesId::doubling_additive;
            const SeriesId sq = halving ? SeriesId::halving_quadratic : SeriesId::doubling_quadratic;
            // unit norms: phi(e, e) = 2 sqrt(theta), phi(e, 0) = sqrt(theta)
            const double oracle = 2.0 * theta *
                                  std::min(*closed_form_power(theta, r, beta, sa), *closed_form_power(theta, r, beta, sq));
            EXPECT_NEAR(c->values.at("recomputed"), oracle, 1e-12 * oracle) << to_string(id) << " r=" << r;
        }
    }
}

TEST(RouteConsistency, SpecExamples)
{
    const auto pairs = grid_pairs(1);
    const std::vector<Vector> zeros(pairs.size(), Vector{0.0});
    EXPECT_EQ(route_consistency(zeros, zeros, zeros, pairs, kX1, 1e-10).entries().front().status, Status::pass);
    std::vector<Vector> biased = zeros;
    biased[3] = Vector{1e-3};
    const AuditEntry e = route_consistency(zeros, biased, zeros, pairs, kX1, 1e-10).entries().front();
    EXPECT_EQ(e.status, Status::fail);
    EXPECT_DOUBLE_EQ(e.values.at("max_deviation"), 1e-3);
    EXPECT_EQ(route_consistency(std::nullopt, zeros, zeros, pairs, kX1, 1e-10).entries().front().status,
              Status::refused);
}
