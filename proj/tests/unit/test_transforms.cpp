#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "edgeweyl/counting.hpp"
#include "edgeweyl/error.hpp"
#include "edgeweyl/transforms.hpp"
#include "support/oracles.hpp"

using namespace edgeweyl;

namespace {

constexpr double kPi = std::numbers::pi;

SpectralMeasure single_atom(double lambda, double weight) {
    SpectralMeasure sm;
    sm.atoms = {{lambda, weight}};
    sm.lambda_max = lambda;
    return sm;
}

const SpectralMeasure& s3_large() {
    static const SpectralMeasure sm = sphere_spectrum(3, 4e4);
    return sm;
}

}  // namespace

TEST(HeatTrace, SingleAtom) {
    const HeatSample h = heat_trace(single_atom(2.0, 3.0), 1.0);
    EXPECT_NEAR(h.theta, 3.0 * std::exp(-2.0), 1e-15);
    EXPECT_NEAR(h.theta, 0.40601, 1e-5);
    EXPECT_FALSE(h.tail_known);
    EXPECT_FALSE(h.usable);
}

TEST(HeatTrace, ControlledTailAtModerateTime) {
    const HeatSample h = heat_trace(s3_large(), 1e-2);
    EXPECT_TRUE(h.tail_known);
    EXPECT_TRUE(h.usable);
    EXPECT_LT(h.truncation_bound, 1e-100);
}

TEST(HeatTrace, UncontrolledTailAtTinyTime) {
    const HeatSample h = heat_trace(s3_large(), 1e-4);
    EXPECT_TRUE(h.tail_known);
    EXPECT_FALSE(h.usable);
    EXPECT_GT(h.truncation_bound, 1e-6 * h.theta);
}

TEST(HeatTrace, TailBoundMatchesHalfIntegerGamma) {
    for (double t : {1e-4, 1e-3, 1e-2}) {
        const double expected = 2.0 / 3.0 * std::pow(t, -1.5) * oracle::upper_gamma_half_integer(2.5, t * 4e4);
        EXPECT_NEAR(heat_tail_bound(3, 1.0 / 3.0, t, 4e4), expected, 1e-10 * expected + 1e-300);
    }
}

TEST(HeatTrace, TailBoundDominatesTheTrueTail) {
    const SpectralMeasure full = sphere_spectrum(3, 4e5);
    const SpectralMeasure cut = sphere_spectrum(3, 1e4);
    for (double t : {1e-4, 3e-4, 1e-3}) {
        const double tail = heat_trace(full, t).theta - heat_trace(cut, t).theta;
        EXPECT_LE(tail, heat_trace(cut, t).truncation_bound) << t;
    }
}

TEST(HeatTrace, RejectsNonPositiveTime) { EXPECT_THROW(heat_trace(s3_large(), 0.0), DomainError); }

TEST(EdgeHeat, AffineSubstitution) {
    const SpectralMeasure sm = sphere_spectrum(3, 1e3);
    const EncodedMeasure em = encode(sm, Affine{kPi, 2.0});
    const double edge = edge_heat(em, 0.5).theta;
    const double direct = heat_trace(sm, 1.0).theta;
    EXPECT_NEAR(edge, direct, 1e-14 * direct);
}

TEST(EdgeHeat, ZeroModeContributesItsWeight) {
    const EncodedMeasure em = encode(single_atom(0.0, 7.0), Affine{kPi, 1.0});
    for (double s : {1e-3, 1.0, 100.0}) EXPECT_EQ(edge_heat(em, s).theta, 7.0);
}

TEST(EdgeHeat, BoundedOffsetClosedForm) {
    const SpectralMeasure sm = sphere_spectrum(3, 2e3);
    for (double c : {-1.5, 2.0}) {
        const EncodedMeasure em = encode(sm, Perturbed{1.5, BoundedOffset{c}});
        for (double s : {0.01, 0.1, 1.0}) {
            const HeatSample h = edge_heat(em, s);
            EXPECT_FALSE(h.identity_applies);
            const double expected = std::exp(s * c) * heat_trace(sm, 1.5 * s).theta;
            EXPECT_NEAR(h.theta, expected, 1e-13 * expected);
        }
    }
}

TEST(Zeta, SingleAtom) {
    const ZetaValue z = zeta(single_atom(2.0, 3.0), 1.0);
    EXPECT_DOUBLE_EQ(z.value, 1.5);
    EXPECT_TRUE(std::isinf(z.tail_bound));
}

TEST(Zeta, TruncationsAgreeWithinTailBounds) {
    const ZetaValue small = zeta(sphere_spectrum(3, 1e4), 2.5);
    const ZetaValue large = zeta(sphere_spectrum(3, 4e4), 2.5);
    EXPECT_LE(std::abs(small.value - large.value), small.tail_bound + large.tail_bound);
    EXPECT_EQ(small.excluded_zero_weight, 1.0);
    EXPECT_NEAR(small.tail_bound, 2.0 / 3.0 * 2.5 / 1.0 * std::pow(1e4, -1.0), 1e-18);
}

TEST(Zeta, DomainBoundary) {
    EXPECT_THROW(zeta(sphere_spectrum(3, 100), 1.4), DomainError);
    EXPECT_THROW(zeta(sphere_spectrum(3, 100), 1.5), DomainError);
    EXPECT_NO_THROW(zeta(sphere_spectrum(3, 100), 1.6));
}

TEST(EdgeZeta, UnitScaleMatchesZeta) {
    const SpectralMeasure sm = sphere_spectrum(3, 1e4);
    EXPECT_EQ(edge_zeta(encode(sm, Affine{kPi, 1.0}), 2.5), zeta(sm, 2.5).value);
}

TEST(EdgeZeta, SingleAtomArithmetic) {
    const EncodedMeasure em = encode(single_atom(2.0, 3.0), Affine{kPi, 4.0});
    EXPECT_NEAR(edge_zeta(em, 2.0), 3.0 / 64.0, 1e-16);
}

TEST(EdgeZeta, HalfScaleRatio) {
    const SpectralMeasure sm = sphere_spectrum(3, 1e4);
    const double ratio = edge_zeta(encode(sm, Affine{kPi, 0.5}), 2.5) / zeta(sm, 2.5).value;
    EXPECT_NEAR(ratio, std::pow(0.5, -2.5), 1e-12 * std::pow(0.5, -2.5));
}

TEST(EdgeZeta, RefusesPerturbedRules) {
    const EncodedMeasure em = encode(sphere_spectrum(3, 100), Perturbed{1.0, SubPower{0.5}});
    EXPECT_THROW(edge_zeta(em, 2.0), ValidationError);
}

// ---------------------------------------------------------------------------

TEST(SeeleyFit, ThreeSphereCoefficients) {
    const SeeleyFit fit = seeley_fit(s3_large(), log_grid(1e-3, 1e-2, 20), 3);
    EXPECT_NEAR(fit.a0_hat / (2.0 * kPi * kPi), 1.0, 0.01);
    EXPECT_NEAR(fit.a2_hat / fit.a0_hat, 1.0, 0.1);
    EXPECT_GT(fit.a0_hat, 0.0);
}

TEST(SeeleyFit, FlatTorusHasNoCurvatureTerm) {
    const SpectralMeasure torus = torus_spectrum(Eigen::MatrixXd::Identity(2, 2), 4e4);
    const SeeleyFit fit = seeley_fit(torus, log_grid(1e-3, 1e-2, 20), 2);
    EXPECT_NEAR(fit.a0_hat / (4.0 * kPi * kPi), 1.0, 0.01);
    EXPECT_NEAR(fit.a2_hat / fit.a0_hat, 0.0, 0.05);
}

TEST(SeeleyFit, EdgeCoefficientsRescale) {
    const double eps = 2.0;
    const SeeleyFit direct = seeley_fit(s3_large(), log_grid(1e-3, 1e-2, 20), 3);
    const SeeleyFit edge = seeley_fit_edge(encode(s3_large(), Affine{kPi, eps}), log_grid(1e-3 / eps, 1e-2 / eps, 20), 3);
    EXPECT_NEAR(edge.a0_hat / direct.a0_hat / std::pow(eps, -1.5), 1.0, 0.01);
}

TEST(SeeleyFit, RefusesUncontrolledTails) {
    EXPECT_THROW(seeley_fit(s3_large(), log_grid(1e-5, 1e-3, 10), 3), ValidationError);
    EXPECT_THROW(seeley_fit(s3_large(), {1e-2, 1e-3, 2e-2}, 3), ValidationError);
    EXPECT_THROW(seeley_fit(s3_large(), {1e-2, 2e-2}, 3), ValidationError);
}

TEST(SeeleyFit, ReportsLargeResidualsAsNumericalFailure) {
    // At t near 1 the expansion in t is far from linear.
    EXPECT_THROW(seeley_fit(s3_large(), log_grid(0.1, 3.0, 10), 3), NumericalError);
}

// ---------------------------------------------------------------------------
// Properties

TEST(TransformProperties, TransferIdentitiesOnFiftyPointGrids) {
    const SpectralMeasure sm = sphere_spectrum(3, 1e4);
    for (double eps : {0.25, 0.5, 2.0, 3.0}) {
        const EncodedMeasure em = encode(sm, Affine{kPi, eps});
        for (double s : log_grid(1e-3, 10.0, 50)) {
            const double theta = heat_trace(sm, eps * s).theta;
            EXPECT_LE(std::abs(edge_heat(em, s).theta - theta), 1e-12 * theta) << "eps=" << eps << " s=" << s;
        }
        for (double u : log_grid(1.6, 20.0, 50)) {
            const double z = zeta(sm, u).value;
            EXPECT_LE(std::abs(edge_zeta(em, u) - std::pow(eps, -u) * z), 1e-12 * std::abs(std::pow(eps, -u) * z))
                << "eps=" << eps << " u=" << u;
        }
    }
}

TEST(TransformProperties, HeatTraceDecreasingAndLogConvex) {
    const SpectralMeasure sm = lens_spectrum(5, 2, 1e4);
    // Past t ~ 1 the trace rounds to the zero-mode weight and strict decrease is unobservable.
    const auto grid = log_grid(1e-3, 1.0, 200);
    std::vector<double> logs;
    for (double t : grid) logs.push_back(std::log(heat_trace(sm, t).theta));
    for (std::size_t i = 1; i < logs.size(); ++i) EXPECT_LT(logs[i], logs[i - 1]);
    // Log-convexity in t: check the three-point inequality on the nonuniform grid.
    for (std::size_t i = 1; i + 1 < logs.size(); ++i) {
        const double w = (grid[i] - grid[i - 1]) / (grid[i + 1] - grid[i - 1]);
        EXPECT_LE(logs[i], (1.0 - w) * logs[i - 1] + w * logs[i + 1] + 1e-12);
    }
}

TEST(TransformProperties, ZetaSelfConsistencyAcrossGeometries) {
    for (double u : {1.6, 2.0, 3.0}) {
        const ZetaValue a = zeta(ball3_spectrum(5e3), u);
        const ZetaValue b = zeta(ball3_spectrum(2e4), u);
        EXPECT_LE(std::abs(a.value - b.value), a.tail_bound + b.tail_bound) << u;
    }
}
