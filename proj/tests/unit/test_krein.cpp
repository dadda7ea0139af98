#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "edgeweyl/error.hpp"
#include "edgeweyl/krein.hpp"

using namespace edgeweyl;
using cplx = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

/// Seeded random measure with minimum gap at least 1e-3 of the largest point.
AtomicMeasurePlus random_measure(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> point(0.05, 50.0);
    std::uniform_real_distribution<double> weight(0.1, 10.0);
    for (;;) {
        std::vector<double> ys(n);
        for (double& y : ys) y = point(rng);
        std::sort(ys.begin(), ys.end());
        bool separated = true;
        for (std::size_t i = 1; i < n; ++i) separated = separated && ys[i] - ys[i - 1] >= 1e-3 * ys.back();
        if (!separated) continue;
        std::vector<double> ws(n);
        for (double& w : ws) w = weight(rng);
        return AtomicMeasurePlus(ys, ws);
    }
}

/// Resolvent entry total_mass * e1^T (J - z)^{-1} e1, solved densely.
cplx jacobi_resolvent(const JacobiOperator& j, cplx z) {
    const auto n = static_cast<Eigen::Index>(j.diag.size());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = j.diag[i] - z;
        if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = j.offdiag[i];
    }
    Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(n);
    e1(0) = 1.0;
    return j.total_mass * m.partialPivLu().solve(e1)(0);
}

AtomicMeasurePlus quadratic_encoder(double kappa, std::size_t n) {
    std::vector<double> ys;
    for (std::size_t i = 0; i < n; ++i) ys.push_back(kappa * static_cast<double>((i + 1) * (i + 1)));
    return AtomicMeasurePlus(ys, std::vector<double>(n, 1.0));
}

}  // namespace

TEST(WeylFunction, SingleAtomAtI) {
    const AtomicMeasurePlus mu({5.0}, {2.0});
    const cplx m = weyl_function(mu, cplx(0.0, 1.0));
    EXPECT_NEAR(m.real(), 10.0 / 26.0, 1e-15);
    EXPECT_NEAR(m.imag(), 2.0 / 26.0, 1e-15);
}

TEST(WeylFunction, SymmetricPairCancels) {
    EXPECT_EQ(weyl_function(AtomicMeasurePlus({1.0, 3.0}, {1.0, 1.0}), cplx(2.0, 0.0)), cplx(0.0, 0.0));
}

TEST(WeylFunction, RejectsSupportPoints) {
    EXPECT_THROW(weyl_function(AtomicMeasurePlus({1.0, 3.0}, {1.0, 1.0}), cplx(3.0, 0.0)), DomainError);
}

TEST(AtomicMeasure, Invariants) {
    EXPECT_THROW(AtomicMeasurePlus({}, {}), ValidationError);
    EXPECT_THROW(AtomicMeasurePlus({0.0, 1.0}, {1.0, 1.0}), DomainError);
    EXPECT_THROW(AtomicMeasurePlus({2.0, 1.0}, {1.0, 1.0}), ValidationError);
    EXPECT_THROW(AtomicMeasurePlus({1.0}, {-1.0}), ValidationError);
    EXPECT_THROW(AtomicMeasurePlus(std::vector<double>(65, 1.0), std::vector<double>(65, 1.0)), ValidationError);
    const AtomicMeasurePlus mu({1.0, 3.0}, {2.0, 4.0});
    EXPECT_EQ(mu.total_mass(), 6.0);
    EXPECT_DOUBLE_EQ(mu.finite_length_integral(), 1.0 + 1.0);
}

TEST(MeasureToJacobi, SingleAtom) {
    const JacobiOperator j = measure_to_jacobi(AtomicMeasurePlus({5.0}, {2.0}));
    ASSERT_EQ(j.diag.size(), 1u);
    EXPECT_DOUBLE_EQ(j.diag[0], 5.0);
    EXPECT_TRUE(j.offdiag.empty());
    EXPECT_EQ(j.total_mass, 2.0);
}

TEST(MeasureToJacobi, SymmetricPairByHand) {
    const JacobiOperator j = measure_to_jacobi(AtomicMeasurePlus({1.0, 3.0}, {1.0, 1.0}));
    ASSERT_EQ(j.diag.size(), 2u);
    EXPECT_NEAR(j.diag[0], 2.0, 1e-15);
    EXPECT_NEAR(j.diag[1], 2.0, 1e-15);
    ASSERT_EQ(j.offdiag.size(), 1u);
    EXPECT_NEAR(j.offdiag[0], 1.0, 1e-15);
}

TEST(MeasureToJacobi, DuplicatePointBreaksDown) {
    try {
        measure_to_jacobi(AtomicMeasurePlus({1.0, 2.0, 2.0}, {1.0, 1.0, 1.0}));
        FAIL() << "expected a breakdown";
    } catch (const RecurrenceFailure& e) {
        // Two distinct points span a rank-two space, so the second coupling vanishes.
        EXPECT_EQ(e.index(), 2u);
    }
}

TEST(JacobiSpectrum, SingleAtom) {
    const AtomicMeasurePlus mu = jacobi_spectrum({{5.0}, {}, 2.0});
    ASSERT_EQ(mu.size(), 1u);
    EXPECT_DOUBLE_EQ(mu.points()[0], 5.0);
    EXPECT_DOUBLE_EQ(mu.weights()[0], 2.0);
}

TEST(JacobiSpectrum, TwoByTwoByHand) {
    const AtomicMeasurePlus mu = jacobi_spectrum({{2.0, 2.0}, {1.0}, 2.0});
    ASSERT_EQ(mu.size(), 2u);
    EXPECT_NEAR(mu.points()[0], 1.0, 1e-14);
    EXPECT_NEAR(mu.points()[1], 3.0, 1e-14);
    EXPECT_NEAR(mu.weights()[0], 1.0, 1e-14);
    EXPECT_NEAR(mu.weights()[1], 1.0, 1e-14);
}

TEST(JacobiSpectrum, RoundTripOnEightRandomAtoms) {
    std::mt19937_64 rng(8);
    EXPECT_LE(roundtrip_residual(random_measure(rng, 8)), 1e-9);
}

TEST(JacobiToString, SingleAtomDepthOne) {
    const AtomicMeasurePlus mu({4.0}, {3.0});
    const StieltjesString s = jacobi_to_string(measure_to_jacobi(mu));
    ASSERT_EQ(s.coefficients.size(), 2u);
    const cplx z(0.0, 1.0);
    EXPECT_LE(std::abs(s.weyl_function(z) - 3.0 / (4.0 - z)), 1e-12 * std::abs(3.0 / (4.0 - z)));
}

TEST(JacobiToString, QuadraticEncoderSequence) {
    const AtomicMeasurePlus mu = quadratic_encoder(0.1, 10);
    const JacobiOperator j = measure_to_jacobi(mu);
    const StieltjesString s = jacobi_to_string(j);
    ASSERT_EQ(s.depth(), 10u);
    for (double c : s.coefficients) EXPECT_GT(c, 0.0);
    EXPECT_LE(weyl_match_residual(s, mu), 1e-8);
    EXPECT_LE(roundtrip_residual(mu), 1e-9);
}

TEST(JacobiToString, SupportAtZeroIsRejected) {
    EXPECT_THROW(AtomicMeasurePlus({0.0, 1.0}, {1.0, 1.0}), DomainError);
    // A Jacobi matrix with a nonpositive eigenvalue fails the qd positivity check.
    try {
        jacobi_to_string({{1.0, 1.0}, {1.0}, 1.0});  // eigenvalues 0 and 2
        FAIL() << "expected a positivity failure";
    } catch (const RecurrenceFailure& e) {
        EXPECT_EQ(e.index(), 2u);
    }
}

TEST(JacobiToString, StringMatchesIndependentResolvent) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        const AtomicMeasurePlus mu = random_measure(rng, 6);
        const JacobiOperator j = measure_to_jacobi(mu);
        const StieltjesString s = jacobi_to_string(j);
        for (cplx z : {cplx(-1.0, 0.0), cplx(0.3, 2.0), cplx(10.0, -0.5)}) {
            const cplx expected = jacobi_resolvent(j, z);
            EXPECT_LE(std::abs(s.weyl_function(z) - expected), 1e-10 * std::abs(expected));
            EXPECT_LE(std::abs(weyl_function(mu, z) - expected), 1e-10 * std::abs(expected));
        }
    }
}

TEST(RealizeEncoded, ThreeSphereLowestSix) {
    const EncodedMeasure em = encode(sphere_spectrum(3, 100), Affine{kPi, 1.0});
    const Realization r = realize_encoded(em, 6);
    const std::vector<double> points{3, 8, 15, 24, 35, 48};
    const std::vector<double> weights{4, 9, 16, 25, 36, 49};
    ASSERT_EQ(r.measure.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_NEAR(r.measure.points()[i], points[i], 1e-12 * points[i]);
        EXPECT_EQ(r.measure.weights()[i], weights[i]);
    }
    EXPECT_EQ(r.report.n_atoms, 6u);
    EXPECT_LE(r.report.roundtrip_residual, 1e-9);
    EXPECT_LE(r.report.match_residual, 1e-8);
}

TEST(RealizeEncoded, RejectsEmptyAndNonAffine) {
    const SpectralMeasure sm = sphere_spectrum(3, 100);
    EXPECT_THROW(realize_encoded(encode(sm, Affine{kPi, 1.0}), 0), ValidationError);
    EXPECT_THROW(realize_encoded(encode(sm, Affine{kPi, 1.0}), 65), ValidationError);
    EXPECT_THROW(realize_encoded(encode(sm, Perturbed{1.0, SubPower{0.5}}), 4), ValidationError);
}

// ---------------------------------------------------------------------------
// Properties

TEST(KreinProperties, RoundTripOnSeededSuite) {
    std::mt19937_64 rng(2025);
    for (std::size_t n = 1; n <= 32; ++n) {
        for (int rep = 0; rep < 3; ++rep) {
            const AtomicMeasurePlus mu = random_measure(rng, n);
            EXPECT_LE(roundtrip_residual(mu), 1e-9) << "n=" << n;
        }
    }
}

TEST(KreinProperties, WeylContractAndQdPositivity) {
    std::mt19937_64 rng(77);
    for (std::size_t n = 1; n <= 16; ++n) {
        for (int rep = 0; rep < 4; ++rep) {
            const AtomicMeasurePlus mu = random_measure(rng, n);
            const JacobiOperator j = measure_to_jacobi(mu);
            const QdTable qd = jacobi_to_qd(j);
            for (double q : qd.q) EXPECT_GT(q, 0.0);
            for (double e : qd.e) EXPECT_GT(e, 0.0);
            const StieltjesString s = jacobi_to_string(j);
            EXPECT_LE(weyl_match_residual(s, mu), 1e-8) << "n=" << n;
        }
    }
}

TEST(KreinProperties, PermutedInputsGiveIdenticalStrings) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const AtomicMeasurePlus mu = random_measure(rng, 12);
        std::vector<std::size_t> order(mu.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<double> ys;
        std::vector<double> ws;
        for (std::size_t i : order) {
            ys.push_back(mu.points()[i]);
            ws.push_back(mu.weights()[i]);
        }
        const StieltjesString a = jacobi_to_string(measure_to_jacobi(mu));
        const StieltjesString b = jacobi_to_string(measure_to_jacobi(AtomicMeasurePlus::from_unsorted(ys, ws)));
        ASSERT_EQ(a.coefficients.size(), b.coefficients.size());
        for (std::size_t i = 0; i < a.coefficients.size(); ++i) {
            EXPECT_NEAR(a.coefficients[i], b.coefficients[i], 1e-10 * std::abs(a.coefficients[i]));
        }
    }
}

TEST(KreinProperties, StringLengthMatchesFiniteLengthIntegral) {
    // Sum of the lengths equals m(0) = sum w / y for this convention.
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        const AtomicMeasurePlus mu = random_measure(rng, 7);
        const StieltjesString s = jacobi_to_string(measure_to_jacobi(mu));
        double total = 0.0;
        for (std::size_t k = 0; k < s.depth(); ++k) total += s.length(k);
        EXPECT_NEAR(total, weyl_function(mu, 0.0).real(), 1e-10 * total);
    }
}

TEST(KreinProperties, ExtendedPrecisionSwitch) {
    ::setenv("EDGEWEYL_PRECISION", "on", 1);
    EXPECT_TRUE(extended_precision_enabled());
    const AtomicMeasurePlus mu = quadratic_encoder(0.1, 16);
    const double extended = weyl_match_residual(jacobi_to_string(measure_to_jacobi(mu)), mu);
    ::setenv("EDGEWEYL_PRECISION", "off", 1);
    EXPECT_FALSE(extended_precision_enabled());
    const double plain = weyl_match_residual(jacobi_to_string(measure_to_jacobi(mu)), mu);
    ::unsetenv("EDGEWEYL_PRECISION");
    EXPECT_LE(extended, 1e-8);
    EXPECT_LE(plain, 1e-8);
}
