#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "edgeweyl/encoding.hpp"

namespace edgeweyl {

/// Finite positive measure sum_l w_l delta_{y_l} on (0, inf), at most 64 atoms.
class AtomicMeasurePlus {
public:
    static constexpr std::size_t kMaxAtoms = 64;

    /// Points must be positive and sorted; weights positive. Repeated points are accepted here
    /// and rejected later by the orthogonalization as a breakdown.
    AtomicMeasurePlus(std::vector<double> points, std::vector<double> weights);
    /// Sorts (point, weight) pairs by point before validating.
    static AtomicMeasurePlus from_unsorted(std::vector<double> points, std::vector<double> weights);

    const std::vector<double>& points() const noexcept { return points_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return points_.size(); }
    double total_mass() const;
    /// Sum of w / (1 + y); finite for every finite measure.
    double finite_length_integral() const;

private:
    std::vector<double> points_;
    std::vector<double> weights_;
};

/// m(z) = sum_l w_l / (y_l - z); throws DomainError when z hits a support point.
std::complex<double> weyl_function(const AtomicMeasurePlus& mu, std::complex<double> z);

struct JacobiOperator {
    std::vector<double> diag;
    std::vector<double> offdiag;
    double total_mass = 0.0;
};

/// Three-term recurrence of the orthonormal polynomials of mu via Lanczos on the discrete
/// inner product with full reorthogonalization. Throws RecurrenceFailure on breakdown.
JacobiOperator measure_to_jacobi(const AtomicMeasurePlus& mu);

/// Eigenvalues and first-component weights of the Jacobi matrix.
AtomicMeasurePlus jacobi_spectrum(const JacobiOperator& jacobi);

/// Continued-fraction (Stieltjes) coefficients interleaved as (m_1, l_1, m_2, l_2, ...):
/// m(z) = 1 / (-z m_1 + 1 / (l_1 + 1 / (-z m_2 + ... + 1 / l_N))).
struct StieltjesString {
    std::vector<double> coefficients;

    std::size_t depth() const noexcept { return coefficients.size() / 2; }
    double mass(std::size_t k) const { return coefficients.at(2 * k); }
    double length(std::size_t k) const { return coefficients.at(2 * k + 1); }
    /// Bottom-up evaluation of the continued fraction.
    std::complex<double> weyl_function(std::complex<double> z) const;
};

/// Intermediate quotient-difference quantities, kept for positivity checks.
struct QdTable {
    std::vector<double> q;
    std::vector<double> e;
};

QdTable jacobi_to_qd(const JacobiOperator& jacobi);
/// Throws RecurrenceFailure carrying the first non-positive index.
StieltjesString jacobi_to_string(const JacobiOperator& jacobi);

/// Largest relative |string m(z) - sum w/(y - z)| over z = i tau, tau log-spaced in [0.1, 10].
double weyl_match_residual(const StieltjesString& string, const AtomicMeasurePlus& mu,
                           std::size_t n_points = 10);
/// Largest relative difference of points and weights after measure -> Jacobi -> spectrum.
double roundtrip_residual(const AtomicMeasurePlus& mu);

struct RealizationReport {
    std::size_t n_atoms = 0;
    double match_residual = 0.0;
    double roundtrip_residual = 0.0;
};

struct Realization {
    AtomicMeasurePlus measure;
    JacobiOperator jacobi;
    StieltjesString string;
    RealizationReport report;
};

/// Builds mu from the lowest n_keep atoms strictly below the edge of an affine encoding
/// (y_l = a - C_l) and runs the whole pipeline.
Realization realize_encoded(const EncodedMeasure& em, std::size_t n_keep);

/// True when EDGEWEYL_PRECISION=on selects long double accumulation.
bool extended_precision_enabled();

}  // namespace edgeweyl
