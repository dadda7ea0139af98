#include "edgeweyl/krein.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "edgeweyl/error.hpp"

namespace edgeweyl {

namespace {

std::string describe(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

template <class Real>
JacobiOperator lanczos(const AtomicMeasurePlus& mu) {
    const std::size_t n = mu.size();
    const auto& ys = mu.points();
    const auto& ws = mu.weights();
    const Real mass = static_cast<Real>(mu.total_mass());
    const double scale = *std::max_element(ys.begin(), ys.end());
    const Real tolerance = static_cast<Real>(1e-12 * scale);

    std::vector<std::vector<Real>> basis;
    basis.reserve(n);
    std::vector<Real> current(n);
    for (std::size_t i = 0; i < n; ++i) current[i] = std::sqrt(static_cast<Real>(ws[i]) / mass);

    auto dot = [n](const std::vector<Real>& a, const std::vector<Real>& b) {
        Real s = 0;
        for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
        return s;
    };

    JacobiOperator jacobi;
    jacobi.total_mass = mu.total_mass();
    Real beta_prev = 0;
    for (std::size_t k = 0; k < n; ++k) {
        basis.push_back(current);
        std::vector<Real> next(n);
        for (std::size_t i = 0; i < n; ++i) next[i] = static_cast<Real>(ys[i]) * current[i];
        const Real alpha = dot(current, next);
        jacobi.diag.push_back(static_cast<double>(alpha));
        if (k + 1 == n) break;

        for (std::size_t i = 0; i < n; ++i) {
            next[i] -= alpha * current[i];
            if (k > 0) next[i] -= beta_prev * basis[k - 1][i];
        }
        // Two passes of full reorthogonalization against the discrete inner product.
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : basis) {
                const Real overlap = dot(q, next);
                for (std::size_t i = 0; i < n; ++i) next[i] -= overlap * q[i];
            }
        }
        const Real beta = std::sqrt(dot(next, next));
        if (!(beta > tolerance)) {
            throw RecurrenceFailure(k + 1, "orthogonalization broke down at step " + std::to_string(k + 1) +
                                               " (off-diagonal " + describe(static_cast<double>(beta)) +
                                               "); the support has repeated points");
        }
        jacobi.offdiag.push_back(static_cast<double>(beta));
        for (std::size_t i = 0; i < n; ++i) next[i] /= beta;
        current = std::move(next);
        beta_prev = beta;
    }
    return jacobi;
}

template <class Real>
QdTable quotient_difference(const JacobiOperator& jacobi) {
    const std::size_t n = jacobi.diag.size();
    QdTable table;
    Real q = static_cast<Real>(jacobi.diag[0]);
    for (std::size_t k = 0; k < n; ++k) {
        if (!(q > 0)) {
            throw RecurrenceFailure(k + 1, "quotient q_" + std::to_string(k + 1) + " = " +
                                               describe(static_cast<double>(q)) + " is not positive");
        }
        table.q.push_back(static_cast<double>(q));
        if (k + 1 == n) break;
        const Real beta = static_cast<Real>(jacobi.offdiag[k]);
        const Real e = beta * beta / q;
        if (!(e > 0)) {
            throw RecurrenceFailure(k + 1, "difference e_" + std::to_string(k + 1) + " = " +
                                               describe(static_cast<double>(e)) + " is not positive");
        }
        table.e.push_back(static_cast<double>(e));
        q = static_cast<Real>(jacobi.diag[k + 1]) - e;
    }
    return table;
}

template <class Real>
StieltjesString build_string(const JacobiOperator& jacobi, const QdTable& table) {
    const std::size_t n = table.q.size();
    StieltjesString string;
    string.coefficients.reserve(2 * n);
    Real m = Real(1) / static_cast<Real>(jacobi.total_mass);
    for (std::size_t k = 0; k < n; ++k) {
        const Real l = Real(1) / (m * static_cast<Real>(table.q[k]));
        string.coefficients.push_back(static_cast<double>(m));
        string.coefficients.push_back(static_cast<double>(l));
        if (k + 1 < n) m = Real(1) / (l * static_cast<Real>(table.e[k]));
    }
    for (std::size_t i = 0; i < string.coefficients.size(); ++i) {
        const double c = string.coefficients[i];
        if (!(c > 0.0) || !std::isfinite(c)) {
            throw RecurrenceFailure(i / 2 + 1, "string coefficient " + std::to_string(i) + " = " +
                                                   describe(c) + " is not positive");
        }
    }
    return string;
}

void validate_jacobi(const JacobiOperator& jacobi) {
    if (jacobi.diag.empty()) throw ValidationError("Jacobi operator is empty");
    if (jacobi.offdiag.size() + 1 != jacobi.diag.size()) {
        throw ValidationError("Jacobi operator needs exactly one fewer off-diagonal than diagonal entry");
    }
    if (!(jacobi.total_mass > 0.0)) throw ValidationError("Jacobi total mass must be positive");
    for (double b : jacobi.offdiag) {
        if (!(b > 0.0)) throw ValidationError("Jacobi off-diagonal entries must be positive");
    }
}

}  // namespace

// ---------------------------------------------------------------------------

AtomicMeasurePlus::AtomicMeasurePlus(std::vector<double> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.empty()) throw ValidationError("measure has no atoms");
    if (points_.size() != weights_.size()) throw ValidationError("points and weights differ in length");
    if (points_.size() > kMaxAtoms) {
        throw ValidationError("measure has " + std::to_string(points_.size()) + " atoms; the cap is " +
                              std::to_string(kMaxAtoms));
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!(points_[i] > 0.0) || !std::isfinite(points_[i])) {
            throw DomainError("support point " + describe(points_[i]) + " is not in (0, inf)");
        }
        if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
            throw ValidationError("weight " + std::to_string(i) + " is not positive");
        }
        if (i > 0 && points_[i] < points_[i - 1]) throw ValidationError("support points are not sorted");
    }
}

AtomicMeasurePlus AtomicMeasurePlus::from_unsorted(std::vector<double> points, std::vector<double> weights) {
    if (points.size() != weights.size()) throw ValidationError("points and weights differ in length");
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
    std::vector<double> p;
    std::vector<double> w;
    for (std::size_t i : order) {
        p.push_back(points[i]);
        w.push_back(weights[i]);
    }
    return AtomicMeasurePlus(std::move(p), std::move(w));
}

double AtomicMeasurePlus::total_mass() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

double AtomicMeasurePlus::finite_length_integral() const {
    double s = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) s += weights_[i] / (1.0 + points_[i]);
    return s;
}

std::complex<double> weyl_function(const AtomicMeasurePlus& mu, std::complex<double> z) {
    std::complex<double> sum = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const std::complex<double> gap = mu.points()[i] - z;
        if (gap == 0.0) throw DomainError("z lies on the support point " + describe(mu.points()[i]));
        sum += mu.weights()[i] / gap;
    }
    return sum;
}

bool extended_precision_enabled() {
    const char* flag = std::getenv("EDGEWEYL_PRECISION");
    return flag != nullptr && std::string(flag) == "on";
}

JacobiOperator measure_to_jacobi(const AtomicMeasurePlus& mu) {
    return extended_precision_enabled() ? lanczos<long double>(mu) : lanczos<double>(mu);
}

AtomicMeasurePlus jacobi_spectrum(const JacobiOperator& jacobi) {
    validate_jacobi(jacobi);
    const auto n = static_cast<Eigen::Index>(jacobi.diag.size());
    const Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(jacobi.diag.data(), n);
    const Eigen::VectorXd sub =
        Eigen::Map<const Eigen::VectorXd>(jacobi.offdiag.data(), static_cast<Eigen::Index>(jacobi.offdiag.size()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver failed");

    std::vector<double> points(static_cast<std::size_t>(n));
    std::vector<double> weights(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        const double first = solver.eigenvectors()(0, k);
        points[k] = solver.eigenvalues()(k);
        weights[k] = jacobi.total_mass * first * first;
    }
    return AtomicMeasurePlus(std::move(points), std::move(weights));
}

QdTable jacobi_to_qd(const JacobiOperator& jacobi) {
    validate_jacobi(jacobi);
    return extended_precision_enabled() ? quotient_difference<long double>(jacobi)
                                        : quotient_difference<double>(jacobi);
}

StieltjesString jacobi_to_string(const JacobiOperator& jacobi) {
    const QdTable table = jacobi_to_qd(jacobi);
    return extended_precision_enabled() ? build_string<long double>(jacobi, table)
                                        : build_string<double>(jacobi, table);
}

std::complex<double> StieltjesString::weyl_function(std::complex<double> z) const {
    const std::size_t n = depth();
    if (n == 0) throw ValidationError("string has no coefficients");
    std::complex<double> tail = -z * mass(n - 1) + 1.0 / length(n - 1);
    for (std::size_t k = n - 1; k-- > 0;) tail = -z * mass(k) + 1.0 / (length(k) + 1.0 / tail);
    return 1.0 / tail;
}

double weyl_match_residual(const StieltjesString& string, const AtomicMeasurePlus& mu, std::size_t n_points) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n_points; ++i) {
        const double frac = n_points > 1 ? static_cast<double>(i) / static_cast<double>(n_points - 1) : 0.0;
        const std::complex<double> z(0.0, 0.1 * std::pow(100.0, frac));
        const std::complex<double> exact = weyl_function(mu, z);
        worst = std::max(worst, std::abs(string.weyl_function(z) - exact) / std::abs(exact));
    }
    return worst;
}

double roundtrip_residual(const AtomicMeasurePlus& mu) {
    const AtomicMeasurePlus back = jacobi_spectrum(measure_to_jacobi(mu));
    if (back.size() != mu.size()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        worst = std::max(worst, std::abs(back.points()[i] - mu.points()[i]) / std::abs(mu.points()[i]));
        worst = std::max(worst, std::abs(back.weights()[i] - mu.weights()[i]) / mu.weights()[i]);
    }
    return worst;
}

Realization realize_encoded(const EncodedMeasure& em, std::size_t n_keep) {
    if (!std::holds_alternative<Affine>(em.rule)) {
        throw ValidationError("realization is only defined for affine encodings");
    }
    if (n_keep == 0) throw ValidationError("n_keep must be at least 1");
    if (n_keep > AtomicMeasurePlus::kMaxAtoms) {
        throw ValidationError("n_keep exceeds the cap of " + std::to_string(AtomicMeasurePlus::kMaxAtoms));
    }
    std::vector<double> points;
    std::vector<double> weights;
    for (const EncodedAtom& a : em.atoms) {
        if (points.size() == n_keep) break;
        if (!(a.c < em.edge)) continue;
        points.push_back(em.edge - a.c);
        weights.push_back(a.weight);
    }
    if (points.size() < n_keep) {
        throw ValidationError("only " + std::to_string(points.size()) + " atoms lie strictly below the edge");
    }

    AtomicMeasurePlus measure(std::move(points), std::move(weights));
    JacobiOperator jacobi = measure_to_jacobi(measure);
    StieltjesString string = jacobi_to_string(jacobi);
    RealizationReport report;
    report.n_atoms = measure.size();
    report.match_residual = weyl_match_residual(string, measure);
    report.roundtrip_residual = roundtrip_residual(measure);
    return {std::move(measure), std::move(jacobi), std::move(string), report};
}

}  // namespace edgeweyl
