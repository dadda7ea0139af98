#include "edgeweyl/transforms.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "edgeweyl/error.hpp"

namespace edgeweyl {

namespace {

constexpr double kUsableFraction = 1e-6;

void finish_tail(HeatSample& sample) {
    sample.usable = sample.tail_known && sample.truncation_bound <= kUsableFraction * sample.theta;
}

void require_controlled(const HeatSample& sample, const char* what) {
    if (!sample.usable) {
        std::ostringstream os;
        os << what << " at " << sample.t << " has an uncontrolled truncation tail";
        throw ValidationError(os.str());
    }
}

SeeleyFit fit_constant_plus_linear(const std::vector<double>& ts, const std::vector<double>& values) {
    const auto rows = static_cast<Eigen::Index>(ts.size());
    Eigen::MatrixXd design(rows, 2);
    Eigen::VectorXd rhs(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = ts[i];
        rhs(i) = values[i];
    }
    const Eigen::Vector2d scale = design.colwise().norm().transpose();
    const Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto sv = svd.singularValues();
    if (!(sv(1) > 0.0) || !(sv(0) / sv(1) < 1e8)) {
        throw NumericalError("heat-coefficient fit is ill-conditioned; widen the t grid");
    }
    const Eigen::VectorXd coef = svd.solve(rhs).cwiseQuotient(scale);

    SeeleyFit fit;
    fit.a0_hat = coef(0);
    fit.a2_hat = coef(1);
    fit.t_lo = ts.front();
    fit.t_hi = ts.back();
    const double rms = (rhs - design * coef).norm() / std::sqrt(static_cast<double>(rows));
    fit.residual_norm = rms / std::abs(fit.a0_hat);
    if (!(fit.residual_norm < 1e-3)) {
        std::ostringstream os;
        os << "heat-coefficient fit residual " << fit.residual_norm
           << " is not small; higher-order terms are not negligible on this grid";
        throw NumericalError(os.str());
    }
    return fit;
}

void check_grid(const std::vector<double>& grid) {
    if (grid.size() < 3) throw ValidationError("heat-coefficient fit needs at least 3 grid points");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw ValidationError("heat-coefficient grid must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw ValidationError("heat-coefficient grid must be increasing");
        }
    }
}

}  // namespace

double heat_tail_bound(int d, double gamma, double t, double lambda_max) {
    const double a = 0.5 * d + 1.0;
    return 2.0 * gamma * std::pow(t, -0.5 * d) * boost::math::tgamma(a, t * lambda_max);
}

HeatSample heat_trace(const SpectralMeasure& sm, double t) {
    if (!(t > 0.0)) throw DomainError("heat trace needs t > 0");
    HeatSample sample;
    sample.t = t;
    for (const Atom& a : sm.atoms) sample.theta += a.weight * std::exp(-t * a.lambda);
    if (sm.dimension && sm.gamma_expected) {
        sample.tail_known = true;
        sample.truncation_bound = heat_tail_bound(*sm.dimension, *sm.gamma_expected, t, sm.lambda_max);
    }
    finish_tail(sample);
    return sample;
}

HeatSample edge_heat(const EncodedMeasure& em, double s) {
    if (!(s > 0.0)) throw DomainError("edge heat trace needs s > 0");
    HeatSample sample;
    sample.t = s;
    for (const EncodedAtom& a : em.atoms) sample.theta += a.weight * std::exp(-s * (em.edge - a.c));
    const auto* affine = std::get_if<Affine>(&em.rule);
    sample.identity_applies = affine != nullptr;
    const SpectralMeasure& meta = em.source_meta;
    if (affine && meta.dimension && meta.gamma_expected) {
        sample.tail_known = true;
        sample.truncation_bound =
            heat_tail_bound(*meta.dimension, *meta.gamma_expected, affine->epsilon * s, meta.lambda_max);
    }
    finish_tail(sample);
    return sample;
}

double zeta_tail_bound(int d, double gamma, double u, double lambda_max) {
    const double half_d = 0.5 * d;
    return 2.0 * gamma * u / (u - half_d) * std::pow(lambda_max, half_d - u);
}

ZetaValue zeta(const SpectralMeasure& sm, double u, std::optional<double> tail_gamma) {
    if (sm.dimension && !(u > 0.5 * *sm.dimension)) {
        std::ostringstream os;
        os << "zeta needs u > d/2 = " << 0.5 * *sm.dimension << ", got u=" << u;
        throw DomainError(os.str());
    }
    if (!(u > 0.0)) throw DomainError("zeta needs u > 0");
    ZetaValue out;
    for (const Atom& a : sm.atoms) {
        if (a.lambda == 0.0) {
            out.excluded_zero_weight += a.weight;
            continue;
        }
        out.value += a.weight * std::pow(a.lambda, -u);
    }
    const std::optional<double> gamma = tail_gamma ? tail_gamma : sm.gamma_expected;
    if (sm.dimension && gamma && sm.lambda_max > 0.0) {
        out.tail_bound = zeta_tail_bound(*sm.dimension, *gamma, u, sm.lambda_max);
    } else {
        out.tail_bound = std::numeric_limits<double>::infinity();
    }
    return out;
}

double edge_zeta(const EncodedMeasure& em, double u) {
    if (!std::holds_alternative<Affine>(em.rule)) {
        throw ValidationError("edge zeta transfer is only defined for affine encodings");
    }
    const auto& dim = em.source_meta.dimension;
    if (dim && !(u > 0.5 * *dim)) {
        std::ostringstream os;
        os << "edge zeta needs u > d/2 = " << 0.5 * *dim << ", got u=" << u;
        throw DomainError(os.str());
    }
    if (!(u > 0.0)) throw DomainError("edge zeta needs u > 0");
    double value = 0.0;
    for (const EncodedAtom& a : em.atoms) {
        if (a.c < em.edge) value += a.weight * std::pow(em.edge - a.c, -u);
    }
    return value;
}

SeeleyFit seeley_fit(const SpectralMeasure& sm, const std::vector<double>& t_grid, int d) {
    check_grid(t_grid);
    if (d < 1) throw ValidationError("dimension must be positive");
    std::vector<double> values;
    values.reserve(t_grid.size());
    for (double t : t_grid) {
        const HeatSample sample = heat_trace(sm, t);
        require_controlled(sample, "heat trace");
        values.push_back(std::pow(4.0 * std::numbers::pi * t, 0.5 * d) * sample.theta);
    }
    return fit_constant_plus_linear(t_grid, values);
}

SeeleyFit seeley_fit_edge(const EncodedMeasure& em, const std::vector<double>& s_grid, int d) {
    check_grid(s_grid);
    if (d < 1) throw ValidationError("dimension must be positive");
    std::vector<double> values;
    values.reserve(s_grid.size());
    for (double s : s_grid) {
        const HeatSample sample = edge_heat(em, s);
        require_controlled(sample, "edge heat trace");
        values.push_back(std::pow(4.0 * std::numbers::pi * s, 0.5 * d) * sample.theta);
    }
    return fit_constant_plus_linear(s_grid, values);
}

}  // namespace edgeweyl
