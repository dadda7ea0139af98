#include "edgeweyl/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "edgeweyl/error.hpp"

namespace edgeweyl {

namespace {

void check_window(const FitWindow& window) {
    if (!(window.lo > 0.0) || !(window.hi > window.lo)) {
        std::ostringstream os;
        os << "fit window [" << window.lo << ", " << window.hi << "] must satisfy 0 < lo < hi";
        throw ValidationError(os.str());
    }
}

bool inside(const FitWindow& window, double y) { return y >= window.lo && y <= window.hi; }

std::vector<std::pair<double, double>> column(const CountingCurve& curve, double CountingSample::*field) {
    std::vector<std::pair<double, double>> out;
    out.reserve(curve.samples.size());
    for (const CountingSample& s : curve.samples) out.emplace_back(s.y, s.*field);
    return out;
}

}  // namespace

FitWindow default_window(double y_max) {
    if (!(y_max > 0.0)) throw ValidationError("default window needs a positive y_max");
    return {0.09 * y_max, 0.9 * y_max};
}

SlopeEstimate loglog_slope(const std::vector<std::pair<double, double>>& samples, const FitWindow& window) {
    check_window(window);
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [y, n] : samples) {
        if (!inside(window, y)) continue;
        if (!(n > 0.0)) {
            std::ostringstream os;
            os << "nonpositive count " << n << " at y=" << y << " inside the fit window";
            throw ValidationError(os.str());
        }
        xs.push_back(std::log(y));
        ys.push_back(std::log(n));
    }
    if (xs.size() < 3) {
        throw ValidationError("at least 3 samples are needed inside the fit window, got " +
                              std::to_string(xs.size()));
    }

    const double count = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= count;
    my /= count;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw ValidationError("fit window samples share a single y value");

    SlopeEstimate est;
    est.alpha_hat = sxy / sxx;
    est.intercept = my - est.alpha_hat * mx;
    est.window = window;
    est.n_points = xs.size();
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (est.intercept + est.alpha_hat * xs[i]);
        ss_res += r * r;
    }
    if (syy > 0.0) {
        est.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    } else {
        est.r_squared = 1.0;
    }
    return est;
}

WeylEstimate estimate_weyl(const CountingCurve& curve, double epsilon, const FitWindow& window) {
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    WeylEstimate est;
    est.slope = loglog_slope(column(curve, &CountingSample::n_smoothed), window);
    est.epsilon = epsilon;
    est.d_hat = 2.0 * est.slope.alpha_hat;
    est.d_nearest = static_cast<int>(std::lround(est.d_hat));
    est.d_deviation = std::abs(est.d_hat - est.d_nearest);

    double log_sum = 0.0;
    std::size_t n = 0;
    for (const CountingSample& s : curve.samples) {
        if (!inside(window, s.y)) continue;
        log_sum += std::log(s.n_smoothed) - 0.5 * est.d_hat * std::log(s.y);
        ++n;
    }
    est.gamma_hat = std::pow(epsilon, 0.5 * est.d_hat) * std::exp(log_sum / static_cast<double>(n));
    return est;
}

double estimate_k(const CountingCurve& curve, int d, const FitWindow& window) {
    if (d < 1) throw ValidationError("dimension must be positive");
    const SlopeEstimate slope = loglog_slope(column(curve, &CountingSample::n_smoothed), window);
    if (!(slope.alpha_hat > 0.0)) throw NumericalError("counting slope is not positive; k is undefined");
    return static_cast<double>(d) / (2.0 * slope.alpha_hat);
}

RemainderReport remainder_probe(const CountingCurve& curve, int d, double gamma, double epsilon,
                                const FitWindow& window) {
    check_window(window);
    if (d < 1 || !(gamma > 0.0) || !(epsilon > 0.0)) {
        throw ValidationError("remainder probe needs d >= 1, gamma > 0 and epsilon > 0");
    }
    std::vector<std::pair<double, double>> residual;
    bool all_zero = true;
    for (const CountingSample& s : curve.samples) {
        if (!inside(window, s.y)) continue;
        const double leading = gamma * std::pow(s.y / epsilon, 0.5 * d);
        const double r = std::abs(s.n_smoothed - leading);
        if (r > 1e-12 * leading) all_zero = false;
        residual.emplace_back(s.y, r);
    }
    RemainderReport report;
    if (all_zero) {
        report.degenerate = true;
        report.slope.window = window;
        report.slope.n_points = residual.size();
        return report;
    }
    report.slope = loglog_slope(residual, window);
    return report;
}

TwoTermFit two_term_fit(const CountingCurve& curve, const FitWindow& window) {
    check_window(window);
    std::vector<const CountingSample*> used;
    for (const CountingSample& s : curve.samples) {
        if (inside(window, s.y)) used.push_back(&s);
    }
    if (used.size() < 10) {
        throw ValidationError("two-term fit needs at least 10 samples, got " + std::to_string(used.size()));
    }
    const auto rows = static_cast<Eigen::Index>(used.size());
    Eigen::MatrixXd design(rows, 2);
    Eigen::VectorXd rhs(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double y = used[i]->y;
        design(i, 0) = y * std::sqrt(y);
        design(i, 1) = y;
        rhs(i) = used[i]->n_smoothed;
    }
    const Eigen::Vector2d scale = design.colwise().norm().transpose();
    const Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto sv = svd.singularValues();
    const double cond = sv(0) / sv(1);
    if (!(cond < 1e8)) {
        std::ostringstream os;
        os << "two-term design is ill-conditioned (condition " << cond << "); widen the window";
        throw NumericalError(os.str());
    }
    const Eigen::VectorXd coef = svd.solve(rhs).cwiseQuotient(scale);

    TwoTermFit fit;
    fit.a = coef(0);
    fit.b = coef(1);
    fit.n_points = used.size();
    const double mean = rhs.mean();
    const double ss_tot = (rhs.array() - mean).square().sum();
    const double ss_res = (rhs - design * coef).squaredNorm();
    fit.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
    return fit;
}

SlopeEstimate density_slope(const CountingCurve& curve, const FitWindow& window) {
    return loglog_slope(column(curve, &CountingSample::rho), window);
}

StabilityReport stability_report(const SpectralMeasure& sm, const Perturbed& rule, const FitWindow& window,
                                 const MollifierSpec& mollifier, std::size_t n_points) {
    check_window(window);
    if (!sm.dimension || !sm.gamma_expected) {
        throw ValidationError("stability report needs dimension and gamma metadata");
    }
    const int d = *sm.dimension;
    const double gamma = *sm.gamma_expected;

    const EncodingRule encoding = rule;
    const EncodedMeasure em = encode(sm, encoding);
    const CountingCurve curve = smoothed_curve(em, log_grid(window.lo, window.hi, n_points), mollifier);

    StabilityReport report;
    report.estimate = estimate_weyl(curve, rule.epsilon, window);
    report.d_hat = report.estimate.d_hat;
    for (const CountingSample& s : curve.samples) {
        const double leading = gamma * std::pow(s.y / rule.epsilon, 0.5 * d);
        const double relative = std::abs(s.n_smoothed / leading - 1.0);
        report.envelope_k = std::max(report.envelope_k, relative / theoretical_envelope(encoding, s.y));
    }
    return report;
}

}  // namespace edgeweyl
