#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "edgeweyl/counting.hpp"
#include "edgeweyl/encoding.hpp"
#include "edgeweyl/spectra.hpp"

namespace edgeweyl {

/// Closed fit range [lo, hi] in the edge variable.
struct FitWindow {
    double lo = 0.0;
    double hi = 0.0;
};

/// Top decade below 0.9 * y_max.
FitWindow default_window(double y_max);

struct SlopeEstimate {
    double alpha_hat = 0.0;
    double intercept = 0.0;
    FitWindow window;
    double r_squared = 0.0;
    std::size_t n_points = 0;
};

/// OLS of log N on log y over the samples inside the window.
SlopeEstimate loglog_slope(const std::vector<std::pair<double, double>>& samples, const FitWindow& window);

struct WeylEstimate {
    double d_hat = 0.0;
    double gamma_hat = 0.0;
    SlopeEstimate slope;
    double epsilon = 1.0;
    /// Nearest integer to d_hat and |d_hat - d_nearest|.
    int d_nearest = 0;
    double d_deviation = 0.0;
};

/// Fits the smoothed count: d_hat = 2 alpha, gamma_hat = epsilon^{d_hat/2} * geometric mean of
/// N / y^{d_hat/2} over the window.
WeylEstimate estimate_weyl(const CountingCurve& curve, double epsilon, const FitWindow& window);

/// k_hat = d / (2 alpha) from a curve in x = a - C.
double estimate_k(const CountingCurve& curve, int d, const FitWindow& window);

struct RemainderReport {
    /// Set when the residual vanishes on the whole window; `slope` is then meaningless.
    bool degenerate = false;
    SlopeEstimate slope;
};

/// Log-log slope of |N_smoothed - gamma epsilon^{-d/2} y^{d/2}|.
RemainderReport remainder_probe(const CountingCurve& curve, int d, double gamma, double epsilon,
                                const FitWindow& window);

struct TwoTermFit {
    double a = 0.0;  // coefficient of y^{3/2}
    double b = 0.0;  // coefficient of y
    double r_squared = 0.0;
    std::size_t n_points = 0;
};

/// Least squares of N_smoothed on {y^{3/2}, y}; needs at least 10 samples in the window.
TwoTermFit two_term_fit(const CountingCurve& curve, const FitWindow& window);

/// Log-log slope of the smoothed density rho.
SlopeEstimate density_slope(const CountingCurve& curve, const FitWindow& window);

struct StabilityReport {
    double d_hat = 0.0;
    /// max over the grid of |N / (gamma epsilon^{-d/2} y^{d/2}) - 1| / envelope(y).
    double envelope_k = 0.0;
    WeylEstimate estimate;
};

/// Encodes sm with the perturbed rule, smooths on n_points log-spaced y in the window and
/// compares the smoothed count with the leading Weyl term. Needs dimension and gamma metadata.
StabilityReport stability_report(const SpectralMeasure& sm, const Perturbed& rule, const FitWindow& window,
                                 const MollifierSpec& mollifier = {}, std::size_t n_points = 64);

}  // namespace edgeweyl
