#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "edgeweyl/encoding.hpp"
#include "edgeweyl/spectra.hpp"

namespace edgeweyl {

struct HeatSample {
    double t = 0.0;
    double theta = 0.0;
    /// Certified bound on the atoms dropped by truncation; meaningful only when tail_known.
    double truncation_bound = 0.0;
    bool tail_known = false;
    /// tail_known and truncation_bound <= 1e-6 * theta.
    bool usable = false;
    /// Cleared for edge traces of non-affine rules, where no transfer identity applies.
    bool identity_applies = true;
};

/// Sum of w exp(-t lambda). The tail bound assumes N(L) <= 2 gamma L^{d/2} past the truncation.
HeatSample heat_trace(const SpectralMeasure& sm, double t);

/// Sum of w exp(-s (a - C_n)).
HeatSample edge_heat(const EncodedMeasure& em, double s);

/// Tail bound 2 gamma t^{-d/2} Gamma(d/2 + 1, t lambda_max).
double heat_tail_bound(int d, double gamma, double t, double lambda_max);

struct ZetaValue {
    double value = 0.0;
    /// +infinity when no Weyl constant is available.
    double tail_bound = 0.0;
    /// Weight of lambda = 0 atoms left out of the sum.
    double excluded_zero_weight = 0.0;
};

/// Sum of w lambda^{-u} over positive eigenvalues; throws DomainError for u <= d/2.
ZetaValue zeta(const SpectralMeasure& sm, double u, std::optional<double> tail_gamma = std::nullopt);

/// Tail bound 2 gamma u / (u - d/2) lambda_max^{d/2 - u}.
double zeta_tail_bound(int d, double gamma, double u, double lambda_max);

/// Sum of w (a - C_n)^{-u} over atoms strictly below the edge; affine rules only.
double edge_zeta(const EncodedMeasure& em, double u);

struct SeeleyFit {
    double a0_hat = 0.0;
    double a2_hat = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    /// RMS fit residual divided by |a0_hat|.
    double residual_norm = 0.0;
};

/// Least squares of (4 pi t)^{d/2} Theta(t) against {1, t}.
SeeleyFit seeley_fit(const SpectralMeasure& sm, const std::vector<double>& t_grid, int d);
/// Same fit applied to the edge heat trace.
SeeleyFit seeley_fit_edge(const EncodedMeasure& em, const std::vector<double>& s_grid, int d);

}  // namespace edgeweyl
