#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "edgeweyl/encoding.hpp"
#include "edgeweyl/spectra.hpp"

namespace edgeweyl {

/// Weight of encoded atoms with C_n >= c.
double count_edge(const EncodedMeasure& em, double c);
/// Weight of atoms with lambda_n <= lambda.
double count_lambda(const SpectralMeasure& sm, double lambda);

struct CompositionReport {
    bool passed = true;
    double max_discrepancy = 0.0;
    /// First grid value where the two counts differ.
    std::optional<double> offending_c;
    std::size_t grid_size = 0;
};

/// Compares count_edge(em, C) with count_lambda(sm, (a - C) / epsilon) on every grid point.
/// Throws ValidationError if em was not produced by an affine rule.
CompositionReport check_composition(const SpectralMeasure& sm, const EncodedMeasure& em,
                                    const std::vector<double>& c_grid);

// ---------------------------------------------------------------------------

/// Unit-mass bump c * exp(-1 / (1 - t^2)) on (-1, 1) with width h(y) = h0 * y^theta.
struct MollifierSpec {
    double h0 = 4.0;
    double theta = 0.5;

    double width(double y) const;
    /// Throws ValidationError unless h0 > 0 and 0 < theta < 1.
    void validate() const;
};

/// Largest y with y + h(y) <= y_max.
double max_smoothable_y(double y_max, const MollifierSpec& mollifier);

/// Normalizing constant of the bump, computed once by quadrature.
double bump_normalization();
/// Normalized bump density.
double bump_density(double t);
/// Integral of the normalized bump over (-1, t].
double bump_cdf(double t);

struct CountingSample {
    double y = 0.0;
    double n = 0.0;
    double n_smoothed = 0.0;
    double rho = 0.0;
};

struct CountingCurve {
    std::vector<CountingSample> samples;
    double epsilon = 1.0;
    MollifierSpec mollifier;
};

/// Step count in the edge variable: weight of atoms with y_n <= y.
double count_y(const EncodedMeasure& em, double y);

/// Mollified count and its exact derivative on an increasing y grid.
/// Throws DomainError if y + h(y) exceeds the truncation edge em.y_max.
CountingCurve smoothed_curve(const EncodedMeasure& em, const std::vector<double>& y_grid,
                             const MollifierSpec& mollifier = {});

struct WindowStats {
    double jump_total = 0.0;
    std::size_t cluster_count = 0;
    std::optional<double> mbar;
};

/// Atoms with C_n in the closed window [c, c + delta]; jump_total is their total weight.
WindowStats window_stats(const EncodedMeasure& em, double c, double delta);

struct HitProbability {
    double analytic = 0.0;
    double empirical = 0.0;
};

/// Chance that a window of length delta, placed uniformly within one cluster cell of length
/// epsilon (2 ell + d), contains the cluster point.
HitProbability edge_hit_probability(int ell, int d, double epsilon, double delta, std::uint64_t trials,
                                    std::uint64_t seed);

/// n log-spaced points on [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t n);

}  // namespace edgeweyl
