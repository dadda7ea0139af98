#include "edgeweyl/counting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "edgeweyl/error.hpp"

namespace edgeweyl {

namespace {

double raw_bump(double t) {
    const double s = 1.0 - t * t;
    return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}

double integrate_raw_bump(double lo, double hi) {
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        raw_bump, lo, hi, 15, 1e-14, &error);
    if (!(error <= 1e-11)) {
        std::ostringstream os;
        os << "bump quadrature did not converge on [" << lo << ", " << hi << "], error " << error;
        throw NumericalError(os.str());
    }
    return value;
}

std::string describe(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

double count_edge(const EncodedMeasure& em, double c) {
    double total = 0.0;
    for (const EncodedAtom& a : em.atoms) {
        if (!(a.c >= c)) break;
        total += a.weight;
    }
    return total;
}

double count_lambda(const SpectralMeasure& sm, double lambda) {
    double total = 0.0;
    for (const Atom& a : sm.atoms) {
        if (!(a.lambda <= lambda)) break;
        total += a.weight;
    }
    return total;
}

namespace {

/// Largest double lambda whose computed edge value a - epsilon * lambda is still at least c.
/// The algebraic inverse (a - c) / epsilon can land an ulp on either side of an atom.
double affine_preimage_threshold(const Affine& rule, double c) {
    const auto edge_at = [&](double lambda) { return rule.a - rule.epsilon * lambda; };
    double lambda = (rule.a - c) / rule.epsilon;
    const double inf = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 64 && edge_at(lambda) < c; ++step) lambda = std::nextafter(lambda, -inf);
    for (int step = 0; step < 64; ++step) {
        const double next = std::nextafter(lambda, inf);
        if (edge_at(next) < c) break;
        lambda = next;
    }
    return lambda;
}

}  // namespace

CompositionReport check_composition(const SpectralMeasure& sm, const EncodedMeasure& em,
                                    const std::vector<double>& c_grid) {
    const auto* affine = std::get_if<Affine>(&em.rule);
    if (!affine) {
        throw ValidationError("the composition identity is only defined for affine encodings");
    }
    CompositionReport report;
    report.grid_size = c_grid.size();
    for (double c : c_grid) {
        const double lhs = count_edge(em, c);
        const double rhs = count_lambda(sm, affine_preimage_threshold(*affine, c));
        const double gap = std::abs(lhs - rhs);
        if (gap > report.max_discrepancy) report.max_discrepancy = gap;
        if (gap != 0.0 && !report.offending_c) {
            report.offending_c = c;
            report.passed = false;
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

double MollifierSpec::width(double y) const { return h0 * std::pow(y, theta); }

void MollifierSpec::validate() const {
    if (!(h0 > 0.0) || !std::isfinite(h0)) throw ValidationError("mollifier h0 must be positive");
    if (!(theta > 0.0 && theta < 1.0)) throw ValidationError("mollifier theta must lie in (0, 1)");
}

double max_smoothable_y(double y_max, const MollifierSpec& mollifier) {
    mollifier.validate();
    if (!(y_max > 0.0)) return 0.0;
    double lo = 0.0;
    double hi = y_max;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * y_max; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mid + mollifier.width(mid) <= y_max ? lo : hi) = mid;
    }
    return lo;
}

double bump_normalization() {
    static const double c = 1.0 / integrate_raw_bump(-1.0, 1.0);
    return c;
}

double bump_density(double t) { return bump_normalization() * raw_bump(t); }

namespace {

constexpr int kCdfPanels = 1024;

/// Integral of the raw bump from -1 to each node -1 + j / kCdfPanels on [-1, 0].
const std::vector<double>& raw_bump_partial_integrals() {
    static const std::vector<double> table = [] {
        std::vector<double> cumulative(kCdfPanels + 1, 0.0);
        for (int j = 0; j < kCdfPanels; ++j) {
            const double lo = -1.0 + static_cast<double>(j) / kCdfPanels;
            const double hi = -1.0 + static_cast<double>(j + 1) / kCdfPanels;
            cumulative[j + 1] =
                cumulative[j] + boost::math::quadrature::gauss<double, 15>::integrate(raw_bump, lo, hi);
        }
        return cumulative;
    }();
    return table;
}

}  // namespace

double bump_cdf(double t) {
    if (t <= -1.0) return 0.0;
    if (t >= 1.0) return 1.0;
    if (t > 0.0) return 1.0 - bump_cdf(-t);
    const auto& table = raw_bump_partial_integrals();
    const int j = std::min(static_cast<int>((t + 1.0) * kCdfPanels), kCdfPanels - 1);
    const double node = -1.0 + static_cast<double>(j) / kCdfPanels;
    const double partial = boost::math::quadrature::gauss<double, 15>::integrate(raw_bump, node, t);
    return bump_normalization() * (table[j] + partial);
}

double count_y(const EncodedMeasure& em, double y) { return count_edge(em, em.edge - y); }

CountingCurve smoothed_curve(const EncodedMeasure& em, const std::vector<double>& y_grid,
                             const MollifierSpec& mollifier) {
    mollifier.validate();

    // Edge variables of the atoms, increasing, with prefix sums of weights.
    std::vector<double> ys(em.atoms.size());
    std::vector<double> prefix(em.atoms.size() + 1, 0.0);
    for (std::size_t i = 0; i < em.atoms.size(); ++i) {
        ys[i] = em.edge - em.atoms[i].c;
        prefix[i + 1] = prefix[i] + em.atoms[i].weight;
    }

    CountingCurve curve;
    curve.mollifier = mollifier;
    curve.epsilon = rule_scale(em.rule);
    curve.samples.reserve(y_grid.size());

    double previous_y = 0.0;
    for (std::size_t k = 0; k < y_grid.size(); ++k) {
        const double y = y_grid[k];
        if (!(y > 0.0)) throw ValidationError("smoothing grid must be positive");
        if (k > 0 && !(y > previous_y)) throw ValidationError("smoothing grid must be increasing");
        previous_y = y;

        const double h = mollifier.width(y);
        if (y + h > em.y_max) {
            throw DomainError("smoothing window at y=" + describe(y) + " reaches past the truncation edge " +
                              describe(em.y_max));
        }
        const double dh = mollifier.theta * h / y;

        const auto first = std::lower_bound(ys.begin(), ys.end(), y - h) - ys.begin();
        const auto last = std::upper_bound(ys.begin(), ys.end(), y + h) - ys.begin();
        const auto at = std::upper_bound(ys.begin(), ys.end(), y) - ys.begin();

        double smoothed = prefix[first];
        double rho = 0.0;
        for (auto i = first; i < last; ++i) {
            const double u = (y - ys[i]) / h;
            const double w = em.atoms[i].weight;
            smoothed += w * bump_cdf(u);
            rho += w * bump_density(u) * (1.0 - u * dh) / h;
        }
        curve.samples.push_back({y, prefix[at], smoothed, rho});
    }
    return curve;
}

// ---------------------------------------------------------------------------

WindowStats window_stats(const EncodedMeasure& em, double c, double delta) {
    if (!(delta > 0.0)) throw ValidationError("window length must be positive");
    WindowStats stats;
    for (const EncodedAtom& a : em.atoms) {
        if (a.c >= c && a.c <= c + delta) {
            stats.jump_total += a.weight;
            ++stats.cluster_count;
        }
    }
    if (stats.cluster_count > 0) stats.mbar = stats.jump_total / static_cast<double>(stats.cluster_count);
    return stats;
}

HitProbability edge_hit_probability(int ell, int d, double epsilon, double delta, std::uint64_t trials,
                                    std::uint64_t seed) {
    if (ell < 0) throw ValidationError("cluster index must be nonnegative");
    if (d < 1) throw ValidationError("dimension must be positive");
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    if (!(delta > 0.0)) throw ValidationError("window length must be positive");
    const double cell = epsilon * (2.0 * ell + d);
    if (!(delta < cell)) {
        throw ValidationError("window length " + describe(delta) + " spans a whole cell of length " +
                              describe(cell));
    }
    if (trials == 0) throw ValidationError("at least one trial is required");

    const double lambda = static_cast<double>(ell) * static_cast<double>(ell + d - 1);
    const double cluster = std::numbers::pi - epsilon * lambda;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> offset(0.0, cell);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        // The window [c, c + delta] starts below the cluster by a uniform offset within one cell.
        const double c = cluster - offset(rng);
        if (cluster >= c && cluster <= c + delta) ++hits;
    }
    return {delta / cell, static_cast<double>(hits) / static_cast<double>(trials)};
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi >= lo)) throw ValidationError("log grid needs 0 < lo <= hi");
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> grid(n);
    const double step = std::log(hi / lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) grid[i] = lo * std::exp(step * static_cast<double>(i));
    grid.back() = hi;
    return grid;
}

}  // namespace edgeweyl
