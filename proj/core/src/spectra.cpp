#include "edgeweyl/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>

#include "edgeweyl/error.hpp"

namespace edgeweyl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMergeTolerance = 1e-12;
constexpr double kBesselTolerance = 1e-12;

void require_lambda_max(double lambda_max) {
    if (!(lambda_max >= 0.0) || !std::isfinite(lambda_max)) {
        throw ValidationError("lambda_max must be a finite nonnegative number");
    }
}

// C(n, k) in double; exact while the result stays below 2^53.
double binomial(long n, long k) {
    if (k < 0 || n < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (long i = 1; i <= k; ++i) {
        c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return std::round(c);
}

bool nearly_equal(double a, double b) {
    return a == b || std::abs(a - b) <= kMergeTolerance * std::max(std::abs(a), std::abs(b));
}

std::string format_param(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

}  // namespace

void SpectralMeasure::validate() const {
    if (!(lambda_max >= 0.0)) throw ValidationError("lambda_max must be nonnegative");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const Atom& a = atoms[i];
        if (!std::isfinite(a.lambda) || a.lambda < 0.0) {
            throw ValidationError("atom " + std::to_string(i) + " has a negative or non-finite lambda");
        }
        if (!std::isfinite(a.weight) || !(a.weight > 0.0)) {
            throw ValidationError("atom " + std::to_string(i) + " has a nonpositive weight");
        }
        if (a.lambda > lambda_max) {
            throw ValidationError("atom " + std::to_string(i) + " lies above lambda_max");
        }
        if (i > 0 && !(atoms[i - 1].lambda < a.lambda)) {
            throw ValidationError("atoms are not strictly increasing at index " + std::to_string(i));
        }
    }
    if (dimension && *dimension < 1) throw ValidationError("dimension must be positive");
    if (volume && !(*volume > 0.0)) throw ValidationError("volume must be positive");
    if (gamma_expected && !(*gamma_expected > 0.0)) {
        throw ValidationError("gamma_expected must be positive");
    }
}

double SpectralMeasure::total_weight() const {
    return std::accumulate(atoms.begin(), atoms.end(), 0.0,
                           [](double s, const Atom& a) { return s + a.weight; });
}

double unit_ball_volume(int d) {
    return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

double sphere_volume(int d) {
    return 2.0 * std::pow(kPi, 0.5 * (d + 1)) / std::tgamma(0.5 * (d + 1));
}

double weyl_constant(int d, double volume) {
    return unit_ball_volume(d) / std::pow(2.0 * kPi, d) * volume;
}

std::vector<Atom> merge_atoms(std::vector<Atom> raw) {
    std::sort(raw.begin(), raw.end(),
              [](const Atom& a, const Atom& b) { return a.lambda < b.lambda; });
    std::vector<Atom> merged;
    merged.reserve(raw.size());
    for (const Atom& a : raw) {
        if (!merged.empty() && nearly_equal(merged.back().lambda, a.lambda)) {
            merged.back().weight += a.weight;
        } else {
            merged.push_back(a);
        }
    }
    return merged;
}

std::string generator_name(const GeometrySpec& geometry) {
    struct Visitor {
        std::string operator()(const Sphere& s) const { return "sphere-d" + std::to_string(s.d); }
        std::string operator()(const FlatTorus& t) const {
            return "torus-d" + std::to_string(t.gram.rows());
        }
        std::string operator()(const BergerSphere& b) const {
            return "berger-k" + format_param(b.k_param);
        }
        std::string operator()(const LensSpace& l) const {
            return "lens-p" + std::to_string(l.p) + "-q" + std::to_string(l.q);
        }
        std::string operator()(const DirichletBall3&) const { return "ball3"; }
        std::string operator()(const SyntheticWeyl& s) const {
            return "synthetic-d" + std::to_string(s.d);
        }
    };
    return std::visit(Visitor{}, geometry);
}

// ---------------------------------------------------------------------------

SpectralMeasure sphere_spectrum(int d, double lambda_max) {
    if (d < 1) throw ValidationError("sphere dimension must be >= 1");
    require_lambda_max(lambda_max);

    SpectralMeasure m;
    m.dimension = d;
    m.volume = sphere_volume(d);
    m.gamma_expected = weyl_constant(d, *m.volume);
    m.lambda_max = lambda_max;
    m.label = "S^" + std::to_string(d);

    for (long l = 0;; ++l) {
        const double lambda = static_cast<double>(l) * static_cast<double>(l + d - 1);
        if (lambda > lambda_max) break;
        const double mult = binomial(l + d, l) - binomial(l + d - 2, l - 2);
        m.atoms.push_back({lambda, mult});
    }
    return m;
}

// ---------------------------------------------------------------------------

namespace {

// Fincke-Pohst style enumeration of k in Z^d with ||R k||^2 <= bound, R upper triangular.
class LatticeEnumerator {
public:
    LatticeEnumerator(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& r, double bound,
                      std::size_t cap)
        : gram_(gram), r_(r), bound_(bound), cap_(cap), k_(gram.rows()) {}

    std::vector<Atom> run() {
        recurse(static_cast<int>(k_.size()) - 1, 0.0);
        return std::move(out_);
    }

private:
    void recurse(int i, double partial) {
        const int d = static_cast<int>(k_.size());
        double shift = 0.0;
        for (int j = i + 1; j < d; ++j) shift += r_(i, j) * static_cast<double>(k_[j]);
        const double rii = r_(i, i);
        const double remaining = bound_ - partial;
        if (remaining < 0.0) return;
        // Small slack so boundary points are not lost to rounding; filtered exactly below.
        const double radius = std::sqrt(remaining) * (1.0 + 1e-9) / rii;
        const double centre = -shift / rii;
        const long lo = static_cast<long>(std::ceil(centre - radius));
        const long hi = static_cast<long>(std::floor(centre + radius));
        for (long ki = lo; ki <= hi; ++ki) {
            k_[i] = ki;
            const double coord = rii * static_cast<double>(ki) + shift;
            const double next = partial + coord * coord;
            if (i == 0) {
                if (++visited_ > cap_) {
                    throw ValidationError("lattice enumeration exceeded the configured cap of " +
                                          std::to_string(cap_) + " points");
                }
                const double value = exact_norm();
                if (value <= bound_) out_.push_back({value, 1.0});
            } else {
                recurse(i - 1, next);
            }
        }
        k_[i] = 0;
    }

    double exact_norm() const {
        const int d = static_cast<int>(k_.size());
        double s = 0.0;
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) {
                s += gram_(a, b) * static_cast<double>(k_[a]) * static_cast<double>(k_[b]);
            }
        }
        return std::max(s, 0.0);
    }

    const Eigen::MatrixXd& gram_;
    const Eigen::MatrixXd& r_;
    double bound_;
    std::size_t cap_;
    std::size_t visited_ = 0;
    std::vector<long> k_;
    std::vector<Atom> out_;
};

}  // namespace

SpectralMeasure torus_spectrum(const Eigen::MatrixXd& gram, double lambda_max,
                               const TorusOptions& options) {
    require_lambda_max(lambda_max);
    const auto d = gram.rows();
    if (d < 1 || gram.cols() != d) throw ValidationError("torus Gram matrix must be square");
    if (!gram.isApprox(gram.transpose(), 1e-12)) {
        throw ValidationError("torus Gram matrix must be symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw ValidationError("torus Gram matrix must be positive definite");
    }
    const Eigen::MatrixXd r = llt.matrixU();
    const double det = gram.determinant();

    SpectralMeasure m;
    m.dimension = static_cast<int>(d);
    m.volume = std::pow(2.0 * kPi, static_cast<double>(d)) / std::sqrt(det);
    m.gamma_expected = weyl_constant(static_cast<int>(d), *m.volume);
    m.lambda_max = lambda_max;
    m.label = "T^" + std::to_string(d);
    m.atoms = merge_atoms(LatticeEnumerator(gram, r, lambda_max, options.max_points).run());
    return m;
}

// ---------------------------------------------------------------------------

SpectralMeasure berger_spectrum(double k_param, double lambda_max) {
    if (!(k_param > 0.0)) throw ValidationError("Berger parameter k must be positive");
    require_lambda_max(lambda_max);
    const double shear = k_param * k_param - 1.0;

    std::vector<Atom> raw;
    for (long n = 0;; ++n) {
        const double base = static_cast<double>(n) * static_cast<double>(n + 2);
        const double nn = static_cast<double>(n) * static_cast<double>(n);
        const double lowest = shear >= 0.0 ? base : base + shear * nn;
        if (lowest > lambda_max) break;
        for (long mm = -n; mm <= n; ++mm) {
            const double lambda = base + shear * static_cast<double>(mm * mm);
            if (lambda <= lambda_max) raw.push_back({lambda, static_cast<double>(n + 1)});
        }
    }

    SpectralMeasure m;
    m.dimension = 3;
    m.volume = k_param * sphere_volume(3);
    m.lambda_max = lambda_max;
    m.label = "Berger(k=" + format_param(k_param) + ")";
    m.atoms = merge_atoms(std::move(raw));
    return m;
}

// ---------------------------------------------------------------------------

namespace {

long positive_mod(long a, long m) {
    const long r = a % m;
    return r < 0 ? r + m : r;
}

// #{(a, b) : a, b in {-n, -n+2, ..., n}, a + q b = 0 mod 2p}, counted one b at a time.
double lens_multiplicity(long n, long p, long q) {
    const long modulus = 2 * p;
    double count = 0.0;
    for (long j = 0; j <= n; ++j) {
        const long b = -n + 2 * j;
        // a = -n + 2 i must satisfy a = r (mod 2p) with r = -q b.
        const long r = positive_mod(-q * b, modulus);
        const long shifted = positive_mod(r + n, modulus);
        if (shifted % 2 != 0) continue;
        const long t = shifted / 2;  // i = t (mod p)
        if (t <= n) count += static_cast<double>((n - t) / p + 1);
    }
    return count;
}

}  // namespace

SpectralMeasure lens_spectrum(int p, int q, double lambda_max) {
    if (p < 1) throw ValidationError("lens space order p must be >= 1");
    if (std::gcd(p, q) != 1) throw ValidationError("p,q not coprime");
    require_lambda_max(lambda_max);

    SpectralMeasure m;
    m.dimension = 3;
    m.volume = sphere_volume(3) / p;
    m.gamma_expected = weyl_constant(3, *m.volume);
    m.lambda_max = lambda_max;
    m.label = "L(" + std::to_string(p) + "," + std::to_string(q) + ")";
    for (long n = 0;; ++n) {
        const double lambda = static_cast<double>(n) * static_cast<double>(n + 2);
        if (lambda > lambda_max) break;
        const double w = lens_multiplicity(n, p, q);
        if (w > 0.0) m.atoms.push_back({lambda, w});
    }
    return m;
}

// ---------------------------------------------------------------------------

namespace {

// j_l(x) by upward recurrence from j_0 and j_1. Every point evaluated here lies past the
// first zero of j_{l-1}, hence beyond l, where the recurrence is stable.
double sph_bessel_upward(unsigned l, double x) {
    if (x <= static_cast<double>(l)) return std::sph_bessel(l, x);
    const double s = std::sin(x);
    const double c = std::cos(x);
    double previous = s / x;
    if (l == 0) return previous;
    double current = s / (x * x) - c / x;
    for (unsigned n = 1; n < l; ++n) {
        const double next = (2.0 * n + 1.0) / x * current - previous;
        previous = current;
        current = next;
    }
    return current;
}

double bracketed_bessel_zero(unsigned l, double lo, double hi) {
    auto f = [l](double x) { return sph_bessel_upward(l, x); };
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        std::ostringstream os;
        os << "no sign change of j_" << l << " on bracket [" << lo << ", " << hi << "]";
        throw BracketFailure(os.str());
    }
    boost::uintmax_t iterations = 200;
    const auto tolerance = [](double a, double b) { return std::abs(b - a) <= kBesselTolerance; };
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tolerance, iterations);
    if (!(std::abs(b - a) <= kBesselTolerance)) {
        std::ostringstream os;
        os << "root search for j_" << l << " did not converge on [" << lo << ", " << hi << "]";
        throw NumericalError(os.str());
    }
    return 0.5 * (a + b);
}

}  // namespace

std::vector<std::vector<double>> spherical_bessel_zeros(double x_max) {
    std::vector<std::vector<double>> table;
    if (!(x_max > 0.0)) return table;

    // The first zero of j_l exceeds l + 1/2, so l never exceeds x_max.
    const long l_cap = static_cast<long>(std::ceil(x_max));
    const long base_count = static_cast<long>(std::ceil(x_max / kPi)) + l_cap + 2;

    std::vector<double> previous(static_cast<std::size_t>(base_count));
    for (long k = 0; k < base_count; ++k) previous[k] = kPi * static_cast<double>(k + 1);

    auto count_below = [x_max](const std::vector<double>& zs) {
        return static_cast<long>(std::upper_bound(zs.begin(), zs.end(), x_max) - zs.begin());
    };

    table.emplace_back(previous.begin(), previous.begin() + count_below(previous));
    if (table.back().empty()) {
        table.clear();
        return table;
    }

    for (long l = 1; l <= l_cap; ++l) {
        std::vector<double> current;
        const long needed_extra = l_cap - l + 1;
        long below = 0;
        for (std::size_t k = 0; k + 1 < previous.size(); ++k) {
            const double z = bracketed_bessel_zero(static_cast<unsigned>(l), previous[k], previous[k + 1]);
            current.push_back(z);
            if (z <= x_max) {
                ++below;
            } else if (static_cast<long>(current.size()) >= below + needed_extra) {
                break;
            }
        }
        if (below == 0) break;
        table.emplace_back(current.begin(), current.begin() + below);
        previous = std::move(current);
    }
    return table;
}

SpectralMeasure ball3_spectrum(double lambda_max) {
    if (!(lambda_max > 0.0)) throw ValidationError("lambda_max must be positive");
    const auto zeros = spherical_bessel_zeros(std::sqrt(lambda_max));

    std::vector<Atom> raw;
    for (std::size_t l = 0; l < zeros.size(); ++l) {
        for (double x : zeros[l]) {
            const double lambda = x * x;
            if (lambda <= lambda_max) raw.push_back({lambda, 2.0 * static_cast<double>(l) + 1.0});
        }
    }

    SpectralMeasure m;
    m.dimension = 3;
    m.volume = 4.0 * kPi / 3.0;
    m.gamma_expected = weyl_constant(3, *m.volume);
    m.lambda_max = lambda_max;
    m.label = "B^3 Dirichlet";
    m.atoms = merge_atoms(std::move(raw));
    return m;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> synthetic_power_law(const SyntheticWeyl& s, const PowerLawRemainder& r,
                                        double lambda_max) {
    const double half_d = 0.5 * s.d;
    auto counting = [&](double x) { return s.gamma * std::pow(x, half_d) + r.coeff * std::pow(x, r.exponent); };
    auto slope = [&](double x) {
        return s.gamma * half_d * std::pow(x, half_d - 1.0) +
               r.coeff * r.exponent * std::pow(x, r.exponent - 1.0);
    };

    std::vector<double> out;
    double previous = 0.0;
    for (long n = 1;; ++n) {
        const double target = static_cast<double>(n);
        double lo = previous;
        if (!(counting(lo) < target)) {
            throw ValidationError("power-law remainder makes the counting model non-monotone near lambda=" +
                                  format_param(lo));
        }
        double hi = std::max(1.0, 2.0 * lo);
        while (counting(hi) < target) {
            hi *= 2.0;
            if (hi > 1e300) throw BracketFailure("synthetic eigenvalue could not be bracketed");
        }
        for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (counting(mid) < target ? lo : hi) = mid;
        }
        const double root = hi;
        if (!(slope(root) > 0.0)) {
            throw ValidationError("power-law remainder makes the counting model non-monotone near lambda=" +
                                  format_param(root));
        }
        if (root > lambda_max) break;
        if (n > 1 && !(root > previous)) {
            throw ValidationError("synthetic eigenvalues are not strictly increasing");
        }
        out.push_back(root);
        previous = root;
    }
    return out;
}

}  // namespace

SpectralMeasure synthetic_spectrum(const SyntheticWeyl& s, double lambda_max) {
    if (s.d < 1) throw ValidationError("synthetic dimension must be >= 1");
    if (!(s.gamma > 0.0)) throw ValidationError("synthetic gamma must be positive");
    require_lambda_max(lambda_max);

    auto base = [&](long n) { return std::pow(static_cast<double>(n) / s.gamma, 2.0 / s.d); };

    std::vector<double> lambdas;
    if (std::holds_alternative<NoRemainder>(s.remainder)) {
        for (long n = 1; base(n) <= lambda_max; ++n) lambdas.push_back(base(n));
    } else if (const auto* pl = std::get_if<PowerLawRemainder>(&s.remainder)) {
        if (!(pl->exponent < 0.5 * s.d)) {
            throw ValidationError("power-law remainder exponent must be below d/2");
        }
        lambdas = synthetic_power_law(s, *pl, lambda_max);
    } else {
        const auto& jitter = std::get<JitterUniform>(s.remainder);
        if (!(jitter.amplitude > 0.0)) throw ValidationError("jitter amplitude must be positive");
        std::mt19937_64 rng(s.seed);
        std::uniform_real_distribution<double> noise(-jitter.amplitude, jitter.amplitude);
        double previous = -1.0;
        for (long n = 1; base(n) - jitter.amplitude <= lambda_max; ++n) {
            const double value = base(n) + noise(rng);
            if (value < 0.0 || !(value > previous)) {
                throw ValidationError("jitter violates eigenvalue order at n=" + std::to_string(n) +
                                      " (lambda=" + format_param(value) + ")");
            }
            previous = value;
            if (value <= lambda_max) lambdas.push_back(value);
        }
    }

    SpectralMeasure m;
    m.dimension = s.d;
    m.gamma_expected = s.gamma;
    m.volume = s.gamma * std::pow(2.0 * kPi, s.d) / unit_ball_volume(s.d);
    m.lambda_max = lambda_max;
    m.label = "synthetic(d=" + std::to_string(s.d) + ")";
    m.atoms.reserve(lambdas.size());
    for (double x : lambdas) m.atoms.push_back({x, 1.0});
    return m;
}

SpectralMeasure generate_spectrum(const GeometrySpec& geometry, double lambda_max) {
    struct Visitor {
        double lambda_max;
        SpectralMeasure operator()(const Sphere& s) const { return sphere_spectrum(s.d, lambda_max); }
        SpectralMeasure operator()(const FlatTorus& t) const { return torus_spectrum(t.gram, lambda_max); }
        SpectralMeasure operator()(const BergerSphere& b) const {
            return berger_spectrum(b.k_param, lambda_max);
        }
        SpectralMeasure operator()(const LensSpace& l) const {
            return lens_spectrum(l.p, l.q, lambda_max);
        }
        SpectralMeasure operator()(const DirichletBall3&) const { return ball3_spectrum(lambda_max); }
        SpectralMeasure operator()(const SyntheticWeyl& s) const {
            return synthetic_spectrum(s, lambda_max);
        }
    };
    return std::visit(Visitor{lambda_max}, geometry);
}

}  // namespace edgeweyl
