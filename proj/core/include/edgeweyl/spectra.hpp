#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace edgeweyl {

/// One eigenvalue with its multiplicity.
struct Atom {
    double lambda = 0.0;
    double weight = 0.0;
};

/// Truncated atomic spectral measure sum_n m_n delta_{lambda_n}, sorted by lambda.
///
/// `dimension` is absent for raw imported data. `gamma_expected` is the leading Weyl
/// constant when it is known analytically; the truncation `lambda_max` bounds every atom.
struct SpectralMeasure {
    std::vector<Atom> atoms;
    std::optional<int> dimension;
    std::optional<double> volume;
    std::optional<double> gamma_expected;
    double lambda_max = 0.0;
    std::string label;

    /// Throws ValidationError if atoms are unsorted, weights nonpositive, etc.
    void validate() const;
    double total_weight() const;
};

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);
/// Volume of the unit round sphere S^d.
double sphere_volume(int d);
/// Leading Weyl constant omega_d (2 pi)^{-d} Vol.
double weyl_constant(int d, double volume);

// ---------------------------------------------------------------------------
// Geometry descriptions

struct Sphere {
    int d = 3;
};

/// Flat torus given by the Gram matrix of its dual lattice: eigenvalues are k^T G k, k in Z^d.
struct FlatTorus {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(2, 2);
};

struct BergerSphere {
    double k_param = 1.0;
};

struct LensSpace {
    int p = 1;
    int q = 1;
};

struct DirichletBall3 {};

struct NoRemainder {};
/// Adds coeff * lambda^exponent to the counting function.
struct PowerLawRemainder {
    double coeff = 0.0;
    double exponent = 0.0;
};
/// Uniform jitter of each eigenvalue on [-amplitude, amplitude].
struct JitterUniform {
    double amplitude = 0.0;
};
using RemainderModel = std::variant<NoRemainder, PowerLawRemainder, JitterUniform>;

/// Synthetic eigenvalues with N(lambda_n) = n under gamma * lambda^{d/2} (+ remainder).
struct SyntheticWeyl {
    int d = 2;
    double gamma = 1.0;
    RemainderModel remainder = NoRemainder{};
    std::uint64_t seed = 0;
};

using GeometrySpec =
    std::variant<Sphere, FlatTorus, BergerSphere, LensSpace, DirichletBall3, SyntheticWeyl>;

/// Short generator name used in manifests ("sphere", "torus", ...).
std::string generator_name(const GeometrySpec& geometry);

// ---------------------------------------------------------------------------
// Generators

SpectralMeasure sphere_spectrum(int d, double lambda_max);

struct TorusOptions {
    /// Enumeration is refused once this many lattice points have been visited.
    std::size_t max_points = 50'000'000;
};
SpectralMeasure torus_spectrum(const Eigen::MatrixXd& gram, double lambda_max,
                               const TorusOptions& options = {});

SpectralMeasure berger_spectrum(double k_param, double lambda_max);
/// Degree-n multiplicity = #{(a, b) in {-n, -n+2, ..., n}^2 : a + q b = 0 mod 2p}.
/// For even q this rule keeps only even n, so the total weight tends to 1/(2p) of the
/// sphere's rather than 1/p.
SpectralMeasure lens_spectrum(int p, int q, double lambda_max);
SpectralMeasure ball3_spectrum(double lambda_max);
SpectralMeasure synthetic_spectrum(const SyntheticWeyl& spec, double lambda_max);

/// Dispatches on the geometry variant.
SpectralMeasure generate_spectrum(const GeometrySpec& geometry, double lambda_max);

/// Positive zeros of the spherical Bessel function j_l below `x_max`.
/// Zeros of j_l are bracketed by consecutive zeros of j_{l-1}; the returned table has one
/// row per l (possibly empty rows at the end are dropped).
std::vector<std::vector<double>> spherical_bessel_zeros(double x_max);

/// Sorts raw atoms and merges eigenvalues that agree to 1e-12 relative.
std::vector<Atom> merge_atoms(std::vector<Atom> raw);

}  // namespace edgeweyl
