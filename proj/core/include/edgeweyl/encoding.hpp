#pragma once

#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgeweyl/spectra.hpp"

namespace edgeweyl {

// ---------------------------------------------------------------------------
// Slowly varying prefactors. Logs are shifted (log(e x), log(e + log x)) and the
// argument is clamped at 1 so that every family is finite and positive on [0, inf).

struct ConstSlow {
    double ell_inf = 1.0;
};
/// (log(e x))^alpha.
struct LogPower {
    double alpha = 0.0;
};
/// (log(e x))^alpha * (log log(e^e x))^beta.
struct LogLogPower {
    double alpha = 0.0;
    double beta = 0.0;
};
using SlowVariation = std::variant<ConstSlow, LogPower, LogLogPower>;

double evaluate(const SlowVariation& slow, double x);

/// log(e * max(x, 1)).
double shifted_log(double x);
/// log(e + log(max(x, 1))).
double shifted_loglog(double x);

// ---------------------------------------------------------------------------
// Perturbations delta(lambda) subtracted from the affine edge variable.

/// lambda / (log(e lambda))^alpha
struct LogDistortion {
    double alpha = 1.0;
};
/// lambda / ((log(e lambda))^alpha (log log(e^e lambda))^beta)
struct IterLog {
    double alpha = 1.0;
    double beta = 1.0;
};
/// lambda * L(lambda) with L decaying to zero.
struct SlowFactor {
    SlowVariation slow = LogPower{-2.0};
};
/// Constant shift c.
struct BoundedOffset {
    double c = 2.0;
};
/// (log(e lambda))^beta with 0 < beta < 1.
struct SubLog {
    double beta = 0.5;
};
/// lambda L(lambda) (1 + theta(lambda)), theta = amp / (1 + log(e lambda))^rate.
struct OscBV {
    SlowVariation slow = LogPower{-1.0};
    double theta_amp = 0.5;
    double theta_rate = 1.0;
};
/// lambda^q with 0 < q < 1.
struct SubPower {
    double q = 0.5;
};

using PerturbationSpec =
    std::variant<LogDistortion, IterLog, SlowFactor, BoundedOffset, SubLog, OscBV, SubPower>;

double evaluate(const PerturbationSpec& delta, double lambda);
std::string family_name(const PerturbationSpec& delta);
/// Validates family parameters; throws ValidationError.
void validate(const PerturbationSpec& delta);

// ---------------------------------------------------------------------------
// Encoding rules lambda -> C.

/// C = a - epsilon * lambda.
struct Affine {
    double a = 3.14159265358979323846;
    double epsilon = 1.0;
};
/// C = a - b lambda^k L(lambda).
struct PolyType {
    double a = 3.14159265358979323846;
    double b = 1.0;
    double k = 1.0;
    SlowVariation slow = ConstSlow{1.0};
};
/// C = pi - (epsilon * lambda - delta(lambda)).
struct Perturbed {
    double epsilon = 1.0;
    PerturbationSpec delta = LogDistortion{};
};
using EncodingRule = std::variant<Affine, PolyType, Perturbed>;

/// The rule's value at lambda.
double apply_rule(const EncodingRule& rule, double lambda);
/// Edge value a (pi for perturbed rules).
double rule_edge(const EncodingRule& rule);
/// Edge variable rule_edge - apply_rule, computed without cancellation where possible.
double edge_variable(const EncodingRule& rule, double lambda);
/// Throws ValidationError on invalid parameters.
void validate(const EncodingRule& rule);
bool is_affine(const EncodingRule& rule);
/// Scale epsilon for affine and perturbed rules, b for polynomial-type rules.
double rule_scale(const EncodingRule& rule);

/// A pushforward atom (C, weight).
struct EncodedAtom {
    double c = 0.0;
    double weight = 0.0;
};

struct EncodedMeasure {
    /// Strictly decreasing in C.
    std::vector<EncodedAtom> atoms;
    EncodingRule rule = Affine{};
    double edge = 3.14159265358979323846;
    /// Edge variable of the source truncation; counts are exact only below it.
    double y_max = 0.0;
    /// Set when some encoded atom lies above the edge.
    bool above_edge = false;
    SpectralMeasure source_meta;  // metadata only, atoms cleared
};

/// Checks strict decrease of the rule on the atoms and 1024 log-spaced probes on
/// [lambda_min + 1, lambda_max]; throws MonotonicityViolation.
void check_monotone(const EncodingRule& rule, const SpectralMeasure& measure);

EncodedMeasure encode(const SpectralMeasure& measure, const EncodingRule& rule);

struct InversionOptions {
    /// Bisection bracket is never grown past this lambda.
    double lambda_cap = 1e300;
};

/// Lambda with rule(Lambda) = C.
double invert_rule(const EncodingRule& rule, double c, const InversionOptions& options = {});

/// Relative-error envelope eta(y / epsilon) of a perturbed rule.
double theoretical_envelope(const EncodingRule& rule, double y);

nlohmann::json rule_to_json(const EncodingRule& rule);
EncodingRule rule_from_json(const nlohmann::json& j);

}  // namespace edgeweyl
