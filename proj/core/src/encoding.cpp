#include "edgeweyl/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "edgeweyl/error.hpp"

namespace edgeweyl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kProbeCount = 1024;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string describe(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

bool decays_to_zero(const SlowVariation& slow) {
    return std::visit(Overloaded{
                          [](const ConstSlow&) { return false; },
                          [](const LogPower& p) { return p.alpha < 0.0; },
                          [](const LogLogPower& p) {
                              return p.alpha < 0.0 || (p.alpha == 0.0 && p.beta < 0.0);
                          },
                      },
                      slow);
}

void validate_slow(const SlowVariation& slow) {
    if (const auto* c = std::get_if<ConstSlow>(&slow)) {
        if (!(c->ell_inf > 0.0)) throw ValidationError("constant slow factor must be positive");
    }
}

}  // namespace

double shifted_log(double x) { return 1.0 + std::log(std::max(x, 1.0)); }

double shifted_loglog(double x) { return std::log(std::numbers::e + std::log(std::max(x, 1.0))); }

double evaluate(const SlowVariation& slow, double x) {
    return std::visit(Overloaded{
                          [](const ConstSlow& c) { return c.ell_inf; },
                          [x](const LogPower& p) { return std::pow(shifted_log(x), p.alpha); },
                          [x](const LogLogPower& p) {
                              return std::pow(shifted_log(x), p.alpha) *
                                     std::pow(shifted_loglog(x), p.beta);
                          },
                      },
                      slow);
}

double evaluate(const PerturbationSpec& delta, double lambda) {
    return std::visit(
        Overloaded{
            [lambda](const LogDistortion& p) { return lambda / std::pow(shifted_log(lambda), p.alpha); },
            [lambda](const IterLog& p) {
                return lambda / (std::pow(shifted_log(lambda), p.alpha) *
                                 std::pow(shifted_loglog(lambda), p.beta));
            },
            [lambda](const SlowFactor& p) { return lambda * evaluate(p.slow, lambda); },
            [](const BoundedOffset& p) { return p.c; },
            [lambda](const SubLog& p) { return std::pow(shifted_log(lambda), p.beta); },
            [lambda](const OscBV& p) {
                const double theta = p.theta_amp / std::pow(1.0 + shifted_log(lambda), p.theta_rate);
                return lambda * evaluate(p.slow, lambda) * (1.0 + theta);
            },
            [lambda](const SubPower& p) { return std::pow(lambda, p.q); },
        },
        delta);
}

std::string family_name(const PerturbationSpec& delta) {
    return std::visit(Overloaded{
                          [](const LogDistortion&) { return std::string("logdistortion"); },
                          [](const IterLog&) { return std::string("iterlog"); },
                          [](const SlowFactor&) { return std::string("slowfactor"); },
                          [](const BoundedOffset&) { return std::string("boundedoffset"); },
                          [](const SubLog&) { return std::string("sublog"); },
                          [](const OscBV&) { return std::string("oscbv"); },
                          [](const SubPower&) { return std::string("subpower"); },
                      },
                      delta);
}

void validate(const PerturbationSpec& delta) {
    std::visit(Overloaded{
                   [](const LogDistortion& p) {
                       if (!(p.alpha > 0.0)) throw ValidationError("LogDistortion needs alpha > 0");
                   },
                   [](const IterLog& p) {
                       if (!(p.alpha > 0.0)) throw ValidationError("IterLog needs alpha > 0");
                       if (!std::isfinite(p.beta)) throw ValidationError("IterLog beta must be finite");
                   },
                   [](const SlowFactor& p) {
                       validate_slow(p.slow);
                       if (!decays_to_zero(p.slow)) {
                           throw ValidationError("SlowFactor needs a slow factor decaying to zero");
                       }
                   },
                   [](const BoundedOffset& p) {
                       if (!std::isfinite(p.c)) throw ValidationError("BoundedOffset c must be finite");
                   },
                   [](const SubLog& p) {
                       if (!(p.beta > 0.0 && p.beta < 1.0)) {
                           throw ValidationError("SubLog needs 0 < beta < 1");
                       }
                   },
                   [](const OscBV& p) {
                       validate_slow(p.slow);
                       if (!decays_to_zero(p.slow)) {
                           throw ValidationError("OscBV needs a slow factor decaying to zero");
                       }
                       if (!(p.theta_rate > 0.0)) throw ValidationError("OscBV needs theta_rate > 0");
                       if (!(std::abs(p.theta_amp) < 1.0)) {
                           throw ValidationError("OscBV needs |theta_amp| < 1");
                       }
                   },
                   [](const SubPower& p) {
                       if (!(p.q > 0.0 && p.q < 1.0)) throw ValidationError("SubPower needs 0 < q < 1");
                   },
               },
               delta);
}

// ---------------------------------------------------------------------------

double edge_variable(const EncodingRule& rule, double lambda) {
    return std::visit(Overloaded{
                          [lambda](const Affine& r) { return r.epsilon * lambda; },
                          [lambda](const PolyType& r) {
                              return r.b * std::pow(lambda, r.k) * evaluate(r.slow, lambda);
                          },
                          [lambda](const Perturbed& r) {
                              return r.epsilon * lambda - evaluate(r.delta, lambda);
                          },
                      },
                      rule);
}

double rule_edge(const EncodingRule& rule) {
    return std::visit(Overloaded{
                          [](const Affine& r) { return r.a; },
                          [](const PolyType& r) { return r.a; },
                          [](const Perturbed&) { return kPi; },
                      },
                      rule);
}

double apply_rule(const EncodingRule& rule, double lambda) {
    return rule_edge(rule) - edge_variable(rule, lambda);
}

bool is_affine(const EncodingRule& rule) { return std::holds_alternative<Affine>(rule); }

double rule_scale(const EncodingRule& rule) {
    return std::visit(Overloaded{
                          [](const Affine& r) { return r.epsilon; },
                          [](const PolyType& r) { return r.b; },
                          [](const Perturbed& r) { return r.epsilon; },
                      },
                      rule);
}

void validate(const EncodingRule& rule) {
    std::visit(Overloaded{
                   [](const Affine& r) {
                       if (!(r.epsilon > 0.0) || !std::isfinite(r.epsilon)) {
                           throw ValidationError("epsilon must be a positive finite number");
                       }
                       if (!std::isfinite(r.a)) throw ValidationError("edge value must be finite");
                   },
                   [](const PolyType& r) {
                       if (!(r.b > 0.0)) throw ValidationError("polynomial-type b must be positive");
                       if (!(r.k > 0.0)) throw ValidationError("polynomial-type k must be positive");
                       if (!std::isfinite(r.a)) throw ValidationError("edge value must be finite");
                       validate_slow(r.slow);
                   },
                   [](const Perturbed& r) {
                       if (!(r.epsilon > 0.0) || !std::isfinite(r.epsilon)) {
                           throw ValidationError("epsilon must be a positive finite number");
                       }
                       validate(r.delta);
                   },
               },
               rule);
}

// ---------------------------------------------------------------------------

namespace {

/// Throws unless the edge variable strictly increases along the (increasing) lambda sequence.
void require_increasing(const EncodingRule& rule, const std::vector<double>& lambdas) {
    double previous = 0.0;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const double y = edge_variable(rule, lambdas[i]);
        if (!std::isfinite(y)) {
            throw MonotonicityViolation(lambdas[i], "encoding is not finite at lambda=" + describe(lambdas[i]));
        }
        if (i > 0 && !(y > previous)) {
            throw MonotonicityViolation(
                lambdas[i], "encoding fails to be strictly decreasing at lambda=" + describe(lambdas[i]));
        }
        previous = y;
    }
}

}  // namespace

void check_monotone(const EncodingRule& rule, const SpectralMeasure& measure) {
    if (is_affine(rule)) return;  // globally strictly decreasing

    // The atoms must keep their order. The probes certify that the rule is decreasing from
    // lambda_min + 1 on; the perturbation families are only ultimately monotone, so the two
    // sequences are checked separately rather than merged.
    std::vector<double> atoms;
    atoms.reserve(measure.atoms.size());
    for (const Atom& a : measure.atoms) atoms.push_back(a.lambda);
    require_increasing(rule, atoms);

    const double lo = (measure.atoms.empty() ? 0.0 : measure.atoms.front().lambda) + 1.0;
    const double hi = measure.lambda_max;
    if (hi > lo) {
        std::vector<double> probes(kProbeCount);
        const double step = std::log(hi / lo) / (kProbeCount - 1);
        for (int i = 0; i < kProbeCount; ++i) probes[i] = lo * std::exp(step * i);
        probes.back() = hi;
        require_increasing(rule, probes);
    }
}

EncodedMeasure encode(const SpectralMeasure& measure, const EncodingRule& rule) {
    validate(rule);
    measure.validate();
    check_monotone(rule, measure);

    EncodedMeasure em;
    em.rule = rule;
    em.edge = rule_edge(rule);
    em.y_max = edge_variable(rule, measure.lambda_max);
    em.source_meta = measure;
    em.source_meta.atoms.clear();
    em.atoms.reserve(measure.atoms.size());
    for (const Atom& atom : measure.atoms) {
        const double c = apply_rule(rule, atom.lambda);
        if (!em.atoms.empty() && !(c < em.atoms.back().c)) {
            throw MonotonicityViolation(atom.lambda, "encoded values collide at lambda=" + describe(atom.lambda));
        }
        if (c > em.edge) em.above_edge = true;
        em.atoms.push_back({c, atom.weight});
    }
    return em;
}

// ---------------------------------------------------------------------------

double invert_rule(const EncodingRule& rule, double c, const InversionOptions& options) {
    validate(rule);
    const double target = rule_edge(rule) - c;

    if (const auto* affine = std::get_if<Affine>(&rule)) {
        return (affine->a - c) / affine->epsilon;
    }
    if (const auto* perturbed = std::get_if<Perturbed>(&rule)) {
        if (const auto* offset = std::get_if<BoundedOffset>(&perturbed->delta)) {
            return (kPi - c + offset->c) / perturbed->epsilon;
        }
    }

    const double y0 = edge_variable(rule, 0.0);
    if (target < y0) {
        throw DomainError("C=" + describe(c) + " lies above the rule's value at lambda=0");
    }
    if (target == y0) return 0.0;

    double lo = 0.0;
    double hi = std::max(1.0, target / rule_scale(rule));
    while (edge_variable(rule, hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > options.lambda_cap || !std::isfinite(hi)) {
            throw BracketFailure("no sign change for C=" + describe(c) + " below lambda cap " +
                                 describe(options.lambda_cap));
        }
    }
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (edge_variable(rule, mid) < target ? lo : hi) = mid;
    }
    const double lambda =
        std::abs(edge_variable(rule, lo) - target) <= std::abs(edge_variable(rule, hi) - target) ? lo : hi;
    const double residual = std::abs(apply_rule(rule, lambda) - c);
    if (residual > 1e-10 * std::max(1.0, std::abs(c))) {
        throw NumericalError("inversion residual " + describe(residual) + " too large at C=" + describe(c));
    }
    return lambda;
}

double theoretical_envelope(const EncodingRule& rule, double y) {
    const auto* perturbed = std::get_if<Perturbed>(&rule);
    if (!perturbed) throw ValidationError("envelope is defined only for perturbed rules");
    if (!(y > 0.0)) throw DomainError("envelope needs y > 0");
    const double x = y / perturbed->epsilon;
    return std::visit(
        Overloaded{
            [x](const LogDistortion& p) { return std::pow(shifted_log(x), -p.alpha); },
            [x](const IterLog& p) {
                return std::pow(shifted_log(x), -p.alpha) * std::pow(shifted_loglog(x), -p.beta);
            },
            [x](const SlowFactor& p) { return evaluate(p.slow, x); },
            [y](const BoundedOffset&) { return 1.0 / y; },
            [x](const SubLog& p) { return p.beta * std::pow(shifted_log(x), p.beta - 1.0); },
            [x](const OscBV& p) {
                const double theta = p.theta_amp / std::pow(1.0 + shifted_log(x), p.theta_rate);
                return evaluate(p.slow, x) * (1.0 + theta);
            },
            [x](const SubPower& p) { return std::pow(x, p.q - 1.0); },
        },
        perturbed->delta);
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json slow_to_json(const SlowVariation& slow) {
    return std::visit(Overloaded{
                          [](const ConstSlow& c) {
                              return nlohmann::json{{"type", "const"}, {"ell_inf", c.ell_inf}};
                          },
                          [](const LogPower& p) {
                              return nlohmann::json{{"type", "logpower"}, {"alpha", p.alpha}};
                          },
                          [](const LogLogPower& p) {
                              return nlohmann::json{
                                  {"type", "loglogpower"}, {"alpha", p.alpha}, {"beta", p.beta}};
                          },
                      },
                      slow);
}

SlowVariation slow_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "const") return ConstSlow{j.at("ell_inf").get<double>()};
    if (type == "logpower") return LogPower{j.at("alpha").get<double>()};
    if (type == "loglogpower") return LogLogPower{j.at("alpha").get<double>(), j.at("beta").get<double>()};
    throw ValidationError("unknown slow-variation type '" + type + "'");
}

nlohmann::json delta_to_json(const PerturbationSpec& delta) {
    nlohmann::json j = std::visit(
        Overloaded{
            [](const LogDistortion& p) { return nlohmann::json{{"alpha", p.alpha}}; },
            [](const IterLog& p) { return nlohmann::json{{"alpha", p.alpha}, {"beta", p.beta}}; },
            [](const SlowFactor& p) { return nlohmann::json{{"slow", slow_to_json(p.slow)}}; },
            [](const BoundedOffset& p) { return nlohmann::json{{"c", p.c}}; },
            [](const SubLog& p) { return nlohmann::json{{"beta", p.beta}}; },
            [](const OscBV& p) {
                return nlohmann::json{{"slow", slow_to_json(p.slow)},
                                      {"theta_amp", p.theta_amp},
                                      {"theta_rate", p.theta_rate}};
            },
            [](const SubPower& p) { return nlohmann::json{{"q", p.q}}; },
        },
        delta);
    j["family"] = family_name(delta);
    return j;
}

PerturbationSpec delta_from_json(const nlohmann::json& j) {
    const std::string family = j.at("family").get<std::string>();
    if (family == "logdistortion") return LogDistortion{j.at("alpha").get<double>()};
    if (family == "iterlog") return IterLog{j.at("alpha").get<double>(), j.at("beta").get<double>()};
    if (family == "slowfactor") return SlowFactor{slow_from_json(j.at("slow"))};
    if (family == "boundedoffset") return BoundedOffset{j.at("c").get<double>()};
    if (family == "sublog") return SubLog{j.at("beta").get<double>()};
    if (family == "oscbv") {
        return OscBV{slow_from_json(j.at("slow")), j.at("theta_amp").get<double>(),
                     j.at("theta_rate").get<double>()};
    }
    if (family == "subpower") return SubPower{j.at("q").get<double>()};
    throw ValidationError("unknown perturbation family '" + family + "'");
}

}  // namespace

nlohmann::json rule_to_json(const EncodingRule& rule) {
    return std::visit(
        Overloaded{
            [](const Affine& r) {
                return nlohmann::json{{"type", "affine"},
                                      {"params", {{"a", r.a}, {"epsilon", r.epsilon}}}};
            },
            [](const PolyType& r) {
                return nlohmann::json{
                    {"type", "poly"},
                    {"params", {{"a", r.a}, {"b", r.b}, {"k", r.k}, {"slow", slow_to_json(r.slow)}}}};
            },
            [](const Perturbed& r) {
                nlohmann::json params = delta_to_json(r.delta);
                params["epsilon"] = r.epsilon;
                return nlohmann::json{{"type", "perturbed"}, {"params", params}};
            },
        },
        rule);
}

EncodingRule rule_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    const nlohmann::json& p = j.at("params");
    if (type == "affine") return Affine{p.at("a").get<double>(), p.at("epsilon").get<double>()};
    if (type == "poly") {
        return PolyType{p.at("a").get<double>(), p.at("b").get<double>(), p.at("k").get<double>(),
                        slow_from_json(p.at("slow"))};
    }
    if (type == "perturbed") return Perturbed{p.at("epsilon").get<double>(), delta_from_json(p)};
    throw ValidationError("unknown rule type '" + type + "'");
}

}  // namespace edgeweyl
