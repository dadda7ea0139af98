#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "edgeweyl/counting.hpp"
#include "edgeweyl/encoding.hpp"
#include "edgeweyl/error.hpp"
#include "edgeweyl/estimation.hpp"
#include "edgeweyl/io.hpp"
#include "edgeweyl/krein.hpp"
#include "edgeweyl/spectra.hpp"
#include "edgeweyl/transforms.hpp"

#ifndef EDGEWEYL_VERSION
#define EDGEWEYL_VERSION "0.0.0"
#endif

namespace edgeweyl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

struct SpectrumArgs {
    std::string geometry;
    double lambda_max = 0.0;
    std::string out;
    int d = 0;
    std::string gram;
    double k_param = 1.0;
    int p = 1;
    int q = 1;
    double gamma = 1.0;
    std::uint64_t seed = 0;
    std::string remainder = "none";
    double coeff = 0.0;
    double exponent = 0.0;
    double amplitude = 0.0;
};

struct RuleArgs {
    std::string rule = "affine";
    double epsilon = 1.0;
    double k = 1.0;
    double b = 1.0;
    std::string family;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> c;
    std::optional<double> q;
    std::optional<double> amp;
    std::optional<double> rate;
    std::optional<double> slow_alpha;
};

struct PipelineArgs {
    std::string in;
    RuleArgs rule;
    std::string window;
    std::size_t points = 64;
    double h0 = 4.0;
    std::optional<double> theta;
    std::string out;
};

struct VerifyArgs {
    std::string in;
    double epsilon = 1.0;
    std::uint64_t seed = 0;
    bool krein = false;
    std::size_t n_keep = 6;
    std::string out;
};

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

/// "dir/name.csv" -> "dir/name"; other paths are kept as given.
fs::path strip_csv(const fs::path& path) {
    fs::path base = path;
    if (base.extension() == ".csv") base.replace_extension();
    return base;
}

fs::path with_suffix(const fs::path& base, const std::string& suffix) {
    return fs::path(base.string() + suffix);
}

json option_values(const CLI::App& app) {
    json params = json::object();
    for (const CLI::Option* opt : app.get_options()) {
        if (opt->count() == 0 || opt->get_name() == "--help") continue;
        std::string key = opt->get_name();
        while (!key.empty() && key.front() == '-') key.erase(key.begin());
        const auto& results = opt->results();
        if (results.empty()) {
            params[key] = true;
        } else if (results.size() == 1) {
            params[key] = results.front();
        } else {
            params[key] = results;
        }
    }
    return params;
}

void write_manifest(const fs::path& path, const std::string& command, const CLI::App& sub,
                    const std::vector<std::string>& args, const std::vector<fs::path>& inputs,
                    const std::vector<fs::path>& outputs, std::uint64_t seed) {
    json manifest;
    manifest["command"] = command;
    manifest["params"] = option_values(sub);
    manifest["args"] = args;
    manifest["input_files"] = json::array();
    for (const auto& p : inputs) manifest["input_files"].push_back(p.string());
    manifest["output_files"] = json::array();
    for (const auto& p : outputs) manifest["output_files"].push_back(p.string());
    manifest["output_files"].push_back(path.string());
    manifest["seed"] = seed;
    manifest["tool_version"] = tool_version();
    manifest["timestamp"] = utc_timestamp();
    io::write_json(path, manifest);
}

Eigen::MatrixXd read_gram(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open Gram matrix file '" + path.string() + "'");
    std::vector<double> values;
    std::string token;
    while (in >> token) {
        try {
            values.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw ValidationError("Gram matrix file contains a non-number '" + token + "'");
        }
    }
    const auto side = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(values.size()))));
    if (side == 0 || static_cast<std::size_t>(side * side) != values.size()) {
        throw ValidationError("Gram matrix file must contain a square number of entries");
    }
    Eigen::MatrixXd gram(side, side);
    for (Eigen::Index i = 0; i < side; ++i) {
        for (Eigen::Index j = 0; j < side; ++j) gram(i, j) = values[static_cast<std::size_t>(i * side + j)];
    }
    return gram;
}

std::pair<GeometrySpec, json> geometry_from(const SpectrumArgs& a) {
    const std::string& g = a.geometry;
    if (g == "s3") return {Sphere{3}, json{{"d", 3}}};
    if (g == "sd") {
        if (a.d < 1) throw UsageError("--geometry sd needs --d N with N >= 1");
        return {Sphere{a.d}, json{{"d", a.d}}};
    }
    if (g == "torus2") return {FlatTorus{Eigen::MatrixXd::Identity(2, 2)}, json{{"gram", "identity-2"}}};
    if (g == "torusd") {
        if (a.gram.empty()) throw UsageError("--geometry torusd needs --gram FILE");
        return {FlatTorus{read_gram(a.gram)}, json{{"gram", a.gram}}};
    }
    if (g == "berger") return {BergerSphere{a.k_param}, json{{"k", a.k_param}}};
    if (g == "lens") return {LensSpace{a.p, a.q}, json{{"p", a.p}, {"q", a.q}}};
    if (g == "ball3") return {DirichletBall3{}, json::object()};
    if (g == "synthetic") {
        SyntheticWeyl s;
        s.d = a.d == 0 ? 2 : a.d;
        s.gamma = a.gamma;
        s.seed = a.seed;
        json params{{"d", s.d}, {"gamma", s.gamma}, {"remainder", a.remainder}};
        if (a.remainder == "powerlaw") {
            s.remainder = PowerLawRemainder{a.coeff, a.exponent};
            params["coeff"] = a.coeff;
            params["exponent"] = a.exponent;
        } else if (a.remainder == "jitter") {
            s.remainder = JitterUniform{a.amplitude};
            params["amplitude"] = a.amplitude;
        } else if (a.remainder != "none") {
            throw UsageError("unknown --remainder '" + a.remainder + "' (none|powerlaw|jitter)");
        }
        return {s, params};
    }
    throw UsageError("unknown --geometry '" + g + "'");
}

EncodingRule rule_from(const RuleArgs& a) {
    if (a.rule == "affine") return Affine{kPi, a.epsilon};
    if (a.rule == "poly") return PolyType{kPi, a.b, a.k, ConstSlow{1.0}};
    if (a.rule != "perturbed") throw UsageError("unknown --rule '" + a.rule + "' (affine|poly|perturbed)");

    const std::string& f = a.family;
    PerturbationSpec delta;
    if (f == "logdistortion") {
        delta = LogDistortion{a.alpha.value_or(1.0)};
    } else if (f == "iterlog") {
        delta = IterLog{a.alpha.value_or(1.0), a.beta.value_or(1.0)};
    } else if (f == "slowfactor") {
        delta = SlowFactor{LogPower{a.slow_alpha.value_or(-2.0)}};
    } else if (f == "boundedoffset") {
        delta = BoundedOffset{a.c.value_or(2.0)};
    } else if (f == "sublog") {
        delta = SubLog{a.beta.value_or(0.5)};
    } else if (f == "oscbv") {
        delta = OscBV{LogPower{a.slow_alpha.value_or(-1.0)}, a.amp.value_or(0.5), a.rate.value_or(1.0)};
    } else if (f == "subpower") {
        delta = SubPower{a.q.value_or(0.5)};
    } else {
        throw UsageError("--rule perturbed needs --family "
                         "{logdistortion|iterlog|slowfactor|boundedoffset|sublog|oscbv|subpower}");
    }
    return Perturbed{a.epsilon, delta};
}

FitWindow parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw UsageError("--window must look like LO:HI");
    try {
        return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw UsageError("--window must look like LO:HI, got '" + text + "'");
    }
}

SpectralMeasure load_spectrum(const fs::path& csv, std::vector<fs::path>& inputs) {
    if (!fs::exists(csv)) throw UsageError("input file '" + csv.string() + "' does not exist");
    SpectralMeasure sm = io::read_spectrum_csv(csv);
    inputs.push_back(csv);
    const fs::path meta = with_suffix(strip_csv(csv), ".meta.json");
    if (fs::exists(meta)) {
        io::apply_meta(sm, io::read_json(meta));
        inputs.push_back(meta);
    }
    return sm;
}

json window_json(const FitWindow& w) { return json::array({w.lo, w.hi}); }

// ---------------------------------------------------------------------------

int cmd_spectrum(const SpectrumArgs& a, const CLI::App& sub, const std::vector<std::string>& args,
                 std::ostream& out) {
    const auto [geometry, params] = geometry_from(a);
    const SpectralMeasure sm = generate_spectrum(geometry, a.lambda_max);

    const fs::path csv(a.out);
    const fs::path base = strip_csv(csv);
    const fs::path meta = with_suffix(base, ".meta.json");
    const fs::path manifest = with_suffix(base, ".run.json");
    io::write_spectrum_csv(csv, sm);
    io::write_json(meta, io::spectrum_meta(sm, generator_name(geometry), params, a.seed));
    write_manifest(manifest, "spectrum", sub, args, {}, {csv, meta}, a.seed);
    out << "wrote " << sm.atoms.size() << " atoms to " << csv.string() << '\n';
    return kSuccess;
}

int cmd_pipeline(const PipelineArgs& a, const CLI::App& sub, const std::vector<std::string>& args,
                 std::ostream& out, std::ostream& err) {
    std::vector<fs::path> inputs;
    const SpectralMeasure sm = load_spectrum(a.in, inputs);
    const EncodingRule rule = rule_from(a.rule);
    const EncodedMeasure em = encode(sm, rule);

    MollifierSpec mollifier;
    mollifier.h0 = a.h0;
    mollifier.theta = a.theta.value_or(a.rule.rule == "poly" ? 0.8 : 0.5);
    const FitWindow requested = a.window.empty() ? default_window(em.y_max) : parse_window(a.window);
    FitWindow window = requested;
    const double reach = max_smoothable_y(em.y_max, mollifier);
    if (window.hi > reach) {
        window.hi = reach;
        err << "note: window clipped to " << io::format_double(window.hi)
            << " so the smoothing kernel stays below the truncation\n";
    }
    if (!(window.hi > window.lo)) throw ValidationError("fit window lies beyond the smoothable range");
    const CountingCurve curve = smoothed_curve(em, log_grid(window.lo, window.hi, a.points), mollifier);
    const WeylEstimate est = estimate_weyl(curve, rule_scale(rule), window);

    json estimate;
    estimate["alpha_hat"] = est.slope.alpha_hat;
    estimate["d_hat"] = est.d_hat;
    estimate["d_nearest"] = est.d_nearest;
    estimate["d_deviation"] = est.d_deviation;
    estimate["gamma_hat"] = est.gamma_hat;
    estimate["window"] = window_json(window);
    estimate["window_requested"] = window_json(requested);
    estimate["r_squared"] = est.slope.r_squared;
    estimate["n_points"] = est.slope.n_points;
    estimate["epsilon"] = rule_scale(rule);
    estimate["rule"] = rule_to_json(rule);
    estimate["mollifier"] = {{"h0", mollifier.h0}, {"theta", mollifier.theta}};
    if (std::holds_alternative<PolyType>(rule)) {
        if (!sm.dimension) throw ValidationError("k_hat needs the spectrum's dimension (meta file)");
        estimate["k_hat"] = estimate_k(curve, *sm.dimension, window);
    }
    if (const auto* perturbed = std::get_if<Perturbed>(&rule)) {
        const StabilityReport report = stability_report(sm, *perturbed, window, mollifier, a.points);
        estimate["envelope_K"] = report.envelope_k;
    }

    const fs::path base = a.out.empty() ? strip_csv(a.in) : fs::path(a.out);
    const fs::path counting = with_suffix(base, ".counting.csv");
    const fs::path estimate_path = with_suffix(base, ".estimate.json");
    io::write_counting_csv(counting, curve);
    io::write_json(estimate_path, estimate);
    write_manifest(with_suffix(base, ".run.json"), "pipeline", sub, args, inputs, {counting, estimate_path}, 0);
    out << "d_hat=" << io::format_double(est.d_hat) << " gamma_hat=" << io::format_double(est.gamma_hat) << '\n';
    return kSuccess;
}

int cmd_verify(const VerifyArgs& a, const CLI::App& sub, const std::vector<std::string>& args,
               std::ostream& out) {
    std::vector<fs::path> inputs;
    const SpectralMeasure sm = load_spectrum(a.in, inputs);
    const EncodedMeasure em = encode(sm, Affine{kPi, a.epsilon});
    std::mt19937_64 rng(a.seed);

    json checks = json::array();
    bool all_passed = true;
    auto record = [&](const std::string& name, double residual, double tolerance) {
        const bool passed = residual <= tolerance;
        all_passed = all_passed && passed;
        checks.push_back({{"name", name}, {"passed", passed}, {"residual", residual}, {"tolerance", tolerance}});
    };

    {
        std::uniform_real_distribution<double> pick(kPi - em.y_max, kPi);
        std::vector<double> grid(1000);
        for (double& c : grid) c = pick(rng);
        record("composition", check_composition(sm, em, grid).max_discrepancy, 0.0);
    }
    {
        const EncodedMeasure doubled = encode(sm, Affine{kPi, 2.0 * a.epsilon});
        std::uniform_real_distribution<double> pick(0.0, sm.lambda_max);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double lambda = pick(rng);
            const double c1 = kPi - a.epsilon * lambda;
            const double c2 = kPi - 2.0 * a.epsilon * lambda;
            worst = std::max(worst, std::abs(count_edge(em, c1) - count_edge(doubled, c2)));
        }
        record("epsilon_collapse", worst, 0.0);
    }
    {
        double worst = 0.0;
        for (double s : log_grid(1e-3 / a.epsilon, 1.0 / a.epsilon, 50)) {
            const double theta = heat_trace(sm, a.epsilon * s).theta;
            worst = std::max(worst, std::abs(edge_heat(em, s).theta - theta) / theta);
        }
        record("heat_transfer", worst, 1e-12);
    }
    {
        const double u_lo = sm.dimension ? 0.5 * *sm.dimension + 0.1 : 2.0;
        double worst = 0.0;
        for (double u : log_grid(u_lo, u_lo + 3.0, 50)) {
            const double z = zeta(sm, u).value;
            worst = std::max(worst, std::abs(edge_zeta(em, u) - std::pow(a.epsilon, -u) * z) / std::abs(z));
        }
        record("zeta_transfer", worst, 1e-12);
    }
    if (a.krein) {
        const Realization r = realize_encoded(em, a.n_keep);
        record("krein_match", r.report.match_residual, 1e-8);
        record("krein_roundtrip", r.report.roundtrip_residual, 1e-9);
    }

    const json report{{"input", a.in}, {"epsilon", a.epsilon}, {"passed", all_passed}, {"checks", checks}};
    const fs::path report_path = a.out.empty() ? with_suffix(strip_csv(a.in), ".verify.json") : fs::path(a.out);
    io::write_json(report_path, report);
    write_manifest(fs::path(report_path).replace_extension(".run.json"), "verify", sub, args, inputs,
                   {report_path}, a.seed);
    for (const auto& c : checks) {
        out << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>()
            << " residual=" << io::format_double(c["residual"].get<double>()) << '\n';
    }
    return all_passed ? kSuccess : kValidation;
}

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::usage: return kUsage;
        case ErrorKind::validation: return kValidation;
        case ErrorKind::numerical: return kNumerical;
    }
    return kNumerical;
}

void add_rule_options(CLI::App* sub, RuleArgs& r) {
    sub->add_option("--epsilon", r.epsilon, "Encoding scale epsilon")->capture_default_str();
    sub->add_option("--rule", r.rule, "Encoding rule: affine|poly|perturbed")->capture_default_str();
    sub->add_option("--k", r.k, "Polynomial-type exponent k");
    sub->add_option("--b", r.b, "Polynomial-type scale b");
    sub->add_option("--family", r.family, "Perturbation family");
    sub->add_option("--alpha", r.alpha, "Family parameter alpha");
    sub->add_option("--beta", r.beta, "Family parameter beta");
    sub->add_option("--c", r.c, "BoundedOffset constant");
    sub->add_option("--q", r.q, "SubPower exponent");
    sub->add_option("--amp", r.amp, "OscBV oscillation amplitude");
    sub->add_option("--rate", r.rate, "OscBV oscillation decay rate");
    sub->add_option("--slow-alpha", r.slow_alpha, "Log-power exponent of the slow factor");
}

}  // namespace

std::string tool_version() { return EDGEWEYL_VERSION; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Laplace spectra, edge encodings and Weyl-law diagnostics", "edgeweyl"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(0, 1);

    std::string replay;
    app.add_option("--replay", replay, "Re-run the command recorded in a run manifest");

    SpectrumArgs sa;
    CLI::App* spectrum = app.add_subcommand("spectrum", "Generate a truncated spectrum");
    spectrum->add_option("--geometry", sa.geometry, "s3|sd|torus2|torusd|berger|lens|ball3|synthetic")->required();
    spectrum->add_option("--lambda-max", sa.lambda_max, "Eigenvalue truncation")->required();
    spectrum->add_option("--out", sa.out, "Output CSV path")->required();
    spectrum->add_option("--d", sa.d, "Dimension for sd and synthetic");
    spectrum->add_option("--gram", sa.gram, "Whitespace-separated dual Gram matrix for torusd");
    spectrum->add_option("--k", sa.k_param, "Berger parameter");
    spectrum->add_option("--p", sa.p, "Lens order p");
    spectrum->add_option("--q", sa.q, "Lens twist q");
    spectrum->add_option("--gamma", sa.gamma, "Synthetic Weyl constant");
    spectrum->add_option("--seed", sa.seed, "Seed for synthetic jitter");
    spectrum->add_option("--remainder", sa.remainder, "Synthetic remainder: none|powerlaw|jitter");
    spectrum->add_option("--coeff", sa.coeff, "Power-law remainder coefficient");
    spectrum->add_option("--exponent", sa.exponent, "Power-law remainder exponent");
    spectrum->add_option("--amplitude", sa.amplitude, "Jitter amplitude");

    PipelineArgs pa;
    CLI::App* pipeline = app.add_subcommand("pipeline", "Encode, smooth and estimate Weyl data");
    pipeline->add_option("--in", pa.in, "Spectrum CSV")->required();
    add_rule_options(pipeline, pa.rule);
    pipeline->add_option("--window", pa.window, "Fit window LO:HI in the edge variable");
    pipeline->add_option("--points", pa.points, "Number of log-spaced samples")->capture_default_str();
    pipeline->add_option("--h0", pa.h0, "Mollifier width prefactor")->capture_default_str();
    pipeline->add_option("--theta", pa.theta, "Mollifier width exponent");
    pipeline->add_option("--out", pa.out, "Output prefix");

    VerifyArgs va;
    CLI::App* verify = app.add_subcommand("verify", "Check the exact transfer identities");
    verify->add_option("--in", va.in, "Spectrum CSV")->required();
    verify->add_option("--epsilon", va.epsilon, "Encoding scale epsilon")->capture_default_str();
    verify->add_option("--seed", va.seed, "Seed for random test grids");
    verify->add_flag("--krein", va.krein, "Also realize the lowest atoms as a string");
    verify->add_option("--n-keep", va.n_keep, "Atoms kept for the realization")->capture_default_str();
    verify->add_option("--out", va.out, "Report JSON path");

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsage;
    }

    try {
        if (!replay.empty()) {
            if (app.get_subcommands().size() > 0) throw UsageError("--replay cannot be combined with a subcommand");
            const json manifest = io::read_json(replay);
            const auto recorded = manifest.at("args").get<std::vector<std::string>>();
            return run(recorded, out, err);
        }
        if (spectrum->parsed()) return cmd_spectrum(sa, *spectrum, args, out);
        if (pipeline->parsed()) return cmd_pipeline(pa, *pipeline, args, out, err);
        if (verify->parsed()) return cmd_verify(va, *verify, args, out);
        err << app.help();
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        if (e.kind() == ErrorKind::usage) err << "run with --help for usage\n";
        return exit_code_for(e);
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed JSON: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    }
}

}  // namespace edgeweyl::cli
