#include "edgeweyl/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>

#include "edgeweyl/error.hpp"

namespace edgeweyl::io {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path.string() + "'");
    return in;
}

double parse_double(std::string_view text, const std::filesystem::path& path, std::size_t line) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
        throw ValidationError(path.string() + ":" + std::to_string(line) + ": cannot parse '" +
                              std::string(text) + "' as a number");
    }
    return value;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

std::string format_double(double x) {
    std::array<char, 64> buffer{};
    const auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), x);
    if (ec != std::errc()) throw NumericalError("cannot format a number");
    return std::string(buffer.data(), end);
}

void write_spectrum_csv(const std::filesystem::path& path, const SpectralMeasure& sm) {
    auto out = open_output(path);
    out << "lambda,weight\n";
    for (const Atom& a : sm.atoms) out << format_double(a.lambda) << ',' << format_double(a.weight) << '\n';
    if (!out) throw UsageError("failed writing '" + path.string() + "'");
}

SpectralMeasure read_spectrum_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != "lambda,weight") {
        throw ValidationError(path.string() + ": expected header 'lambda,weight'");
    }
    SpectralMeasure sm;
    sm.label = path.stem().string();
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ValidationError(path.string() + ":" + std::to_string(number) + ": expected two columns");
        }
        const std::string_view view(line);
        const double lambda = parse_double(view.substr(0, comma), path, number);
        const double weight = parse_double(view.substr(comma + 1), path, number);
        sm.atoms.push_back({lambda, weight});
    }
    sm.lambda_max = sm.atoms.empty() ? 0.0 : sm.atoms.back().lambda;
    sm.validate();
    return sm;
}

nlohmann::json spectrum_meta(const SpectralMeasure& sm, const std::string& generator,
                             const nlohmann::json& params, std::uint64_t seed) {
    nlohmann::json j;
    j["label"] = sm.label;
    j["dimension"] = sm.dimension ? nlohmann::json(*sm.dimension) : nlohmann::json(nullptr);
    j["volume"] = sm.volume ? nlohmann::json(*sm.volume) : nlohmann::json(nullptr);
    j["gamma_expected"] = sm.gamma_expected ? nlohmann::json(*sm.gamma_expected) : nlohmann::json(nullptr);
    j["lambda_max"] = sm.lambda_max;
    j["generator"] = generator;
    j["params"] = params;
    j["seed"] = seed;
    return j;
}

void apply_meta(SpectralMeasure& sm, const nlohmann::json& meta) {
    auto optional_number = [&meta](const char* key) -> std::optional<double> {
        if (!meta.contains(key) || meta.at(key).is_null()) return std::nullopt;
        return meta.at(key).get<double>();
    };
    if (meta.contains("label") && meta.at("label").is_string()) sm.label = meta.at("label").get<std::string>();
    if (meta.contains("dimension") && !meta.at("dimension").is_null()) {
        sm.dimension = meta.at("dimension").get<int>();
    }
    sm.volume = optional_number("volume");
    sm.gamma_expected = optional_number("gamma_expected");
    if (const auto lmax = optional_number("lambda_max")) sm.lambda_max = *lmax;
    sm.validate();
}

void write_encoded_csv(const std::filesystem::path& path, const EncodedMeasure& em) {
    auto out = open_output(path);
    out << "C,weight\n";
    for (const EncodedAtom& a : em.atoms) out << format_double(a.c) << ',' << format_double(a.weight) << '\n';
    if (!out) throw UsageError("failed writing '" + path.string() + "'");
}

void write_counting_csv(const std::filesystem::path& path, const CountingCurve& curve) {
    auto out = open_output(path);
    out << "y,N,N_smoothed,rho\n";
    for (const CountingSample& s : curve.samples) {
        out << format_double(s.y) << ',' << format_double(s.n) << ',' << format_double(s.n_smoothed) << ','
            << format_double(s.rho) << '\n';
    }
    if (!out) throw UsageError("failed writing '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const nlohmann::json& document) {
    auto out = open_output(path);
    out << document.dump(2) << '\n';
    if (!out) throw UsageError("failed writing '" + path.string() + "'");
}

nlohmann::json read_json(const std::filesystem::path& path) {
    auto in = open_input(path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

}  // namespace edgeweyl::io
