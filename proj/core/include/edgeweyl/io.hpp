#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "edgeweyl/counting.hpp"
#include "edgeweyl/encoding.hpp"
#include "edgeweyl/spectra.hpp"

namespace edgeweyl::io {

/// Shortest round-trip decimal form of x.
std::string format_double(double x);

/// CSV with header `lambda,weight`, rows in increasing lambda.
void write_spectrum_csv(const std::filesystem::path& path, const SpectralMeasure& sm);
/// Reads and validates a spectrum CSV. lambda_max defaults to the largest eigenvalue.
SpectralMeasure read_spectrum_csv(const std::filesystem::path& path);

/// {label, dimension, volume, gamma_expected, lambda_max, generator, params, seed}.
nlohmann::json spectrum_meta(const SpectralMeasure& sm, const std::string& generator,
                             const nlohmann::json& params, std::uint64_t seed);
/// Copies label, dimension, volume, gamma_expected and lambda_max from a meta document.
void apply_meta(SpectralMeasure& sm, const nlohmann::json& meta);

/// CSV with header `C,weight`, rows in decreasing C.
void write_encoded_csv(const std::filesystem::path& path, const EncodedMeasure& em);
/// CSV with header `y,N,N_smoothed,rho`.
void write_counting_csv(const std::filesystem::path& path, const CountingCurve& curve);

void write_json(const std::filesystem::path& path, const nlohmann::json& document);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace edgeweyl::io
