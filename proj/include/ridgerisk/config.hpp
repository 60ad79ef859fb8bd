#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ridgerisk/risk.hpp"
#include "ridgerisk/spectrum.hpp"

namespace ridgerisk {

enum class SpectrumPattern { TwoLevel, ThreeLevel };

inline constexpr std::uint64_t kDefaultSeed = 20240607;
inline constexpr const char* kSeedEnvVar = "RIDGE_RISK_SEED";

struct ExperimentConfig {
  int d = 5;
  int n = 1500;
  int p = 1500;
  SpectrumPattern pattern = SpectrumPattern::TwoLevel;
  std::optional<double> rho;  // unset: the command derives it from a threshold
  int mid_multiplier = 10;
  double tail_factor = 0.02;
  double noise_var = 1.0;
  std::uint64_t seed = kDefaultSeed;

  std::optional<double> tau_min;  // unset: lambda_{d+1} / 10
  std::optional<double> tau_max;  // unset: 10 lambda_d
  int tau_count = kDefaultTauCount;
  TauScale tau_scale = TauScale::Log;

  int replicates = 10;
  std::vector<double> multipliers{0.1, 1.0, 10.0};
  int threads = 1;

  std::string out;
  std::string plot;
  std::string debug_dir;  // per-replicate CSVs when nonempty

  /// Throws DomainError on inconsistent fields.
  void validate() const;
};

/// Spectrum of the configured pattern with lambda_{d+1} = rho.
[[nodiscard]] Spectrum build_spectrum(const ExperimentConfig& config, double rho);

/// Reads a key=value INI file. Keys before any section apply first, then the
/// keys of `section` (if present). Unknown keys are rejected.
void apply_config_file(ExperimentConfig& config, const std::string& path,
                       const std::string& section);

/// RIDGE_RISK_SEED, when set, replaces the seed.
void apply_environment(ExperimentConfig& config);

/// Applies one named setting; shared by the INI reader and tests.
void apply_setting(ExperimentConfig& config, std::string_view key, const std::string& value);

[[nodiscard]] TauScale parse_tau_scale(std::string_view text);
[[nodiscard]] SpectrumPattern parse_pattern(std::string_view text);
[[nodiscard]] std::vector<double> parse_multipliers(std::string_view text);
[[nodiscard]] std::uint64_t parse_seed(std::string_view text);
[[nodiscard]] std::string_view to_string(SpectrumPattern pattern) noexcept;
[[nodiscard]] std::string_view to_string(TauScale scale) noexcept;

}  // namespace ridgerisk
