#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ridgerisk/config.hpp"
#include "ridgerisk/detequiv.hpp"

namespace ridgerisk {

enum class Corollary { C1, C2, C3a, C3b, C4 };
enum class Fig2Setting { S_i, S_ii, S_iii };

[[nodiscard]] Corollary parse_corollary(std::string_view text);
[[nodiscard]] Fig2Setting parse_fig2_setting(std::string_view text);
[[nodiscard]] std::string_view to_string(Corollary c) noexcept;
[[nodiscard]] std::string_view to_string(Fig2Setting s) noexcept;

/// Threshold-study preset: d, n, p and pattern of the corollary's study.
[[nodiscard]] ExperimentConfig fig1_preset(Corollary c);
[[nodiscard]] ExperimentConfig fig2_preset(Fig2Setting s);

/// lambda_{d+1} / lambda_d threshold the multipliers scale.
[[nodiscard]] double fig1_threshold(Corollary c, const ExperimentConfig& config);
/// The setting's lambda_{d+1} (with lambda_d = 1).
[[nodiscard]] double fig2_rho(Fig2Setting s, const ExperimentConfig& config);

/// MSE the corollary's study is about: out-sample for C1 and C3, in-sample otherwise.
[[nodiscard]] bool fig1_uses_out_sample(Corollary c) noexcept;

struct FigureRow {
  std::string setting;
  double multiplier = 1.0;
  double tau = 0.0;
  double mse_out = 0.0;
  double mse_out_se = 0.0;
  double mse_in = 0.0;
  double mse_in_se = 0.0;
  double norm_out = 0.0;  // mse_out n / d
  double norm_in = 0.0;
  bool is_argmin_out = false;
  bool is_argmin_in = false;
};

struct FigureTable {
  std::vector<std::string> metadata;  // written as '# ' lines before the header
  std::vector<FigureRow> rows;
};

struct GroupSummary {
  std::string setting;
  double multiplier = 1.0;
  FigureRow best_out;
  FigureRow best_in;
};

/// One summary per (setting, multiplier) group, in table order.
[[nodiscard]] std::vector<GroupSummary> summarize(const FigureTable& table);

/// Runs fn(i) for i in [0, count) on `threads` workers. Each index runs
/// exactly once; the exception of the lowest failing index is rethrown.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

/// Averages over replicates of one scenario on the given tau grid. Rows
/// carry `setting` and `multiplier`; argmin flags are set per call.
[[nodiscard]] std::vector<FigureRow> averaged_sweep(const Scenario& scenario,
                                                    const std::vector<double>& grid,
                                                    const ExperimentConfig& config,
                                                    const std::string& setting, double multiplier);

/// Grid from the configured bounds (default lambda_{d+1}/10 .. 10 lambda_d).
[[nodiscard]] std::vector<double> configured_grid(const Spectrum& spectrum,
                                                  const ExperimentConfig& config);

[[nodiscard]] FigureTable run_sweep(const ExperimentConfig& config);
[[nodiscard]] FigureTable run_fig1(const ExperimentConfig& config, Corollary c);
[[nodiscard]] FigureTable run_fig2(const ExperimentConfig& config, Fig2Setting s);

struct ApproxRow {
  double tau = 0.0;
  double alpha = 0.0;
  RiskReport exact;  // replicate average
  ApproxReport approx;
  double rel_err_out = 0.0;  // |exact - approx| / approx on MSE_out
  double rel_err_in = 0.0;
};

struct ApproxTable {
  std::vector<std::string> metadata;
  std::vector<ApproxRow> rows;
};

/// Exact risks (averaged over replicates) next to the deterministic
/// equivalents. tau = 0 and degenerate points are skipped.
[[nodiscard]] ApproxTable run_approx(const ExperimentConfig& config);

}  // namespace ridgerisk
