#include "ridgerisk/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include "ridgerisk/error.hpp"
#include "ridgerisk/report_io.hpp"

namespace ridgerisk {
namespace {

std::string kv(const std::string& key, double value) { return key + "=" + format_double(value); }

std::vector<std::string> scenario_metadata(const std::string& command, const ExperimentConfig& c) {
  return {
      "command=" + command,
      "n=" + std::to_string(c.n) + " p=" + std::to_string(c.p) + " d=" + std::to_string(c.d),
      "pattern=" + std::string(to_string(c.pattern)) +
          (c.pattern == SpectrumPattern::ThreeLevel
               ? " mid_multiplier=" + std::to_string(c.mid_multiplier) + " " +
                     kv("tail_factor", c.tail_factor)
               : std::string()),
      kv("sigma2", c.noise_var) + " seed=" + std::to_string(c.seed) +
          " replicates=" + std::to_string(c.replicates),
  };
}

std::string ter_metadata(const Spectrum& spectrum, int n) {
  const TerMetrics ter = ter_metrics(spectrum, n);
  return kv("r_d", ter.r_d_sigma) + " " + kv("r_d_sq", ter.r_d_sigma_sq) +
         " regime=" + std::string(to_string(ter.regime));
}

void mark_argmins(std::vector<FigureRow>& rows) {
  std::vector<double> taus, out, in;
  for (const auto& r : rows) {
    taus.push_back(r.tau);
    out.push_back(r.mse_out);
    in.push_back(r.mse_in);
  }
  const std::vector<bool> valid(rows.size(), true);
  rows[select_optimum(taus, out, valid).index].is_argmin_out = true;
  rows[select_optimum(taus, in, valid).index].is_argmin_in = true;
}

// Extra points are appended even when they repeat a grid value, so every
// multiplier of a study sweeps the same number of points.
std::vector<double> merged_grid(std::vector<double> grid, std::initializer_list<double> extra) {
  grid.insert(grid.end(), extra.begin(), extra.end());
  std::sort(grid.begin(), grid.end());
  return grid;
}

TauWindow corollary_window(Corollary c, const DnThresholds& t) {
  switch (c) {
    case Corollary::C1: return t.cor1_window;
    case Corollary::C2: return t.cor2_window;
    case Corollary::C3a:
    case Corollary::C3b: return t.cor3_window;
    case Corollary::C4: return t.cor4_window;
  }
  return t.cor1_window;
}

bool zero_tau_study(Corollary c) {
  return c == Corollary::C3a || c == Corollary::C3b || c == Corollary::C4;
}

std::string debug_name(const std::string& setting, double multiplier, int replicate) {
  std::string m = format_double(multiplier);
  return setting + "_x" + m + "_rep" + std::to_string(replicate) + ".csv";
}

}  // namespace

Corollary parse_corollary(std::string_view text) {
  if (text == "c1") return Corollary::C1;
  if (text == "c2") return Corollary::C2;
  if (text == "c3a") return Corollary::C3a;
  if (text == "c3b") return Corollary::C3b;
  if (text == "c4") return Corollary::C4;
  throw DomainError("corollary must be one of c1, c2, c3a, c3b, c4");
}

Fig2Setting parse_fig2_setting(std::string_view text) {
  if (text == "i") return Fig2Setting::S_i;
  if (text == "ii") return Fig2Setting::S_ii;
  if (text == "iii") return Fig2Setting::S_iii;
  throw DomainError("setting must be one of i, ii, iii");
}

std::string_view to_string(Corollary c) noexcept {
  switch (c) {
    case Corollary::C1: return "c1";
    case Corollary::C2: return "c2";
    case Corollary::C3a: return "c3a";
    case Corollary::C3b: return "c3b";
    case Corollary::C4: return "c4";
  }
  return "c1";
}

std::string_view to_string(Fig2Setting s) noexcept {
  switch (s) {
    case Fig2Setting::S_i: return "i";
    case Fig2Setting::S_ii: return "ii";
    case Fig2Setting::S_iii: return "iii";
  }
  return "i";
}

ExperimentConfig fig1_preset(Corollary c) {
  ExperimentConfig cfg;
  cfg.d = 5;
  cfg.p = 1500;
  cfg.pattern = SpectrumPattern::TwoLevel;
  switch (c) {
    case Corollary::C1:
    case Corollary::C2: cfg.n = 1500; break;
    case Corollary::C3a: cfg.n = 50; break;
    case Corollary::C3b:
    case Corollary::C4: cfg.n = 150; break;
  }
  return cfg;
}

ExperimentConfig fig2_preset(Fig2Setting s) {
  ExperimentConfig cfg;
  cfg.d = 2;
  cfg.p = 15000;
  cfg.multipliers = {1.0};
  switch (s) {
    case Fig2Setting::S_i:
      cfg.n = 300;
      cfg.pattern = SpectrumPattern::ThreeLevel;
      cfg.mid_multiplier = 10;
      cfg.tail_factor = 0.02;
      break;
    case Fig2Setting::S_ii:
      cfg.n = 150;
      cfg.pattern = SpectrumPattern::TwoLevel;
      break;
    case Fig2Setting::S_iii:
      cfg.n = 300;
      cfg.pattern = SpectrumPattern::TwoLevel;
      break;
  }
  return cfg;
}

bool fig1_uses_out_sample(Corollary c) noexcept {
  return c == Corollary::C1 || c == Corollary::C3a || c == Corollary::C3b;
}

double fig1_threshold(Corollary c, const ExperimentConfig& config) {
  if (config.rho) return *config.rho;
  // Both patterns scale the whole tail with rho, so the ranks do not depend on it.
  const DnThresholds t = dn_condition_thresholds(build_spectrum(config, 0.5), config.n);
  switch (c) {
    case Corollary::C1: return t.cor1;
    case Corollary::C2: return config.d / t.ter.r_d_sigma;  // the study scales d / r_d
    case Corollary::C3a:
    case Corollary::C3b: return t.cor3;
    case Corollary::C4: return t.cor4;
  }
  return t.cor1;
}

double fig2_rho(Fig2Setting s, const ExperimentConfig& config) {
  if (config.rho) return *config.rho;
  const DnThresholds t = dn_condition_thresholds(build_spectrum(config, 0.5), config.n);
  const double d = config.d;
  const double n = config.n;
  if (s == Fig2Setting::S_i) return d / n * std::sqrt(t.n_over_r2);
  return d / std::sqrt(n * t.ter.r_d_sigma_sq) * std::min(1.0, t.cor3_discriminant);
}

std::vector<GroupSummary> summarize(const FigureTable& table) {
  std::vector<GroupSummary> groups;
  for (const auto& row : table.rows) {
    if (groups.empty() || groups.back().setting != row.setting ||
        groups.back().multiplier != row.multiplier) {
      groups.push_back(GroupSummary{row.setting, row.multiplier, row, row});
    }
    auto& g = groups.back();
    if (row.is_argmin_out) g.best_out = row;
    if (row.is_argmin_in) g.best_in = row;
  }
  return groups;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int workers = std::max(1, std::min(threads, count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<double> configured_grid(const Spectrum& spectrum, const ExperimentConfig& config) {
  const double lo = config.tau_min.value_or(spectrum.first_tail() / 10.0);
  const double hi = config.tau_max.value_or(10.0 * spectrum.last_spike());
  return make_tau_grid(lo, std::max(lo, hi), config.tau_count, config.tau_scale);
}

std::vector<FigureRow> averaged_sweep(const Scenario& scenario, const std::vector<double>& grid,
                                      const ExperimentConfig& config, const std::string& setting,
                                      double multiplier) {
  const int reps = config.replicates;
  const std::size_t g = grid.size();
  std::vector<std::vector<RiskReport>> per_rep(static_cast<std::size_t>(reps));
  parallel_for(reps, config.threads, [&](int r) {
    const Dataset data = generate_dataset(scenario, r);
    const RiskEvaluator evaluator(data, scenario.spectrum, scenario.theta_star, scenario.noise_var);
    auto& out = per_rep[r];
    out.reserve(g);
    for (double tau : grid) out.push_back(evaluator.at(tau));
  });

  const double scale = static_cast<double>(scenario.n) / scenario.spectrum.spike_dim();
  auto moments = [reps](auto&& value) {
    double mean = 0.0;
    for (int r = 0; r < reps; ++r) mean += value(r);
    mean /= reps;
    if (reps < 2) return std::pair{mean, 0.0};
    double ss = 0.0;
    for (int r = 0; r < reps; ++r) ss += (value(r) - mean) * (value(r) - mean);
    return std::pair{mean, std::sqrt(ss / (reps - 1) / reps)};
  };

  std::vector<FigureRow> rows(g);
  for (std::size_t k = 0; k < g; ++k) {
    FigureRow& row = rows[k];
    row.setting = setting;
    row.multiplier = multiplier;
    row.tau = grid[k];
    std::tie(row.mse_out, row.mse_out_se) = moments([&](int r) { return per_rep[r][k].mse_out; });
    std::tie(row.mse_in, row.mse_in_se) = moments([&](int r) { return per_rep[r][k].mse_in; });
    row.norm_out = row.mse_out * scale;
    row.norm_in = row.mse_in * scale;
  }
  mark_argmins(rows);

  if (!config.debug_dir.empty()) {
    std::filesystem::create_directories(config.debug_dir);
    for (int r = 0; r < reps; ++r) {
      FigureTable single;
      single.metadata = {"replicate=" + std::to_string(r)};
      for (std::size_t k = 0; k < g; ++k) {
        const RiskReport& rep = per_rep[r][k];
        FigureRow row{setting, multiplier, grid[k], rep.mse_out, 0.0, rep.mse_in, 0.0,
                      rep.mse_out * scale, rep.mse_in * scale, false, false};
        single.rows.push_back(row);
      }
      mark_argmins(single.rows);
      emit_csv(single, (std::filesystem::path(config.debug_dir) /
                        debug_name(setting, multiplier, r)).string());
    }
  }
  return rows;
}

FigureTable run_sweep(const ExperimentConfig& config) {
  config.validate();
  if (!config.rho) throw DomainError("sweep needs rho (--rho or config key rho)");
  const Spectrum spectrum = build_spectrum(config, *config.rho);
  const Scenario scenario = make_scenario(spectrum, config.n, config.noise_var, config.seed);
  FigureTable table;
  table.metadata = scenario_metadata("sweep", config);
  table.metadata.push_back(kv("rho", *config.rho) + " " + ter_metadata(spectrum, config.n));
  table.rows = averaged_sweep(scenario, configured_grid(spectrum, config), config, "sweep", 1.0);
  return table;
}

FigureTable run_fig1(const ExperimentConfig& config, Corollary c) {
  config.validate();
  const double threshold = fig1_threshold(c, config);
  FigureTable table;
  table.metadata = scenario_metadata("fig1", config);
  table.metadata.push_back("corollary=" + std::string(to_string(c)) + " " +
                           kv("threshold", threshold) + " mse=" +
                           (fig1_uses_out_sample(c) ? "out" : "in"));
  const std::string setting(to_string(c));
  for (double m : config.multipliers) {
    const double rho = m * threshold;
    const Spectrum spectrum = build_spectrum(config, rho);
    const DnThresholds t = dn_condition_thresholds(spectrum, config.n);
    const TauWindow w = corollary_window(c, t);
    // Shifted windows bound tau + lambda_{d+1} r_d / n; convert to tau.
    const double shift = w.shifted ? spectrum.tail_sum() / config.n : 0.0;
    const double lo = std::max(0.0, w.lo - shift);
    const double hi = std::max(0.0, w.hi - shift);
    const bool usable = w.hi - shift >= lo;

    std::vector<double> grid = configured_grid(spectrum, config);
    if (!config.tau_min && !config.tau_max) {
      grid = zero_tau_study(c) && config.n < config.p ? merged_grid(std::move(grid), {lo, hi, 0.0})
                                                      : merged_grid(std::move(grid), {lo, hi});
    }
    table.metadata.push_back(kv("multiplier", m) + " " + kv("rho", rho) + " " +
                             ter_metadata(spectrum, config.n) + " window=" +
                             (w.shifted ? "shifted" : "tau") + " " + kv("window_lo", w.lo) + " " +
                             kv("window_hi", w.hi) + " " + kv("window_tau_lo", lo) + " " +
                             kv("window_tau_hi", hi) + " window_nonempty=" +
                             (usable ? "1" : "0") + " grid_size=" + std::to_string(grid.size()));
    const Scenario scenario = make_scenario(spectrum, config.n, config.noise_var, config.seed);
    auto rows = averaged_sweep(scenario, grid, config, setting, m);
    table.rows.insert(table.rows.end(), rows.begin(), rows.end());
  }
  return table;
}

FigureTable run_fig2(const ExperimentConfig& config, Fig2Setting s) {
  config.validate();
  const double rho = fig2_rho(s, config);
  const Spectrum spectrum = build_spectrum(config, rho);
  const DnThresholds t = dn_condition_thresholds(spectrum, config.n);
  const Scenario scenario = make_scenario(spectrum, config.n, config.noise_var, config.seed);

  std::vector<double> grid = configured_grid(spectrum, config);
  if (!config.tau_min && t.ter.regime == TerRegime::Large && config.n < config.p) {
    grid = merged_grid(std::move(grid), {0.0});
  }
  FigureTable table;
  table.metadata = scenario_metadata("fig2", config);
  table.metadata.push_back("setting=" + std::string(to_string(s)) + " " + kv("rho", rho) + " " +
                           ter_metadata(spectrum, config.n));
  table.metadata.push_back(kv("n_over_r_d_sq", t.n_over_r2) + " " + kv("out_gap", t.out_gap) + " " +
                           kv("r_d_sq_over_n_r_d_sq", t.in_out_ratio_large));
  table.rows = averaged_sweep(scenario, grid, config, std::string(to_string(s)), 1.0);

  const auto summary = summarize(table).front();
  const OptimalOrder pred = optimal_order_prediction(spectrum, scenario.theta_star, config.n,
                                                     config.noise_var, t.ter.regime);
  table.metadata.push_back(kv("mse_out_star", summary.best_out.mse_out) + " " +
                           kv("mse_in_star", summary.best_in.mse_in) + " " +
                           kv("ratio_measured", summary.best_in.mse_in / summary.best_out.mse_out) +
                           " " + kv("ratio_predicted", pred.ratio()) + " " +
                           kv("tau_out_pred", pred.tau_out) + " " + kv("tau_in_pred", pred.tau_in));
  return table;
}

ApproxTable run_approx(const ExperimentConfig& config) {
  config.validate();
  if (!config.rho) throw DomainError("approx needs rho (--rho or config key rho)");
  const Spectrum spectrum = build_spectrum(config, *config.rho);
  const Scenario scenario = make_scenario(spectrum, config.n, config.noise_var, config.seed);
  std::vector<double> grid;
  for (double tau : configured_grid(spectrum, config)) {
    if (tau > 0.0) grid.push_back(tau);
  }

  ApproxTable table;
  table.metadata = scenario_metadata("approx", config);
  table.metadata.push_back(kv("rho", *config.rho) + " " + ter_metadata(spectrum, config.n));
  for (double tau : grid) {
    ApproxRow row;
    row.tau = tau;
    try {
      row.approx = approx_risk(spectrum, scenario.theta_star, config.n, config.noise_var, tau);
    } catch (const NumericalError& e) {
      table.metadata.push_back(kv("skipped_tau", tau) + " reason=" + e.what());
      continue;
    }
    row.alpha = row.approx.alpha;
    table.rows.push_back(row);
  }

  const int reps = config.replicates;
  std::vector<std::vector<RiskReport>> per_rep(static_cast<std::size_t>(reps));
  parallel_for(reps, config.threads, [&](int r) {
    const Dataset data = generate_dataset(scenario, r);
    const RiskEvaluator evaluator(data, spectrum, scenario.theta_star, scenario.noise_var);
    for (const auto& row : table.rows) per_rep[r].push_back(evaluator.at(row.tau));
  });
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    RiskReport& e = table.rows[k].exact;
    e.tau = table.rows[k].tau;
    for (int r = 0; r < reps; ++r) {
      const RiskReport& x = per_rep[r][k];
      e.b_out += x.b_out;
      e.v_out += x.v_out;
      e.b_in += x.b_in;
      e.v_in += x.v_in;
    }
    e.b_out /= reps;
    e.v_out /= reps;
    e.b_in /= reps;
    e.v_in /= reps;
    e.mse_out = e.b_out + e.v_out;
    e.mse_in = e.b_in + e.v_in;
    const ApproxReport& a = table.rows[k].approx;
    const double out_hat = a.b_out_hat + a.v_out_hat;
    const double in_hat = a.b_in_hat + a.v_in_hat;
    table.rows[k].rel_err_out = std::abs(e.mse_out - out_hat) / out_hat;
    table.rows[k].rel_err_in = std::abs(e.mse_in - in_hat) / in_hat;
  }
  return table;
}

}  // namespace ridgerisk
