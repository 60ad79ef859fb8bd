#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "ridgerisk/checks.hpp"
#include "ridgerisk/config.hpp"
#include "ridgerisk/error.hpp"
#include "ridgerisk/experiments.hpp"
#include "ridgerisk/report_io.hpp"

using namespace ridgerisk;

namespace {

struct Flags {
  std::optional<int> n, p, d, tau_count, replicates, threads, mid_multiplier;
  std::optional<double> rho, sigma2, tau_min, tau_max, tail_factor;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> tau_scale, pattern, multipliers, out, plot, debug_dir;
  std::string config_path;
};

void add_common(CLI::App* cmd, Flags& f, bool scenario = true) {
  cmd->add_option("--config", f.config_path, "INI file with key=value settings");
  cmd->add_option("--seed", f.seed, "master seed (overrides RIDGE_RISK_SEED)");
  cmd->add_option("--out", f.out, "output path, '-' for stdout");
  if (!scenario) return;
  cmd->add_option("--n", f.n, "sample size");
  cmd->add_option("--p", f.p, "dimension");
  cmd->add_option("--d", f.d, "spike dimension");
  cmd->add_option("--rho", f.rho, "tail eigenvalue lambda_{d+1}");
  cmd->add_option("--pattern", f.pattern, "two_level or three_level");
  cmd->add_option("--mid-multiplier", f.mid_multiplier, "three-level middle block size / d");
  cmd->add_option("--tail-factor", f.tail_factor, "three-level tail eigenvalue / rho");
  cmd->add_option("--sigma2", f.sigma2, "noise variance");
  cmd->add_option("--tau-min", f.tau_min, "smallest tau of the grid");
  cmd->add_option("--tau-max", f.tau_max, "largest tau of the grid");
  cmd->add_option("--tau-count", f.tau_count, "number of grid points");
  cmd->add_option("--tau-scale", f.tau_scale, "log or linear")
      ->check(CLI::IsMember({"log", "linear"}));
  cmd->add_option("--replicates", f.replicates, "datasets averaged per point");
  cmd->add_option("--multipliers", f.multipliers, "comma-separated threshold multipliers");
  cmd->add_option("--threads", f.threads, "worker threads for replicates");
  cmd->add_option("--plot", f.plot, "SVG plot path");
  cmd->add_option("--debug-dir", f.debug_dir, "directory for per-replicate CSVs");
}

ExperimentConfig resolve(ExperimentConfig cfg, const Flags& f, const std::string& section) {
  if (!f.config_path.empty()) apply_config_file(cfg, f.config_path, section);
  apply_environment(cfg);
  if (f.n) cfg.n = *f.n;
  if (f.p) cfg.p = *f.p;
  if (f.d) cfg.d = *f.d;
  if (f.rho) cfg.rho = *f.rho;
  if (f.pattern) cfg.pattern = parse_pattern(*f.pattern);
  if (f.mid_multiplier) cfg.mid_multiplier = *f.mid_multiplier;
  if (f.tail_factor) cfg.tail_factor = *f.tail_factor;
  if (f.sigma2) cfg.noise_var = *f.sigma2;
  if (f.seed) cfg.seed = *f.seed;
  if (f.tau_min) cfg.tau_min = *f.tau_min;
  if (f.tau_max) cfg.tau_max = *f.tau_max;
  if (f.tau_count) cfg.tau_count = *f.tau_count;
  if (f.tau_scale) cfg.tau_scale = parse_tau_scale(*f.tau_scale);
  if (f.replicates) cfg.replicates = *f.replicates;
  if (f.multipliers) cfg.multipliers = parse_multipliers(*f.multipliers);
  if (f.threads) cfg.threads = *f.threads;
  if (f.out) cfg.out = *f.out;
  if (f.plot) cfg.plot = *f.plot;
  if (f.debug_dir) cfg.debug_dir = *f.debug_dir;
  cfg.validate();
  return cfg;
}

void write_table(const FigureTable& table, const ExperimentConfig& cfg) {
  emit_csv(table, cfg.out.empty() ? "-" : cfg.out);
  if (!cfg.plot.empty()) emit_plot(table, cfg.plot);
}

template <class Fn>
void with_stream(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  fn(out);
  if (!out) throw std::runtime_error("failed writing " + path);
}

void print_thresholds(const ExperimentConfig& cfg, std::ostream& out) {
  const double rho = cfg.rho.value_or(0.5);
  const Spectrum spectrum = build_spectrum(cfg, rho);
  const DnThresholds t = dn_condition_thresholds(spectrum, cfg.n);
  auto row = [&](const char* key, double v) { out << key << ',' << format_double(v) << '\n'; };
  out << "# n=" << cfg.n << " p=" << cfg.p << " d=" << cfg.d << " pattern=" << to_string(cfg.pattern)
      << " rho=" << format_double(rho) << '\n';
  out << "quantity,value\n";
  row("r_d", t.ter.r_d_sigma);
  row("r_d_sq", t.ter.r_d_sigma_sq);
  row("r_d_over_n", t.ter.ratio_to_n);
  out << "regime," << to_string(t.ter.regime) << '\n';
  row("cor1", t.cor1);
  row("cor2", t.cor2);
  row("cor3", t.cor3);
  row("cor4", t.cor4);
  row("cor3_discriminant", t.cor3_discriminant);
  const std::pair<const char*, TauWindow> windows[] = {
      {"cor1", t.cor1_window}, {"cor2", t.cor2_window}, {"cor3", t.cor3_window},
      {"cor4", t.cor4_window}};
  for (const auto& [name, w] : windows) {
    out << name << "_window_lo," << format_double(w.lo) << '\n';
    out << name << "_window_hi," << format_double(w.hi) << '\n';
    out << name << "_window_shifted," << (w.shifted ? 1 : 0) << '\n';
  }
  row("n_over_r_d_sq", t.n_over_r2);
  row("out_gap", t.out_gap);
  row("r_d_sq_over_n_r_d_sq", t.in_out_ratio_large);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and approximate ridge regression risks under spiked covariance"};
  app.require_subcommand(1);

  Flags sweep_f, approx_f, fig1_f, fig2_f, check_f, thr_f;
  auto* sweep = app.add_subcommand("sweep", "exact risks of one scenario over a tau grid");
  add_common(sweep, sweep_f);
  auto* approx = app.add_subcommand("approx", "deterministic equivalents next to exact risks");
  add_common(approx, approx_f);
  auto* fig1 = app.add_subcommand("fig1", "threshold study for one corollary");
  add_common(fig1, fig1_f);
  std::string corollary;
  fig1->add_option("--corollary", corollary, "c1, c2, c3a, c3b or c4")
      ->required()
      ->check(CLI::IsMember({"c1", "c2", "c3a", "c3b", "c4"}));
  auto* fig2 = app.add_subcommand("fig2", "out-sample versus in-sample optimum study");
  add_common(fig2, fig2_f);
  std::string setting;
  fig2->add_option("--setting", setting, "i, ii or iii")
      ->required()
      ->check(CLI::IsMember({"i", "ii", "iii"}));
  auto* check = app.add_subcommand("check", "oracle cross-check suites");
  add_common(check, check_f, false);
  CheckTolerances tol;
  check->add_option("--tol-kernel", tol.kernel);
  check->add_option("--tol-mc-se", tol.mc_se);
  check->add_option("--tol-rotation", tol.rotation);
  check->add_option("--tol-alpha", tol.alpha);
  check->add_option("--tol-v-in-alt", tol.v_in_alt);
  check->add_option("--tol-monotone", tol.monotone_slack);
  auto* thresholds = app.add_subcommand("thresholds", "ratio thresholds and tau windows");
  add_common(thresholds, thr_f);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) {
      ExperimentConfig cfg = resolve(ExperimentConfig{}, sweep_f, "sweep");
      write_table(run_sweep(cfg), cfg);
    } else if (*approx) {
      ExperimentConfig cfg = resolve(ExperimentConfig{}, approx_f, "approx");
      emit_approx_csv(run_approx(cfg), cfg.out.empty() ? "-" : cfg.out);
    } else if (*fig1) {
      const Corollary c = parse_corollary(corollary);
      ExperimentConfig cfg = resolve(fig1_preset(c), fig1_f, "fig1." + corollary);
      write_table(run_fig1(cfg, c), cfg);
    } else if (*fig2) {
      const Fig2Setting s = parse_fig2_setting(setting);
      ExperimentConfig cfg = resolve(fig2_preset(s), fig2_f, "fig2." + setting);
      write_table(run_fig2(cfg, s), cfg);
    } else if (*check) {
      ExperimentConfig cfg = resolve(ExperimentConfig{}, check_f, "check");
      const auto results = run_checks(cfg.seed, tol);
      with_stream(cfg.out, [&](std::ostream& out) { write_check_csv(results, out); });
      for (const auto& r : results) {
        if (!r.passed) return 1;
      }
    } else if (*thresholds) {
      ExperimentConfig cfg = resolve(ExperimentConfig{}, thr_f, "thresholds");
      with_stream(cfg.out, [&](std::ostream& out) { print_thresholds(cfg, out); });
    }
  } catch (const DomainError& e) {
    std::cerr << "ridge-risk: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ridge-risk: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
