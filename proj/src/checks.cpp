#include "ridgerisk/checks.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ridgerisk/detequiv.hpp"
#include "ridgerisk/report_io.hpp"
#include "ridgerisk/risk.hpp"

namespace ridgerisk {
namespace {

Eigen::MatrixXd gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

double kernel_gap(int n, int p, double tau, Rng& rng) {
  const Eigen::MatrixXd x = gaussian(n, p, rng);
  const Eigen::VectorXd y = gaussian(n, 1, rng);
  const Dataset data(x, y, Eigen::VectorXd::Zero(n));
  Eigen::MatrixXd normal = x.transpose() * x;
  normal.diagonal().array() += n * tau;
  const Eigen::VectorXd oracle = normal.ldlt().solve(x.transpose() * y);
  return (ridge_fit(data, tau) - oracle).norm() / oracle.norm();
}

Spectrum random_spectrum(int p, int d, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.01, 1.0);
  std::vector<double> lambdas(static_cast<std::size_t>(p));
  for (auto& l : lambdas) l = unif(rng);
  return Spectrum(std::move(lambdas), d);
}

CheckResult at_most(std::string suite, double measured, double tolerance) {
  return CheckResult{std::move(suite), measured, tolerance, measured <= tolerance};
}

}  // namespace

std::vector<CheckResult> run_checks(std::uint64_t seed, const CheckTolerances& tol) {
  std::vector<CheckResult> results;
  Rng rng = make_rng(seed, SeedStream::Oracle, 0);

  double kernel = 0.0;
  for (auto [n, p] : {std::pair{20, 10}, std::pair{10, 20}, std::pair{50, 50}}) {
    for (double tau : {1e-3, 1.0, 10.0}) kernel = std::max(kernel, kernel_gap(n, p, tau, rng));
  }
  results.push_back(at_most("kernel_vs_normal_equations", kernel, tol.kernel));

  {
    const Scenario sc = make_scenario(make_two_level_spectrum(2, 5, 0.3), 8, 1.0, seed);
    const Dataset data = generate_dataset(sc, 0);
    const RiskReport exact = exact_risk(data, sc.spectrum, sc.theta_star, sc.noise_var, 0.7);
    Rng mc_rng = make_rng(seed, SeedStream::Oracle, 1);
    const McRiskEstimate mc = mc_risk_oracle(data, sc, 0.7, 100000, mc_rng);
    results.push_back(at_most("mc_vs_exact_out_se",
                              std::abs(mc.out.mean - exact.mse_out) / mc.out.std_error, tol.mc_se));
    results.push_back(at_most("mc_vs_exact_in_se",
                              std::abs(mc.in.mean - exact.mse_in) / mc.in.std_error, tol.mc_se));
  }

  {
    const Scenario sc = make_scenario(make_two_level_spectrum(3, 12, 0.2), 30, 1.0, seed);
    const Dataset data = generate_dataset(sc, 0);
    results.push_back(
        at_most("rotation_invariance", rotation_invariance_check(data, sc, 0.5, seed), tol.rotation));
  }

  {
    const Spectrum flat({1.0, 1.0}, 1);
    const double alpha = solve_alpha(flat, 2, 1.0);
    results.push_back(at_most("alpha_golden_ratio", std::abs(alpha - (1.0 + std::sqrt(5.0)) / 2.0),
                              tol.alpha));
  }

  {
    double worst = 0.0;
    std::uniform_real_distribution<double> log_tau(-2.0, 1.0);
    for (int k = 0; k < 20; ++k) {
      const Spectrum s = random_spectrum(40, 3, rng);
      const Eigen::VectorXd theta = gaussian(40, 1, rng);
      const double tau = std::pow(10.0, log_tau(rng));
      const ApproxReport a = approx_risk(s, theta, 60, 1.0, tau);
      worst = std::max(worst, std::abs(a.v_in_hat - a.v_in_hat_alt) / std::abs(a.v_in_hat));
    }
    results.push_back(at_most("v_in_alternate_form", worst, tol.v_in_alt));
  }

  {
    double worst = 0.0;
    for (int k = 0; k < 3; ++k) {
      const Scenario sc = make_scenario(make_two_level_spectrum(2, 20 + 10 * k, 0.1), 25, 1.0,
                                        seed + k);
      const Dataset data = generate_dataset(sc, 0);
      const RiskEvaluator eval(data, sc.spectrum, sc.theta_star, sc.noise_var);
      double prev = -1.0;
      for (double tau : default_tau_grid(sc.spectrum)) {
        const double v = eval.at(tau).v_out;
        if (prev > 0.0) worst = std::max(worst, (v - prev) / prev);
        prev = v;
      }
    }
    results.push_back(at_most("v_out_monotone", worst, tol.monotone_slack));
  }
  return results;
}

void write_check_csv(const std::vector<CheckResult>& results, std::ostream& out) {
  out << "suite,measured,tolerance,passed\n";
  for (const auto& r : results) {
    out << r.suite << ',' << format_double(r.measured) << ',' << format_double(r.tolerance) << ','
        << (r.passed ? 1 : 0) << '\n';
  }
}

}  // namespace ridgerisk
