#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ridgerisk/error.hpp"
#include "ridgerisk/risk.hpp"

using namespace ridgerisk;

namespace {

Eigen::MatrixXd gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = g(rng);
  }
  return m;
}

Eigen::VectorXd normal_equations_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     double tau) {
  Eigen::MatrixXd a = x.transpose() * x;
  a.diagonal().array() += x.rows() * tau;
  return a.ldlt().solve(x.transpose() * y);
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / b.norm(); }

Eigen::MatrixXd diag_sigma(const Spectrum& s) {
  Eigen::VectorXd d(s.dim());
  for (int j = 0; j < s.dim(); ++j) d[j] = s.eigenvalue(j);
  return d.asDiagonal();
}

// Dense trace formulas with an explicit inverse of XX^T + n tau I.
RiskReport naive_risk(const Eigen::MatrixXd& x, const Eigen::MatrixXd& sigma,
                      const Eigen::VectorXd& theta, double noise_var, double tau) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  Eigen::MatrixXd a = x * x.transpose();
  a.diagonal().array() += n * tau;
  const Eigen::MatrixXd a_inv = a.inverse();
  const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(p, p) - x.transpose() * a_inv * x;
  const Eigen::VectorXd v = proj * theta;
  const Eigen::MatrixXd sigma_hat = x.transpose() * x / n;
  RiskReport r;
  r.tau = tau;
  r.b_out = v.dot(sigma * v);
  r.v_out = noise_var * (a_inv * x * sigma * x.transpose() * a_inv).trace();
  r.b_in = v.dot(sigma_hat * v);
  r.v_in = noise_var * (a_inv * x * sigma_hat * x.transpose() * a_inv).trace();
  r.mse_out = r.b_out + r.v_out;
  r.mse_in = r.b_in + r.v_in;
  return r;
}

void check_close(const RiskReport& a, const RiskReport& b, double tol) {
  CHECK(a.b_out == doctest::Approx(b.b_out).epsilon(tol));
  CHECK(a.v_out == doctest::Approx(b.v_out).epsilon(tol));
  CHECK(a.b_in == doctest::Approx(b.b_in).epsilon(tol));
  CHECK(a.v_in == doctest::Approx(b.v_in).epsilon(tol));
}

}  // namespace

TEST_CASE("ridge fit equals the normal equations") {
  Rng rng = make_rng(1, SeedStream::Oracle, 0);
  SUBCASE("n = 10, p = 6, tau = 1") {
    const Eigen::MatrixXd x = gaussian(10, 6, rng);
    const Eigen::VectorXd y = gaussian(10, 1, rng);
    const Dataset data(x, y, Eigen::VectorXd::Zero(10));
    CHECK(rel(ridge_fit(data, 1.0), normal_equations_fit(x, y, 1.0)) <= 1e-8);
  }
  SUBCASE("property over shapes and penalties") {
    for (auto [n, p] : {std::pair{20, 10}, std::pair{10, 20}, std::pair{50, 50}, std::pair{3, 40}}) {
      const Eigen::MatrixXd x = gaussian(n, p, rng);
      const Eigen::VectorXd y = gaussian(n, 1, rng);
      const Dataset data(x, y, Eigen::VectorXd::Zero(n));
      for (double tau : {1e-3, 0.05, 1.0, 10.0}) {
        CHECK(rel(ridge_fit(data, tau), normal_equations_fit(x, y, tau)) <= 1e-8);
      }
    }
  }
}

TEST_CASE("ridge fit limits") {
  Rng rng = make_rng(2, SeedStream::Oracle, 0);
  SUBCASE("noiseless identifiable model is interpolated as tau -> 0") {
    const Eigen::MatrixXd x = gaussian(30, 8, rng);
    const Eigen::VectorXd theta = gaussian(8, 1, rng);
    const Dataset data = Dataset::from_model(x, theta, Eigen::VectorXd::Zero(30));
    CHECK(rel(ridge_fit(data, 1e-13), theta) <= 1e-8);
  }
  SUBCASE("dominant penalty shrinks to zero") {
    const Eigen::MatrixXd x = gaussian(12, 9, rng);
    const Eigen::VectorXd y = gaussian(12, 1, rng);
    const Dataset data(x, y, Eigen::VectorXd::Zero(12));
    const double tau = 1e12 * 10.0;
    const double bound = (x.transpose() * y).norm() / (12 * tau);
    const Eigen::VectorXd fit = ridge_fit(data, tau);
    CHECK(fit.norm() <= bound * (1.0 + 1e-6));
    CHECK(fit.norm() <= 1e-6 * y.norm());
  }
  SUBCASE("tau = 0 on a wide design is the min-norm interpolator") {
    const Eigen::MatrixXd x = gaussian(6, 15, rng);
    const Eigen::VectorXd y = gaussian(6, 1, rng);
    const Dataset data(x, y, Eigen::VectorXd::Zero(6));
    const Eigen::VectorXd oracle = x.transpose() * (x * x.transpose()).ldlt().solve(y);
    const Eigen::VectorXd fit = ridge_fit(data, 0.0);
    CHECK(rel(fit, oracle) <= 1e-10);
    CHECK((x * fit - y).norm() <= 1e-10 * y.norm());
  }
  SUBCASE("tau = 0 is refused when XX^T is singular") {
    const Eigen::MatrixXd x = gaussian(15, 6, rng);
    const Dataset data(x, gaussian(15, 1, rng), Eigen::VectorXd::Zero(15));
    CHECK_THROWS_WITH_AS((void)ridge_fit(data, 0.0),
                         doctest::Contains("min-norm limit ill-conditioned"), NumericalError);
  }
  SUBCASE("negative tau") {
    const Dataset data(gaussian(4, 3, rng), gaussian(4, 1, rng), Eigen::VectorXd::Zero(4));
    CHECK_THROWS_AS((void)ridge_fit(data, -1.0), DomainError);
    CHECK_THROWS_AS((void)ridge_fit(data, NAN), DomainError);
  }
}

TEST_CASE("exact risk matches dense trace formulas") {
  for (auto [n, p] : {std::pair{8, 5}, std::pair{12, 30}, std::pair{25, 25}}) {
    const Scenario sc = make_scenario(make_two_level_spectrum(2, p, 0.3), n, 0.8, 17);
    const Dataset data = generate_dataset(sc, 1);
    for (double tau : {1e-3, 0.1, 0.7, 5.0}) {
      const RiskReport fast = exact_risk(data, sc.spectrum, sc.theta_star, sc.noise_var, tau);
      const RiskReport slow = naive_risk(data.x(), diag_sigma(sc.spectrum), sc.theta_star,
                                         sc.noise_var, tau);
      check_close(fast, slow, 1e-9);
      CHECK(fast.mse_out == fast.b_out + fast.v_out);
      CHECK(fast.mse_in == fast.b_in + fast.v_in);
    }
  }
}

TEST_CASE("exact risk edge cases") {
  const Scenario sc = make_scenario(make_two_level_spectrum(2, 9, 0.4), 14, 0.0, 4);
  const Dataset data = generate_dataset(sc, 0);
  SUBCASE("noiseless means zero variance") {
    const RiskReport r = exact_risk(data, sc.spectrum, sc.theta_star, 0.0, 0.3);
    CHECK(r.v_out == 0.0);
    CHECK(r.v_in == 0.0);
  }
  SUBCASE("huge penalty drives out-sample bias to the signal energy") {
    double energy = 0.0;
    for (int j = 0; j < 9; ++j) energy += sc.spectrum.eigenvalue(j) * std::pow(sc.theta_star[j], 2);
    const RiskReport r = exact_risk(data, sc.spectrum, sc.theta_star, 1.0, 1e9);
    CHECK(r.b_out == doctest::Approx(energy).epsilon(1e-6));
  }
  SUBCASE("dense covariance path agrees with the diagonal path") {
    const RiskReport a = exact_risk(data, sc.spectrum, sc.theta_star, 1.0, 0.2);
    const RiskReport b = exact_risk(data, diag_sigma(sc.spectrum), sc.theta_star, 1.0, 0.2);
    check_close(a, b, 1e-12);
  }
  CHECK_THROWS_AS((void)exact_risk(data, Eigen::MatrixXd::Identity(3, 3), sc.theta_star, 1.0, 1.0),
                  DomainError);
}

TEST_CASE("monte carlo oracle") {
  const Scenario sc = make_scenario(make_two_level_spectrum(2, 5, 0.3), 8, 1.0, 2024);
  const Dataset data = generate_dataset(sc, 0);
  const RiskReport exact = exact_risk(data, sc.spectrum, sc.theta_star, sc.noise_var, 0.7);

  SUBCASE("agrees with the exact risk within 3 standard errors") {
    Rng rng = make_rng(sc.master_seed, SeedStream::Oracle, 0);
    const McRiskEstimate mc = mc_risk_oracle(data, sc, 0.7, 100000, rng);
    CHECK(std::abs(mc.out.mean - exact.mse_out) <= 3.0 * mc.out.std_error);
    CHECK(std::abs(mc.in.mean - exact.mse_in) <= 3.0 * mc.in.std_error);
  }
  SUBCASE("noiseless in-sample estimate is the bias with zero error") {
    Scenario quiet = sc;
    quiet.noise_var = 0.0;
    Rng rng = make_rng(1, SeedStream::Oracle, 1);
    const McRiskEstimate mc = mc_risk_oracle(data, quiet, 0.7, 500, rng);
    CHECK(mc.in.std_error == 0.0);
    CHECK(mc.in.mean == doctest::Approx(exact.b_in).epsilon(1e-10));
  }
  SUBCASE("standard error scales like one over root draws") {
    Rng a = make_rng(5, SeedStream::Oracle, 2);
    Rng b = make_rng(5, SeedStream::Oracle, 3);
    const McRiskEstimate small = mc_risk_oracle(data, sc, 0.7, 20000, a);
    const McRiskEstimate large = mc_risk_oracle(data, sc, 0.7, 40000, b);
    const double ratio = small.out.std_error / large.out.std_error;
    CHECK(ratio >= std::sqrt(2.0) * 0.8);
    CHECK(ratio <= std::sqrt(2.0) * 1.2);
  }
  Rng rng = make_rng(1, SeedStream::Oracle, 9);
  CHECK_THROWS_AS((void)mc_risk_oracle(data, sc, 0.7, 99, rng), DomainError);
}

TEST_CASE("tau sweep") {
  const Scenario sc = make_scenario(make_two_level_spectrum(3, 40, 0.05), 30, 1.0, 8);
  const Dataset data = generate_dataset(sc, 0);

  SUBCASE("single point") {
    const std::vector<double> grid{0.3};
    const SweepResult r = sweep_tau(data, sc, grid);
    CHECK(r.argmin_out.tau == 0.3);
    CHECK(r.argmin_in.index == 0);
  }
  SUBCASE("argmin matches per-point recomputation") {
    const std::vector<double> grid{0.01, 0.1, 1.0};
    const SweepResult r = sweep_tau(data, sc, grid);
    std::vector<double> out, in;
    for (double tau : grid) {
      const Dataset fresh(data.x(), data.y(), data.noise());
      const RiskReport naive = naive_risk(fresh.x(), diag_sigma(sc.spectrum), sc.theta_star,
                                          sc.noise_var, tau);
      out.push_back(naive.mse_out);
      in.push_back(naive.mse_in);
    }
    const auto best_out = std::min_element(out.begin(), out.end()) - out.begin();
    const auto best_in = std::min_element(in.begin(), in.end()) - in.begin();
    CHECK(r.argmin_out.index == static_cast<std::size_t>(best_out));
    CHECK(r.argmin_in.index == static_cast<std::size_t>(best_in));
    CHECK(r.argmin_out.mse == doctest::Approx(out[best_out]).epsilon(1e-10));
    CHECK(r.argmin_in.mse == doctest::Approx(in[best_in]).epsilon(1e-10));
  }
  SUBCASE("out-sample variance never increases along the grid") {
    const auto grid = default_tau_grid(sc.spectrum);
    const SweepResult r = sweep_tau(data, sc, grid);
    for (std::size_t k = 1; k < grid.size(); ++k) {
      CHECK(r.grid[k].report.v_out <= r.grid[k - 1].report.v_out * (1.0 + 1e-12));
      CHECK(r.grid[k].report.b_out >= r.grid[k - 1].report.b_out * (1.0 - 1e-12));
    }
    for (const auto& e : r.grid) {
      CHECK(e.valid);
      CHECK(e.report.b_in >= 0.0);
      CHECK(std::isfinite(e.report.mse_out));
    }
  }
  SUBCASE("invalid points are excluded") {
    const Scenario tall = make_scenario(make_two_level_spectrum(2, 6, 0.5), 20, 1.0, 3);
    const Dataset td = generate_dataset(tall, 0);
    const std::vector<double> grid{0.0, 0.5, 1.0};
    const SweepResult r = sweep_tau(td, tall, grid);
    CHECK_FALSE(r.grid[0].valid);
    CHECK(r.grid[0].error.find("min-norm") != std::string::npos);
    CHECK(r.argmin_out.index >= 1);
    const std::vector<double> bad{0.0};
    CHECK_THROWS_AS((void)sweep_tau(td, tall, bad), NumericalError);
  }
  SUBCASE("grid preconditions") {
    const std::vector<double> empty;
    const std::vector<double> decreasing{1.0, 0.5};
    CHECK_THROWS_AS((void)sweep_tau(data, sc, empty), DomainError);
    CHECK_THROWS_AS((void)sweep_tau(data, sc, decreasing), DomainError);
  }
}

TEST_CASE("optimum selection breaks ties toward smaller tau") {
  const std::vector<double> taus{0.1, 0.2, 0.3, 0.4};
  const std::vector<double> values{3.0, 1.0, 1.0, 2.0};
  CHECK(select_optimum(taus, values, {true, true, true, true}).tau == 0.2);
  CHECK(select_optimum(taus, values, {true, false, true, true}).tau == 0.3);
  CHECK_THROWS_AS((void)select_optimum(taus, values, {false, false, false, false}), NumericalError);
}

TEST_CASE("tau grids") {
  const auto log_grid = make_tau_grid(1e-3, 10.0, 5, TauScale::Log);
  REQUIRE(log_grid.size() == 5);
  CHECK(log_grid.front() == 1e-3);
  CHECK(log_grid.back() == 10.0);
  CHECK(log_grid[2] == doctest::Approx(0.1));
  const auto lin = make_tau_grid(0.0, 1.0, 3, TauScale::Linear);
  CHECK(lin[1] == 0.5);
  CHECK(make_tau_grid(2.0, 5.0, 1, TauScale::Log).front() == 2.0);
  const auto def = default_tau_grid(make_two_level_spectrum(2, 10, 0.2));
  CHECK(def.size() == 61);
  CHECK(def.front() == doctest::Approx(0.02));
  CHECK(def.back() == doctest::Approx(10.0));
  CHECK(std::is_sorted(def.begin(), def.end()));
  CHECK_THROWS_AS((void)make_tau_grid(0.0, 1.0, 4, TauScale::Log), DomainError);
  CHECK_THROWS_AS((void)make_tau_grid(2.0, 1.0, 4, TauScale::Linear), DomainError);
  CHECK_THROWS_AS((void)make_tau_grid(1.0, 2.0, 0, TauScale::Linear), DomainError);
}

TEST_CASE("rotation invariance") {
  const Scenario sc = make_scenario(make_two_level_spectrum(3, 12, 0.2), 30, 1.0, 99);
  const Dataset data = generate_dataset(sc, 0);
  CHECK(rotation_invariance_check(data, sc, 0.4, Eigen::MatrixXd::Identity(12, 12)) <= 1e-14);
  CHECK(rotation_invariance_check(data, sc, 0.4, std::uint64_t{5}) <= 1e-8);

  std::vector<int> order(12);
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());
  std::swap(order[0], order[5]);
  Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(12, 12);
  for (int i = 0; i < 12; ++i) perm(i, order[i]) = 1.0;
  CHECK(rotation_invariance_check(data, sc, 0.4, perm) <= 1e-10);

  Rng rng = make_rng(3, SeedStream::Rotation, 1);
  const Eigen::MatrixXd q = haar_orthogonal(12, rng);
  CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(12, 12)).norm() <= 1e-12);
}
