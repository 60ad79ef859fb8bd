#include "ridgerisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ridgerisk/error.hpp"
#include "ridgerisk/numeric.hpp"

namespace ridgerisk {
namespace {

double clamp_component(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw NumericalError(std::string("non-finite risk component ") + name);
  }
  if (value < -kNegativeSlack) {
    std::ostringstream msg;
    msg << "risk component " << name << " = " << value << " is negative beyond roundoff";
    throw NumericalError(msg.str());
  }
  return std::max(value, 0.0);
}

RiskReport finish(double tau, double b_out, double v_out, double b_in, double v_in) {
  RiskReport r;
  r.tau = tau;
  r.b_out = clamp_component(b_out, "b_out");
  r.v_out = clamp_component(v_out, "v_out");
  r.b_in = clamp_component(b_in, "b_in");
  r.v_in = clamp_component(v_in, "v_in");
  r.mse_out = r.b_out + r.v_out;
  r.mse_in = r.b_in + r.v_in;
  return r;
}

double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale < std::numeric_limits<double>::min()) return 0.0;
  return std::abs(a - b) / scale;
}

}  // namespace

void check_tau(const ThinSvd& svd, int n, double tau) {
  if (!std::isfinite(tau) || tau < 0.0) throw DomainError("tau must be finite and >= 0");
  if (tau > 0.0) return;
  const auto& s = svd.singular_values;
  if (s.size() < n) throw NumericalError("min-norm limit ill-conditioned: XX^T is rank deficient");
  const double trace = s.squaredNorm();
  const double smallest = s.minCoeff();
  if (!(smallest * smallest > kMinNormRankTolerance * trace / n)) {
    throw NumericalError("min-norm limit ill-conditioned: smallest eigenvalue of XX^T too small");
  }
}

Eigen::VectorXd ridge_fit(const Dataset& data, double tau) {
  const ThinSvd& svd = data.svd();
  check_tau(svd, data.n(), tau);
  const double shift = data.n() * tau;
  Eigen::VectorXd weights = svd.u.transpose() * data.y();
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const double s = svd.singular_values[i];
    weights[i] = s > 0.0 ? weights[i] * s / (s * s + shift) : 0.0;
  }
  return svd.v * weights;
}

RiskEvaluator::RiskEvaluator(const Dataset& data, const Spectrum& spectrum,
                             Eigen::VectorXd theta_star, double noise_var)
    : data_(&data), theta_(std::move(theta_star)), noise_var_(noise_var) {
  if (spectrum.dim() != data.p()) throw DomainError("spectrum dimension must equal design columns");
  Eigen::VectorXd diag(spectrum.dim());
  for (int j = 0; j < spectrum.dim(); ++j) diag[j] = spectrum.eigenvalue(j);
  sigma_ = std::move(diag);
  prepare();
}

RiskEvaluator::RiskEvaluator(const Dataset& data, Eigen::MatrixXd sigma,
                             Eigen::VectorXd theta_star, double noise_var)
    : data_(&data), theta_(std::move(theta_star)), noise_var_(noise_var) {
  if (sigma.rows() != data.p() || sigma.cols() != data.p()) {
    throw DomainError("covariance must be p x p");
  }
  const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(1.0, sigma.cwiseAbs().maxCoeff())) {
    throw DomainError("covariance must be symmetric");
  }
  sigma_ = std::move(sigma);
  prepare();
}

void RiskEvaluator::prepare() {
  if (theta_.size() != data_->p()) throw DomainError("theta length must equal design columns");
  if (!(noise_var_ >= 0.0)) throw DomainError("noise variance must be >= 0");
  const ThinSvd& svd = data_->svd();
  coef_ = svd.v.transpose() * theta_;
  theta_perp_ = theta_ - svd.v * coef_;
  if (const auto* diag = std::get_if<Eigen::VectorXd>(&sigma_)) {
    sigma_diag_ = (svd.v.array().square().colwise() * diag->array()).colwise().sum().transpose();
  } else {
    const auto& dense = std::get<Eigen::MatrixXd>(sigma_);
    sigma_diag_ = (svd.v.array() * (dense * svd.v).array()).colwise().sum().transpose();
  }
}

double RiskEvaluator::sigma_quadratic(const Eigen::VectorXd& v) const {
  if (const auto* diag = std::get_if<Eigen::VectorXd>(&sigma_)) {
    CompensatedSum acc;
    for (Eigen::Index j = 0; j < v.size(); ++j) acc += (*diag)[j] * v[j] * v[j];
    return acc.value();
  }
  return v.dot(std::get<Eigen::MatrixXd>(sigma_) * v);
}

RiskReport RiskEvaluator::at(double tau) const {
  const ThinSvd& svd = data_->svd();
  const int n = data_->n();
  check_tau(svd, n, tau);
  const double shift = n * tau;
  const Eigen::Index r = svd.singular_values.size();

  // Per singular direction: g = n tau / (s^2 + n tau) is the unexplained
  // fraction, f = 1 - g the explained one, h = s / (s^2 + n tau).
  Eigen::VectorXd bias_coef(r);
  CompensatedSum b_in, v_in, v_out;
  for (Eigen::Index i = 0; i < r; ++i) {
    const double s = svd.singular_values[i];
    const double denom = s * s + shift;
    const double g = denom > 0.0 ? shift / denom : 1.0;
    const double f = denom > 0.0 ? s * s / denom : 0.0;
    const double h = denom > 0.0 ? s / denom : 0.0;
    bias_coef[i] = g * coef_[i];
    b_in += s * s * bias_coef[i] * bias_coef[i];
    v_in += f * f;
    v_out += h * h * sigma_diag_[i];
  }
  const Eigen::VectorXd residual = theta_perp_ + svd.v * bias_coef;
  return finish(tau, sigma_quadratic(residual), noise_var_ * v_out.value(), b_in.value() / n,
                noise_var_ * v_in.value() / n);
}

RiskReport exact_risk(const Dataset& data, const Spectrum& spectrum,
                      const Eigen::VectorXd& theta_star, double noise_var, double tau) {
  return RiskEvaluator(data, spectrum, theta_star, noise_var).at(tau);
}

RiskReport exact_risk(const Dataset& data, const Eigen::MatrixXd& sigma,
                      const Eigen::VectorXd& theta_star, double noise_var, double tau) {
  return RiskEvaluator(data, sigma, theta_star, noise_var).at(tau);
}

McRiskEstimate mc_risk_oracle(const Dataset& data, const Scenario& scenario, double tau,
                              int num_draws, Rng& rng) {
  if (num_draws < 100) throw DomainError("Monte-Carlo oracle needs at least 100 draws");
  scenario.validate();
  check_tau(data.svd(), data.n(), tau);
  const int n = data.n();
  const Eigen::MatrixXd& x = data.x();
  Eigen::MatrixXd gram = x * x.transpose();
  gram.diagonal().array() += n * tau;
  const Eigen::MatrixXd kernel = x.transpose() * gram.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::VectorXd signal_error = kernel * (x * scenario.theta_star) - scenario.theta_star;

  std::normal_distribution<double> normal(0.0, std::sqrt(scenario.noise_var));
  Eigen::VectorXd eps(n);
  // Welford updates keep the SE exactly zero when every draw is identical.
  struct Running {
    double mean = 0.0, m2 = 0.0;
    void push(double x, int k) {
      const double delta = x - mean;
      mean += delta / k;
      m2 += delta * (x - mean);
    }
    McEstimate finish(int count) const {
      return McEstimate{mean, std::sqrt(std::max(m2, 0.0) / (count - 1) / count)};
    }
  } out_acc, in_acc;
  for (int k = 1; k <= num_draws; ++k) {
    for (int i = 0; i < n; ++i) eps[i] = scenario.noise_var > 0.0 ? normal(rng) : 0.0;
    const Eigen::VectorXd err = signal_error + kernel * eps;
    const Eigen::VectorXd x0 = sample_covariate(scenario.spectrum, rng);
    const double proj = x0.dot(err);
    out_acc.push(proj * proj, k);
    in_acc.push((x * err).squaredNorm() / n, k);
  }
  return McRiskEstimate{out_acc.finish(num_draws), in_acc.finish(num_draws), num_draws};
}

TauOptimum select_optimum(std::span<const double> taus, std::span<const double> values,
                          const std::vector<bool>& valid) {
  bool found = false;
  TauOptimum best;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!valid[i] || !std::isfinite(values[i])) continue;
    if (!found || values[i] < best.mse || (values[i] == best.mse && taus[i] < best.tau)) {
      best = TauOptimum{taus[i], values[i], i};
      found = true;
    }
  }
  if (!found) throw NumericalError("no valid tau in grid");
  return best;
}

SweepResult sweep_tau(const Dataset& data, const Scenario& scenario,
                      std::span<const double> tau_grid) {
  if (tau_grid.empty()) throw DomainError("tau grid must be nonempty");
  if (!std::is_sorted(tau_grid.begin(), tau_grid.end())) {
    throw DomainError("tau grid must be nondecreasing");
  }
  const RiskEvaluator evaluator(data, scenario.spectrum, scenario.theta_star, scenario.noise_var);
  SweepResult result;
  result.grid.reserve(tau_grid.size());
  std::vector<bool> valid;
  std::vector<double> out, in;
  for (double tau : tau_grid) {
    SweepEntry entry;
    try {
      entry.report = evaluator.at(tau);
    } catch (const NumericalError& e) {
      entry.valid = false;
      entry.error = e.what();
      entry.report.tau = tau;
      entry.report.mse_out = entry.report.mse_in = std::numeric_limits<double>::quiet_NaN();
    }
    valid.push_back(entry.valid);
    out.push_back(entry.report.mse_out);
    in.push_back(entry.report.mse_in);
    result.grid.push_back(std::move(entry));
  }
  result.argmin_out = select_optimum(tau_grid, out, valid);
  result.argmin_in = select_optimum(tau_grid, in, valid);
  return result;
}

std::vector<double> make_tau_grid(double tau_min, double tau_max, int count, TauScale scale) {
  if (count < 1) throw DomainError("tau grid count must be >= 1");
  if (!(tau_min >= 0.0) || !(tau_max >= tau_min) || !std::isfinite(tau_max)) {
    throw DomainError("tau grid requires 0 <= tau_min <= tau_max");
  }
  if (scale == TauScale::Log && !(tau_min > 0.0)) {
    throw DomainError("log-spaced tau grid requires tau_min > 0");
  }
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = tau_min;
    return grid;
  }
  for (int k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / (count - 1);
    grid[k] = scale == TauScale::Log
                  ? std::exp(std::log(tau_min) + t * (std::log(tau_max) - std::log(tau_min)))
                  : tau_min + t * (tau_max - tau_min);
  }
  grid.front() = tau_min;
  grid.back() = tau_max;
  return grid;
}

std::vector<double> default_tau_grid(const Spectrum& spectrum, int count) {
  return make_tau_grid(spectrum.first_tail() / 10.0, 10.0 * spectrum.last_spike(), count,
                       TauScale::Log);
}

Eigen::MatrixXd haar_orthogonal(int p, Rng& rng) {
  if (p < 1) throw DomainError("orthogonal matrix dimension must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(p, p);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(p, p);
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (int j = 0; j < p; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

double rotation_invariance_check(const Dataset& data, const Scenario& scenario, double tau,
                                 const Eigen::MatrixXd& q) {
  scenario.validate();
  const int p = data.p();
  if (q.rows() != p || q.cols() != p) throw DomainError("rotation must be p x p");
  const RiskReport base = exact_risk(data, scenario.spectrum, scenario.theta_star,
                                     scenario.noise_var, tau);

  Eigen::VectorXd diag(p);
  for (int j = 0; j < p; ++j) diag[j] = scenario.spectrum.eigenvalue(j);
  Eigen::MatrixXd sigma = q.transpose() * diag.asDiagonal() * q;
  sigma = 0.5 * (sigma + sigma.transpose());
  const Dataset rotated(data.x() * q, data.y(), data.noise());
  const RiskReport turned = exact_risk(rotated, sigma, q.transpose() * scenario.theta_star,
                                       scenario.noise_var, tau);

  return std::max({relative_gap(base.b_out, turned.b_out), relative_gap(base.v_out, turned.v_out),
                   relative_gap(base.b_in, turned.b_in), relative_gap(base.v_in, turned.v_in)});
}

double rotation_invariance_check(const Dataset& data, const Scenario& scenario, double tau,
                                 std::uint64_t orthogonal_seed) {
  Rng rng = make_rng(orthogonal_seed, SeedStream::Rotation, 0);
  return rotation_invariance_check(data, scenario, tau, haar_orthogonal(data.p(), rng));
}

}  // namespace ridgerisk
