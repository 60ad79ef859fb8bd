#include "ridgerisk/scenario.hpp"

#include <cmath>

#include "ridgerisk/error.hpp"
#include "ridgerisk/numeric.hpp"

namespace ridgerisk {
namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void fill_gaussian(Eigen::Ref<Eigen::VectorXd> out, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal(rng);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  return splitmix64(h ^ index);
}

Rng make_rng(std::uint64_t master, SeedStream stream, std::uint64_t index) {
  return Rng(derive_seed(master, stream, index));
}

Eigen::VectorXd sample_sphere(int p, Rng& rng) {
  if (p < 1) throw DomainError("sphere dimension must be >= 1");
  Eigen::VectorXd g(p);
  double norm = 0.0;
  do {
    fill_gaussian(g, rng);
    norm = g.norm();
  } while (!(norm > 0.0));
  return g * (std::sqrt(static_cast<double>(p)) / norm);
}

Eigen::VectorXd sample_whitened_covariate(int p, Rng& rng) {
  Eigen::VectorXd z = sample_sphere(p, rng);
  Eigen::VectorXd g(p);
  fill_gaussian(g, rng);
  return (z + g) * (std::sqrt(2.0) / 2.0);
}

Eigen::VectorXd sample_covariate(const Spectrum& spectrum, Rng& rng) {
  Eigen::VectorXd z = sample_whitened_covariate(spectrum.dim(), rng);
  for (int j = 0; j < spectrum.dim(); ++j) z[j] *= std::sqrt(spectrum.eigenvalue(j));
  return z;
}

Eigen::VectorXd generate_theta(const Spectrum& spectrum, int n, Rng& rng) {
  if (n < 1) throw DomainError("sample size n must be >= 1");
  const int p = spectrum.dim();
  const int d = spectrum.spike_dim();
  Eigen::VectorXd theta(p);
  theta.head(d).setConstant(1.0 / std::sqrt(static_cast<double>(d)));

  Eigen::VectorXd beta(p - d);
  double beta_norm_sq = 0.0;
  do {
    fill_gaussian(beta, rng);
    CompensatedSum acc;
    for (int j = 0; j < p - d; ++j) acc += spectrum.eigenvalue(d + j) * beta[j] * beta[j];
    beta_norm_sq = acc.value();
  } while (!(beta_norm_sq > 0.0));

  const double spike = spike_signal_norm_sq(spectrum, std::span<const double>(theta.data(), p));
  const TerMetrics ter = ter_metrics(spectrum, n);
  double budget = 0.0;
  if (ter.regime == TerRegime::SmallModerate) {
    const double head = spectrum.first_tail();
    budget = 0.01 * spike * head * head;
  } else {
    const double scale = 1.0 / spectrum.last_spike() + n / spectrum.tail_sum();
    budget = 0.01 * spike / (scale * scale);
  }
  theta.tail(p - d) = beta * std::sqrt(budget / beta_norm_sq);
  return theta;
}

void Scenario::validate() const {
  if (theta_star.size() != spectrum.dim()) {
    throw DomainError("theta length must equal the spectrum dimension");
  }
  if (n < 1) throw DomainError("sample size n must be >= 1");
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) {
    throw DomainError("noise variance must be finite and >= 0");
  }
}

Scenario make_scenario(Spectrum spectrum, int n, double noise_var, std::uint64_t master_seed) {
  Rng rng = make_rng(master_seed, SeedStream::Theta, 0);
  Eigen::VectorXd theta = generate_theta(spectrum, n, rng);
  Scenario s{std::move(spectrum), std::move(theta), n, noise_var, master_seed};
  s.validate();
  return s;
}

ThinSvd thin_svd(const Eigen::MatrixXd& x) {
  ThinSvd out;
  if (x.rows() < x.cols()) {
    // Bidiagonalizing the tall transpose is markedly faster for wide designs.
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = svd.matrixV();
    out.singular_values = svd.singularValues();
    out.v = svd.matrixU();
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = svd.matrixU();
    out.singular_values = svd.singularValues();
    out.v = svd.matrixV();
  }
  return out;
}

Dataset::Dataset(Eigen::MatrixXd x, Eigen::VectorXd y, Eigen::VectorXd noise)
    : x_(std::move(x)), y_(std::move(y)), noise_(std::move(noise)) {
  if (x_.rows() < 1 || x_.cols() < 1) throw DomainError("design matrix must be non-empty");
  if (y_.size() != x_.rows()) throw DomainError("response length must equal the number of rows");
  if (noise_.size() != x_.rows()) throw DomainError("noise length must equal the number of rows");
  svd_ = thin_svd(x_);
}

Dataset Dataset::from_model(Eigen::MatrixXd x, const Eigen::VectorXd& theta,
                            Eigen::VectorXd noise) {
  if (theta.size() != x.cols()) throw DomainError("theta length must equal the number of columns");
  Eigen::VectorXd y = x * theta + noise;
  return Dataset(std::move(x), std::move(y), std::move(noise));
}

Dataset generate_dataset(const Scenario& scenario, int replicate_index) {
  if (replicate_index < 0) throw DomainError("replicate index must be >= 0");
  scenario.validate();
  const int n = scenario.n;
  const int p = scenario.spectrum.dim();
  Rng rng = make_rng(scenario.master_seed, SeedStream::Replicate,
                     static_cast<std::uint64_t>(replicate_index));

  Eigen::VectorXd root(p);
  for (int j = 0; j < p; ++j) root[j] = std::sqrt(scenario.spectrum.eigenvalue(j));

  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    x.row(i) = (sample_whitened_covariate(p, rng).array() * root.array()).transpose();
  }
  Eigen::VectorXd noise = Eigen::VectorXd::Zero(n);
  if (scenario.noise_var > 0.0) {
    std::normal_distribution<double> normal(0.0, std::sqrt(scenario.noise_var));
    for (int i = 0; i < n; ++i) noise[i] = normal(rng);
  }
  return Dataset::from_model(std::move(x), scenario.theta_star, std::move(noise));
}

}  // namespace ridgerisk
