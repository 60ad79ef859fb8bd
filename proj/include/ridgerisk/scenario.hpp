#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "ridgerisk/spectrum.hpp"

namespace ridgerisk {

using Rng = std::mt19937_64;

/// Independent seed streams derived from one master seed.
enum class SeedStream : std::uint64_t { Theta = 1, Replicate = 2, Oracle = 3, Rotation = 4 };

/// splitmix64 finalizer applied to (master, stream, index). Replicates seeded
/// this way are reproducible regardless of scheduling order.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, SeedStream stream,
                                        std::uint64_t index) noexcept;
[[nodiscard]] Rng make_rng(std::uint64_t master, SeedStream stream, std::uint64_t index);

/// Uniform draw on the sphere of radius sqrt(p) (normalized Gaussian).
[[nodiscard]] Eigen::VectorXd sample_sphere(int p, Rng& rng);

/// One whitened covariate z = (z_sphere + z_gauss) / sqrt(2); isotropic with
/// dependent components.
[[nodiscard]] Eigen::VectorXd sample_whitened_covariate(int p, Rng& rng);

/// x = Sigma^{1/2} z for the diagonal spectrum.
[[nodiscard]] Eigen::VectorXd sample_covariate(const Spectrum& spectrum, Rng& rng);

/// Coefficient vector with theta_{1:d} = 1/sqrt(d) and a random tail whose
/// Sigma-energy is pinned to 1% of the rotational-sparsity budget of the
/// regime implied by (spectrum, n).
[[nodiscard]] Eigen::VectorXd generate_theta(const Spectrum& spectrum, int n, Rng& rng);

struct Scenario {
  Spectrum spectrum;
  Eigen::VectorXd theta_star;
  int n = 0;
  double noise_var = 0.0;
  std::uint64_t master_seed = 0;

  /// Throws DomainError if theta length, n or noise_var are inconsistent.
  void validate() const;
};

/// Scenario with theta drawn by generate_theta from the Theta seed stream.
[[nodiscard]] Scenario make_scenario(Spectrum spectrum, int n, double noise_var,
                                     std::uint64_t master_seed);

/// Thin SVD X = U diag(s) V^T with r = min(n, p) columns.
struct ThinSvd {
  Eigen::MatrixXd u;
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd v;
};

[[nodiscard]] ThinSvd thin_svd(const Eigen::MatrixXd& x);

/// Design, response, realized noise and the cached SVD of the design.
/// Immutable after construction.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd x, Eigen::VectorXd y, Eigen::VectorXd noise);

  /// Y = X theta + noise.
  [[nodiscard]] static Dataset from_model(Eigen::MatrixXd x, const Eigen::VectorXd& theta,
                                          Eigen::VectorXd noise);

  [[nodiscard]] const Eigen::MatrixXd& x() const noexcept { return x_; }
  [[nodiscard]] const Eigen::VectorXd& y() const noexcept { return y_; }
  [[nodiscard]] const Eigen::VectorXd& noise() const noexcept { return noise_; }
  [[nodiscard]] const ThinSvd& svd() const noexcept { return svd_; }
  [[nodiscard]] int n() const noexcept { return static_cast<int>(x_.rows()); }
  [[nodiscard]] int p() const noexcept { return static_cast<int>(x_.cols()); }

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  Eigen::VectorXd noise_;
  ThinSvd svd_;
};

/// Draws replicate `replicate_index` of the scenario. Bit-identical for equal
/// (master_seed, replicate_index).
[[nodiscard]] Dataset generate_dataset(const Scenario& scenario, int replicate_index);

}  // namespace ridgerisk
