#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ridgerisk/scenario.hpp"
#include "ridgerisk/spectrum.hpp"

namespace ridgerisk {

/// Exact conditional bias/variance of the ridge estimator at one tau.
struct RiskReport {
  double tau = 0.0;
  double b_out = 0.0;
  double v_out = 0.0;
  double b_in = 0.0;
  double v_in = 0.0;
  double mse_out = 0.0;  // b_out + v_out
  double mse_in = 0.0;   // b_in + v_in
};

/// Relative threshold on the smallest eigenvalue of XX^T (vs. trace / n)
/// below which tau = 0 is refused.
inline constexpr double kMinNormRankTolerance = 1e-10;
/// Components more negative than this are a numerical failure; smaller
/// negative roundoff is clamped to zero.
inline constexpr double kNegativeSlack = 1e-12;

/// Throws DomainError for negative/non-finite tau and NumericalError
/// ("min-norm limit ill-conditioned") for tau = 0 with rank-deficient XX^T.
void check_tau(const ThinSvd& svd, int n, double tau);

/// theta_hat = X^T (XX^T + n tau I)^{-1} Y, evaluated through the cached SVD.
[[nodiscard]] Eigen::VectorXd ridge_fit(const Dataset& data, double tau);

/// Precomputes everything about (X, Sigma, theta*) that does not depend on
/// tau, so a tau grid costs O(p r) per point after one SVD.
class RiskEvaluator {
 public:
  /// Diagonal covariance from the spectrum.
  RiskEvaluator(const Dataset& data, const Spectrum& spectrum, Eigen::VectorXd theta_star,
                double noise_var);
  /// Dense symmetric PSD covariance.
  RiskEvaluator(const Dataset& data, Eigen::MatrixXd sigma, Eigen::VectorXd theta_star,
                double noise_var);

  [[nodiscard]] RiskReport at(double tau) const;

 private:
  void prepare();
  [[nodiscard]] double sigma_quadratic(const Eigen::VectorXd& v) const;

  const Dataset* data_;
  std::variant<Eigen::VectorXd, Eigen::MatrixXd> sigma_;
  Eigen::VectorXd theta_;
  double noise_var_;
  Eigen::VectorXd coef_;        // V^T theta*
  Eigen::VectorXd theta_perp_;  // theta* - V V^T theta*
  Eigen::VectorXd sigma_diag_;  // diag(V^T Sigma V)
};

[[nodiscard]] RiskReport exact_risk(const Dataset& data, const Spectrum& spectrum,
                                    const Eigen::VectorXd& theta_star, double noise_var,
                                    double tau);
[[nodiscard]] RiskReport exact_risk(const Dataset& data, const Eigen::MatrixXd& sigma,
                                    const Eigen::VectorXd& theta_star, double noise_var,
                                    double tau);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct McRiskEstimate {
  McEstimate out;
  McEstimate in;
  int num_draws = 0;
};

/// Monte-Carlo estimate of MSE_out and MSE_in by redrawing the noise (and a
/// fresh covariate from the scenario law for MSE_out). The estimator map is
/// formed from an explicit solve of XX^T + n tau I, independent of the SVD.
[[nodiscard]] McRiskEstimate mc_risk_oracle(const Dataset& data, const Scenario& scenario,
                                            double tau, int num_draws, Rng& rng);

struct SweepEntry {
  RiskReport report;
  bool valid = true;
  std::string error;
};

struct TauOptimum {
  double tau = 0.0;
  double mse = 0.0;
  std::size_t index = 0;
};

struct SweepResult {
  std::vector<SweepEntry> grid;
  TauOptimum argmin_out;
  TauOptimum argmin_in;
};

/// Minimum over entries with valid[i]; ties go to the smallest tau.
/// Throws NumericalError when nothing is valid.
[[nodiscard]] TauOptimum select_optimum(std::span<const double> taus,
                                        std::span<const double> values,
                                        const std::vector<bool>& valid);

/// Grid must be nonempty and nondecreasing. Invalid points are kept but
/// excluded from the argmins; an all-invalid grid throws.
[[nodiscard]] SweepResult sweep_tau(const Dataset& data, const Scenario& scenario,
                                    std::span<const double> tau_grid);

enum class TauScale { Log, Linear };

[[nodiscard]] std::vector<double> make_tau_grid(double tau_min, double tau_max, int count,
                                                TauScale scale);

/// Log grid from lambda_{d+1}/10 to 10 lambda_d.
inline constexpr int kDefaultTauCount = 61;
[[nodiscard]] std::vector<double> default_tau_grid(const Spectrum& spectrum,
                                                   int count = kDefaultTauCount);

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
[[nodiscard]] Eigen::MatrixXd haar_orthogonal(int p, Rng& rng);

/// Transforms X -> XQ, theta* -> Q^T theta*, Sigma -> Q^T Sigma Q, recomputes
/// the risk through the dense-covariance path and returns the largest
/// relative discrepancy across B_out, V_out, B_in, V_in.
[[nodiscard]] double rotation_invariance_check(const Dataset& data, const Scenario& scenario,
                                               double tau, const Eigen::MatrixXd& q);
[[nodiscard]] double rotation_invariance_check(const Dataset& data, const Scenario& scenario,
                                               double tau, std::uint64_t orthogonal_seed);

}  // namespace ridgerisk
