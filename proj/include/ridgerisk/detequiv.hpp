#pragma once

#include <Eigen/Dense>
#include <optional>

#include "ridgerisk/spectrum.hpp"

namespace ridgerisk {

/// h(alpha) = 1/alpha - 1 + (1/n) sum_j 1 / (1 + alpha tau / lambda_j).
[[nodiscard]] double alpha_residual(const Spectrum& spectrum, int n, double tau, double alpha);

/// Root of alpha_residual on (1, inf) by bracketed bisection.
/// Throws DomainError("fixed point defined only for positive τ") for tau <= 0.
[[nodiscard]] double solve_alpha(const Spectrum& spectrum, int n, double tau);

/// D <= this makes the approximation formulas meaningless.
inline constexpr double kDegenerateDenominator = 1e-8;

struct ApproxReport {
  double tau = 0.0;
  double alpha = 0.0;
  double denominator = 0.0;  // 1 - (1/n) sum lambda^2 / (lambda + alpha tau)^2
  double b_out_hat = 0.0;
  double v_out_hat = 0.0;
  double b_in_hat = 0.0;
  double v_in_hat = 0.0;
  double v_in_hat_alt = 0.0;
  bool tau_in_range = false;  // inside the regime's validity range
};

[[nodiscard]] ApproxReport approx_risk(const Spectrum& spectrum, const Eigen::VectorXd& theta_star,
                                       int n, double noise_var, double tau);

/// Is tau inside the validity range for the regime?
/// SmallModerate: lambda_{d+1} <= tau <= lambda_d.
/// Large: tau + lambda_{d+1} r_d(Sigma) / n <= lambda_d.
[[nodiscard]] bool tau_in_theorem_range(const Spectrum& spectrum, int n, double tau,
                                        TerRegime regime);

struct OutOrder {
  double bias = 0.0;
  double var = 0.0;
  bool in_range = false;
};

struct InOrder {
  double bias_upper = 0.0;
  double var_upper = 0.0;
  double var_lower = 0.0;
  bool in_range = false;
};

/// Constant-free out-sample skeletons. In the Large regime tau is replaced
/// by tau + lambda_{d+1} r_d(Sigma) / n.
[[nodiscard]] OutOrder order_out(const Spectrum& spectrum, const Eigen::VectorXd& theta_star,
                                 int n, double noise_var, double tau, TerRegime regime);
[[nodiscard]] InOrder order_in(const Spectrum& spectrum, const Eigen::VectorXd& theta_star, int n,
                               double noise_var, double tau, TerRegime regime);

struct TauWindow {
  double lo = 0.0;
  double hi = 0.0;
  bool shifted = false;  // bounds apply to tau + lambda_{d+1} r_d(Sigma) / n
};

struct DnThresholds {
  double cor1 = 0.0;  // sqrt(d/n) min{1, sqrt(d / r_d(Sigma^2))}
  double cor2 = 0.0;  // sqrt(d/n) min{1, sqrt(d / r_d(Sigma))}
  double cor3 = 0.0;  // sqrt(d/n) min{sqrt(d / r_d(Sigma^2)), n / r_d(Sigma)}
  double cor4 = 0.0;  // d / r_d(Sigma)
  double cor3_discriminant = 0.0;  // n sqrt(r_d(Sigma^2)) / (sqrt(d) r_d(Sigma))
  TauWindow cor1_window, cor2_window, cor3_window, cor4_window;
  double n_over_r2 = 0.0;           // n / r_d(Sigma^2)
  double out_gap = 0.0;             // n sqrt(n r_d(Sigma^2)) / r_d(Sigma)^2
  double in_out_ratio_large = 0.0;  // r_d(Sigma)^2 / (n r_d(Sigma^2))
  TerMetrics ter;
};

/// Thresholds on lambda_{d+1}/lambda_d, with the tau windows taken with all
/// unknown constants set to 1.
[[nodiscard]] DnThresholds dn_condition_thresholds(const Spectrum& spectrum, int n);

struct OptimalOrder {
  double mse_out = 0.0;
  double mse_in = 0.0;
  double tau_out = 0.0;
  double tau_in = 0.0;
  [[nodiscard]] double ratio() const { return mse_in / mse_out; }
};

/// Minimal orders of the skeletons over tau. Reduces to the literal table
/// entries when ||theta_{1:d}||^2_{Sigma^{-1}} lambda_d^2 = 1 and sigma^2 = 1.
[[nodiscard]] OptimalOrder optimal_order_prediction(const Spectrum& spectrum,
                                                    const Eigen::VectorXd& theta_star, int n,
                                                    double noise_var, TerRegime regime);

/// Constants for the kappa activation factors. None has a default.
struct KappaConstants {
  std::optional<double> c0;
  std::optional<double> sigma_x;
  std::optional<double> c1;
  std::optional<double> delta1;
  std::optional<double> delta2;
};

enum class KappaKind { SmallModerate, Large };

/// kappa_1 (uses c0, sigma_x, c1, delta1) or kappa_2 (uses delta2).
/// Throws DomainError("κ requires explicit constants") when one is missing.
[[nodiscard]] double kappa(double tau, const Spectrum& spectrum, int n,
                           const KappaConstants& constants, KappaKind kind);

}  // namespace ridgerisk
