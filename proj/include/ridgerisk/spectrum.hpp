#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace ridgerisk {

/// Diagonal covariance Sigma = Diag(lambda_1, ..., lambda_p) together with the
/// spike dimension d. Eigenvalues are kept in nonincreasing order; index 0 is
/// lambda_1.
class Spectrum {
 public:
  /// Sorts the eigenvalues into nonincreasing order. Throws DomainError unless
  /// every eigenvalue is positive and finite and 0 < spike_dim < p.
  Spectrum(std::vector<double> eigenvalues, int spike_dim);

  [[nodiscard]] std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
  [[nodiscard]] double eigenvalue(int index) const { return eigenvalues_.at(index); }
  [[nodiscard]] int dim() const noexcept { return static_cast<int>(eigenvalues_.size()); }
  [[nodiscard]] int spike_dim() const noexcept { return spike_dim_; }

  /// lambda_d, the smallest spiked eigenvalue.
  [[nodiscard]] double last_spike() const noexcept { return eigenvalues_[spike_dim_ - 1]; }
  /// lambda_{d+1}, the largest tail eigenvalue.
  [[nodiscard]] double first_tail() const noexcept { return eigenvalues_[spike_dim_]; }
  [[nodiscard]] std::span<const double> tail() const noexcept {
    return std::span<const double>(eigenvalues_).subspan(spike_dim_);
  }
  [[nodiscard]] std::span<const double> spikes() const noexcept {
    return std::span<const double>(eigenvalues_).first(spike_dim_);
  }

  /// sum_{j>d} lambda_j and sum_{j>d} lambda_j^2, compensated.
  [[nodiscard]] double tail_sum() const noexcept { return tail_sum_; }
  [[nodiscard]] double tail_sum_sq() const noexcept { return tail_sum_sq_; }

  [[nodiscard]] Spectrum scaled(double factor) const;

 private:
  std::vector<double> eigenvalues_;
  int spike_dim_;
  double tail_sum_ = 0.0;
  double tail_sum_sq_ = 0.0;
};

/// lambda_i = 1 for i <= d, rho otherwise.
[[nodiscard]] Spectrum make_two_level_spectrum(int d, int p, double rho);

/// lambda_i = 1 for i <= d, rho for d < i <= (mid_multiplier + 1) d, and
/// tail_factor * rho beyond.
[[nodiscard]] Spectrum make_three_level_spectrum(int d, int p, double rho, int mid_multiplier,
                                                 double tail_factor);

enum class TerRegime { SmallModerate, Large };

[[nodiscard]] std::string_view to_string(TerRegime regime) noexcept;

struct TerMetrics {
  double r_d_sigma = 0.0;     // r_d(Sigma)
  double r_d_sigma_sq = 0.0;  // r_d(Sigma^2)
  double ratio_to_n = 0.0;    // r_d(Sigma) / n
  TerRegime regime = TerRegime::SmallModerate;
};

/// Regime is Large iff r_d(Sigma) >= this multiple of n.
inline constexpr double kLargeTerMultiple = 10.0;

[[nodiscard]] TerMetrics ter_metrics(const Spectrum& spectrum, int n);

/// ||theta_tail||^2_{Sigma_tail} / ||theta_spike||^2_{Sigma_spike^{-1}}.
/// Throws DomainError("undefined sparsity ratio") when the spiked part is zero.
[[nodiscard]] double sparsity_ratio(const Spectrum& spectrum, std::span<const double> theta);

/// ||theta_{1:d}||^2 weighted by Sigma_{1:d}^{-1}.
[[nodiscard]] double spike_signal_norm_sq(const Spectrum& spectrum, std::span<const double> theta);

}  // namespace ridgerisk
