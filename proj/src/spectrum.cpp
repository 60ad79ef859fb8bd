#include "ridgerisk/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "ridgerisk/error.hpp"
#include "ridgerisk/numeric.hpp"

namespace ridgerisk {

Spectrum::Spectrum(std::vector<double> eigenvalues, int spike_dim)
    : eigenvalues_(std::move(eigenvalues)), spike_dim_(spike_dim) {
  const int p = dim();
  if (spike_dim_ <= 0 || spike_dim_ >= p) {
    std::ostringstream msg;
    msg << "spike dimension must satisfy 0 < d < p (d=" << spike_dim_ << ", p=" << p << ")";
    throw DomainError(msg.str());
  }
  for (double v : eigenvalues_) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError("covariance eigenvalues must be positive and finite");
    }
  }
  std::sort(eigenvalues_.begin(), eigenvalues_.end(), std::greater<>());
  tail_sum_ = compensated_sum(tail());
  tail_sum_sq_ = compensated_sum_of(tail(), [](double v) { return v * v; });
}

Spectrum Spectrum::scaled(double factor) const {
  if (!(factor > 0.0)) throw DomainError("spectrum scale factor must be positive");
  std::vector<double> values(eigenvalues_);
  for (double& v : values) v *= factor;
  return Spectrum(std::move(values), spike_dim_);
}

Spectrum make_two_level_spectrum(int d, int p, double rho) {
  if (d <= 0 || d >= p) throw DomainError("two-level spectrum requires 0 < d < p");
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("two-level spectrum requires 0 < rho < 1");
  std::vector<double> values(static_cast<std::size_t>(p), rho);
  std::fill_n(values.begin(), d, 1.0);
  return Spectrum(std::move(values), d);
}

Spectrum make_three_level_spectrum(int d, int p, double rho, int mid_multiplier,
                                   double tail_factor) {
  if (d <= 0 || mid_multiplier < 1) {
    throw DomainError("three-level spectrum requires d > 0 and mid_multiplier >= 1");
  }
  const long long mid_end = static_cast<long long>(d) * (mid_multiplier + 1);
  if (mid_end >= p) {
    throw DomainError("three-level spectrum requires d * (mid_multiplier + 1) < p");
  }
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("three-level spectrum requires 0 < rho < 1");
  if (!(tail_factor > 0.0 && tail_factor <= 1.0)) {
    throw DomainError("three-level spectrum requires tail_factor in (0, 1]");
  }
  std::vector<double> values(static_cast<std::size_t>(p), tail_factor * rho);
  std::fill_n(values.begin(), mid_end, rho);
  std::fill_n(values.begin(), d, 1.0);
  return Spectrum(std::move(values), d);
}

std::string_view to_string(TerRegime regime) noexcept {
  return regime == TerRegime::Large ? "large" : "small_moderate";
}

TerMetrics ter_metrics(const Spectrum& spectrum, int n) {
  if (n < 1) throw DomainError("sample size n must be >= 1");
  const double head = spectrum.first_tail();
  TerMetrics m;
  // Ratios first: a flat tail then sums to an exact integer.
  CompensatedSum rank, rank_sq;
  for (double lambda : spectrum.tail()) {
    const double ratio = lambda / head;
    rank += ratio;
    rank_sq += ratio * ratio;
  }
  m.r_d_sigma = rank.value();
  m.r_d_sigma_sq = rank_sq.value();
  m.ratio_to_n = m.r_d_sigma / n;
  m.regime = m.r_d_sigma >= kLargeTerMultiple * n ? TerRegime::Large : TerRegime::SmallModerate;
  return m;
}

double spike_signal_norm_sq(const Spectrum& spectrum, std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != spectrum.dim()) {
    throw DomainError("coefficient vector length must equal the spectrum dimension");
  }
  CompensatedSum acc;
  for (int j = 0; j < spectrum.spike_dim(); ++j) acc += theta[j] * theta[j] / spectrum.eigenvalue(j);
  return acc.value();
}

double sparsity_ratio(const Spectrum& spectrum, std::span<const double> theta) {
  const double spike = spike_signal_norm_sq(spectrum, theta);
  if (!(spike > 0.0)) throw DomainError("undefined sparsity ratio: spiked part of theta is zero");
  CompensatedSum tail;
  for (int j = spectrum.spike_dim(); j < spectrum.dim(); ++j) {
    tail += spectrum.eigenvalue(j) * theta[j] * theta[j];
  }
  return tail.value() / spike;
}

}  // namespace ridgerisk
