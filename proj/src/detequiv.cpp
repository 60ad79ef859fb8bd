#include "ridgerisk/detequiv.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "ridgerisk/error.hpp"
#include "ridgerisk/numeric.hpp"

namespace ridgerisk {
namespace {

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void check_theta(const Spectrum& spectrum, const Eigen::VectorXd& theta) {
  if (theta.size() != spectrum.dim()) throw DomainError("theta length must equal spectrum dimension");
}

void check_n(int n) {
  if (n < 1) throw DomainError("n must be >= 1");
}

// lambda_{d+1} r_d(Sigma) / n, the effective ridge added by the tail.
double tail_shift(const Spectrum& spectrum, int n) { return spectrum.tail_sum() / n; }

}  // namespace

double alpha_residual(const Spectrum& spectrum, int n, double tau, double alpha) {
  check_n(n);
  const double scaled = alpha * tau;
  CompensatedSum acc;
  for (double lambda : spectrum.eigenvalues()) acc += lambda / (lambda + scaled);
  return 1.0 / alpha - 1.0 + acc.value() / n;
}

double solve_alpha(const Spectrum& spectrum, int n, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw DomainError("fixed point defined only for positive τ");
  }
  check_n(n);
  auto h = [&](double a) { return alpha_residual(spectrum, n, tau, a); };
  double lo = 1.0 + 1e-12;
  double hi = 2.0;
  if (h(lo) <= 0.0) {
    // Huge tau: the root sits within 1e-12 of one.
    hi = lo;
    lo = 1.0;
  } else {
    while (h(hi) > 0.0) {
      lo = hi;
      hi *= 2.0;
      if (!std::isfinite(hi)) throw NumericalError("fixed point bracket diverged");
    }
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (h(mid) > 0.0 ? lo : hi) = mid;
  }
  const double alpha = std::abs(h(lo)) <= std::abs(h(hi)) ? lo : hi;
  return std::max(alpha, std::nextafter(1.0, 2.0));
}

bool tau_in_theorem_range(const Spectrum& spectrum, int n, double tau, TerRegime regime) {
  if (regime == TerRegime::SmallModerate) {
    return spectrum.first_tail() <= tau && tau <= spectrum.last_spike();
  }
  return tau >= 0.0 && tau + tail_shift(spectrum, n) <= spectrum.last_spike();
}

ApproxReport approx_risk(const Spectrum& spectrum, const Eigen::VectorXd& theta_star, int n,
                         double noise_var, double tau) {
  check_theta(spectrum, theta_star);
  if (!(noise_var >= 0.0)) throw DomainError("noise variance must be >= 0");
  ApproxReport r;
  r.tau = tau;
  r.alpha = solve_alpha(spectrum, n, tau);
  const double at = r.alpha * tau;

  CompensatedSum s2, bias;
  const auto lambdas = spectrum.eigenvalues();
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    const double lambda = lambdas[j];
    const double q = 1.0 / (lambda + at);
    s2 += lambda * lambda * q * q;
    const double th = theta_star[static_cast<Eigen::Index>(j)];
    bias += at * at * lambda * th * th * q * q;
  }
  const double s2_mean = s2.value() / n;
  r.denominator = 1.0 - s2_mean;
  if (!(r.denominator > kDegenerateDenominator)) {
    throw NumericalError("deterministic equivalent degenerate");
  }
  // Bias sum carries no 1/n: only then does it tend to ||theta*||^2_Sigma as tau grows.
  r.b_out_hat = bias.value() / r.denominator;
  r.v_out_hat = s2_mean / r.denominator * noise_var;
  r.b_in_hat = r.b_out_hat / (r.alpha * r.alpha);
  r.v_in_hat = (1.0 - 2.0 / r.alpha + 1.0 / (r.alpha * r.alpha * r.denominator)) * noise_var;
  const double shrink = 1.0 - 1.0 / r.alpha;
  r.v_in_hat_alt =
      shrink * shrink * noise_var + s2_mean / (r.alpha * r.alpha * r.denominator) * noise_var;
  r.tau_in_range = tau_in_theorem_range(spectrum, n, tau, ter_metrics(spectrum, n).regime);
  return r;
}

OutOrder order_out(const Spectrum& spectrum, const Eigen::VectorXd& theta_star, int n,
                   double noise_var, double tau, TerRegime regime) {
  check_theta(spectrum, theta_star);
  const TerMetrics ter = ter_metrics(spectrum, n);
  const double signal = spike_signal_norm_sq(spectrum, as_span(theta_star));
  const double lambda = spectrum.first_tail();
  const double d = spectrum.spike_dim();
  const double t = regime == TerRegime::Large ? tau + tail_shift(spectrum, n) : tau;
  OutOrder o;
  o.bias = signal * t * t;
  o.var = noise_var * (d / n + lambda * lambda / (t * t) * ter.r_d_sigma_sq / n);
  o.in_range = tau_in_theorem_range(spectrum, n, tau, regime);
  return o;
}

InOrder order_in(const Spectrum& spectrum, const Eigen::VectorXd& theta_star, int n,
                 double noise_var, double tau, TerRegime regime) {
  check_theta(spectrum, theta_star);
  const TerMetrics ter = ter_metrics(spectrum, n);
  const double signal = spike_signal_norm_sq(spectrum, as_span(theta_star));
  const double lambda = spectrum.first_tail();
  const double d = spectrum.spike_dim();
  const double r = ter.r_d_sigma;
  InOrder o;
  if (regime == TerRegime::Large) {
    const double t = tau + tail_shift(spectrum, n);
    o.bias_upper = signal * t * t;
    o.var_upper = noise_var * (d / n + lambda * lambda / (t * t) * r * r / (double(n) * n));
    o.var_lower = o.var_upper;
  } else {
    const double ratio = lambda * lambda / (tau * tau);
    o.bias_upper = signal * tau * tau;
    o.var_upper = noise_var * (d / n + ratio * r / n);
    o.var_lower = noise_var * (d / n + ratio * r * r / (double(n) * n));
  }
  o.in_range = tau_in_theorem_range(spectrum, n, tau, regime);
  return o;
}

DnThresholds dn_condition_thresholds(const Spectrum& spectrum, int n) {
  check_n(n);
  DnThresholds t;
  t.ter = ter_metrics(spectrum, n);
  const double d = spectrum.spike_dim();
  const double r = t.ter.r_d_sigma;
  const double r2 = t.ter.r_d_sigma_sq;
  const double lam = spectrum.first_tail();
  const double lam_d = spectrum.last_spike();
  const double root_dn = std::sqrt(d / n);

  t.cor1 = root_dn * std::min(1.0, std::sqrt(d / r2));
  t.cor2 = root_dn * std::min(1.0, std::sqrt(d / r));
  t.cor3 = root_dn * std::min(std::sqrt(d / r2), n / r);
  t.cor4 = d / r;
  t.cor3_discriminant = n * std::sqrt(r2) / (std::sqrt(d) * r);

  auto two_case = [&](double rank) {
    if (rank <= d) return TauWindow{lam, lam, false};
    return TauWindow{lam * std::sqrt(rank / d), lam_d * std::min(root_dn, 1.0), false};
  };
  t.cor1_window = two_case(r2);
  t.cor2_window = two_case(r);
  t.cor3_window = t.cor3_discriminant <= 1.0
                      ? TauWindow{0.0, root_dn * lam_d, true}
                      : TauWindow{std::sqrt(r2 / d) * lam, root_dn * lam_d, true};
  t.cor4_window = TauWindow{lam * (r / n) * std::sqrt(n / d), lam_d * root_dn, true};

  t.n_over_r2 = n / r2;
  t.out_gap = n * std::sqrt(n * r2) / (r * r);
  t.in_out_ratio_large = r * r / (n * r2);
  return t;
}

OptimalOrder optimal_order_prediction(const Spectrum& spectrum, const Eigen::VectorXd& theta_star,
                                      int n, double noise_var, TerRegime regime) {
  check_theta(spectrum, theta_star);
  const TerMetrics ter = ter_metrics(spectrum, n);
  const double signal = spike_signal_norm_sq(spectrum, as_span(theta_star));
  if (!(signal > 0.0)) throw DomainError("optimal order needs a nonzero spiked signal");
  const double lam = spectrum.first_tail();
  const double d = spectrum.spike_dim();
  const double r = ter.r_d_sigma;
  const double r2 = ter.r_d_sigma_sq;
  const double dn = noise_var * d / n;
  const double snr = std::sqrt(signal * noise_var);
  const double noise_to_signal = std::sqrt(noise_var / signal);

  OptimalOrder o;
  if (regime == TerRegime::SmallModerate) {
    o.mse_out = std::max(lam * snr * std::sqrt(r2 / n), dn);
    o.tau_out = std::sqrt(lam * noise_to_signal * std::sqrt(r2 / n));
    o.mse_in = std::max(lam * snr, dn);
    o.tau_in = std::sqrt(lam * noise_to_signal);
  } else {
    const double shift = lam * r / n;
    o.mse_out = std::max({lam * snr * std::sqrt(r2 / n), signal * shift * shift, dn});
    o.tau_out = std::max(0.0, std::sqrt(lam * noise_to_signal * std::sqrt(r2 / n)) - shift);
    o.mse_in = std::max(snr * shift, dn);
    o.tau_in = std::max(0.0, std::sqrt(shift * noise_to_signal) - shift);
  }
  return o;
}

double kappa(double tau, const Spectrum& spectrum, int n, const KappaConstants& constants,
             KappaKind kind) {
  check_n(n);
  if (!(tau > 0.0) && kind == KappaKind::SmallModerate) {
    throw DomainError("kappa_1 requires tau > 0");
  }
  auto leak = [](double delta) {
    if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("delta must lie in [0, 1)");
    const double root = std::sqrt(delta);
    return root / (1.0 - root);
  };
  const double lam = spectrum.first_tail();
  double loss = 0.0;
  if (kind == KappaKind::SmallModerate) {
    if (!constants.c0 || !constants.sigma_x || !constants.c1 || !constants.delta1) {
      throw DomainError("κ requires explicit constants");
    }
    const double c0s = *constants.c0 * *constants.sigma_x * *constants.sigma_x;
    const double c1 = *constants.c1;
    const double s1 = leak(*constants.delta1);
    loss = 2.0 * c0s * (2.0 + c1) * lam / tau * (1.0 + 16.0 * (2.0 * c0s + 1.0) * (1.0 + c1) * s1) +
           64.0 * s1;
  } else {
    if (!constants.delta2) throw DomainError("κ requires explicit constants");
    const double s2 = leak(*constants.delta2);
    const double shift = tail_shift(spectrum, n);
    loss = 16.0 * shift / (tau + shift) * (1.0 + 112.0 * s2) + 64.0 * s2;
  }
  return std::max(1.0 - loss, 0.0);
}

}  // namespace ridgerisk
