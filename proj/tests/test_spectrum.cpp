#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ridgerisk/error.hpp"
#include "ridgerisk/spectrum.hpp"

using namespace ridgerisk;

namespace {

std::vector<double> random_eigenvalues(std::mt19937_64& rng, int p) {
  std::lognormal_distribution<double> law(0.0, 1.5);
  std::vector<double> v(static_cast<std::size_t>(p));
  for (auto& x : v) x = law(rng);
  return v;
}

}  // namespace

TEST_CASE("spectrum sorts and validates") {
  const Spectrum s({0.5, 2.0, 1.0}, 1);
  CHECK(s.eigenvalue(0) == 2.0);
  CHECK(s.eigenvalue(1) == 1.0);
  CHECK(s.eigenvalue(2) == 0.5);
  CHECK(s.last_spike() == 2.0);
  CHECK(s.first_tail() == 1.0);
  CHECK(s.tail().size() == 2);
  CHECK(s.tail_sum() == doctest::Approx(1.5));

  CHECK_THROWS_AS(Spectrum({1.0, 0.0}, 1), DomainError);
  CHECK_THROWS_AS(Spectrum({1.0, -1.0}, 1), DomainError);
  CHECK_THROWS_AS(Spectrum({1.0, NAN}, 1), DomainError);
  CHECK_THROWS_AS(Spectrum({1.0, 0.5}, 0), DomainError);
  CHECK_THROWS_AS(Spectrum({1.0, 0.5}, 2), DomainError);
}

TEST_CASE("two-level spectrum") {
  SUBCASE("smallest legal instance") {
    const Spectrum s = make_two_level_spectrum(1, 2, 0.5);
    CHECK(s.eigenvalue(0) == 1.0);
    CHECK(s.eigenvalue(1) == 0.5);
  }
  SUBCASE("tail ranks equal p - d for any rho") {
    for (double rho : {0.5, 0.9, 1e-4}) {
      const TerMetrics t = ter_metrics(make_two_level_spectrum(5, 1500, rho), 1500);
      CHECK(t.r_d_sigma == doctest::Approx(1495.0).epsilon(1e-13));
      CHECK(t.r_d_sigma_sq == doctest::Approx(1495.0).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS((void)make_two_level_spectrum(0, 5, 0.5), DomainError);
  CHECK_THROWS_AS((void)make_two_level_spectrum(5, 5, 0.5), DomainError);
  CHECK_THROWS_AS((void)make_two_level_spectrum(1, 5, 1.0), DomainError);
  CHECK_THROWS_AS((void)make_two_level_spectrum(1, 5, 0.0), DomainError);
}

TEST_CASE("three-level spectrum") {
  const Spectrum s = make_three_level_spectrum(2, 15000, 0.01, 10, 0.02);
  CHECK(s.eigenvalue(1) == 1.0);
  CHECK(s.eigenvalue(2) == 0.01);
  CHECK(s.eigenvalue(21) == 0.01);
  CHECK(s.eigenvalue(22) == doctest::Approx(0.0002));
  const TerMetrics t = ter_metrics(s, 300);
  // 20 middle eigenvalues plus 14978 at 0.02 of rho.
  CHECK(t.r_d_sigma == doctest::Approx(20.0 + 0.02 * 14978).epsilon(1e-12));
  CHECK(std::abs(t.r_d_sigma - 319.56) <= 0.005);
  CHECK(std::abs(300.0 / t.r_d_sigma_sq - 11.54) <= 0.005);

  SUBCASE("unit tail factor collapses to two levels") {
    const Spectrum three = make_three_level_spectrum(1, 3, 0.5, 1, 1.0);
    const Spectrum two = make_two_level_spectrum(1, 3, 0.5);
    for (int i = 0; i < 3; ++i) CHECK(three.eigenvalue(i) == two.eigenvalue(i));
  }
  CHECK_THROWS_AS((void)make_three_level_spectrum(2, 22, 0.5, 10, 0.02), DomainError);
  CHECK_THROWS_AS((void)make_three_level_spectrum(2, 100, 0.5, 10, 0.0), DomainError);
  CHECK_THROWS_AS((void)make_three_level_spectrum(2, 100, 0.5, 10, 1.5), DomainError);
}

TEST_CASE("ter metrics and regime") {
  SUBCASE("flat spectrum") {
    const Spectrum flat(std::vector<double>(40, 3.0), 1);
    CHECK(ter_metrics(flat, 10).r_d_sigma == doctest::Approx(39.0));
  }
  SUBCASE("large regime iff r_d >= 10 n") {
    const Spectrum s = make_two_level_spectrum(1, 101, 0.5);  // r_d = 100
    CHECK(ter_metrics(s, 10).regime == TerRegime::Large);
    CHECK(ter_metrics(s, 11).regime == TerRegime::SmallModerate);
    CHECK(ter_metrics(s, 10).ratio_to_n == doctest::Approx(10.0));
    CHECK(to_string(TerRegime::Large) == "large");
  }
  SUBCASE("two-level ratio of squared to plain rank over n") {
    const TerMetrics t = ter_metrics(make_two_level_spectrum(2, 15000, 0.001), 300);
    CHECK(std::abs(t.r_d_sigma * t.r_d_sigma / (300.0 * t.r_d_sigma_sq) - 50.0) <= 0.5);
  }
  CHECK_THROWS_AS((void)ter_metrics(make_two_level_spectrum(1, 3, 0.5), 0), DomainError);
}

TEST_CASE("property: squared tail rank never exceeds the tail rank") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dims(2, 300);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = dims(rng);
    const int d = 1 + static_cast<int>(rng() % static_cast<unsigned>(p - 1));
    const Spectrum s(random_eigenvalues(rng, p), d);
    const TerMetrics t = ter_metrics(s, 50);
    CHECK(t.r_d_sigma_sq <= t.r_d_sigma * (1.0 + 1e-14));
    CHECK(t.r_d_sigma_sq >= 1.0 - 1e-14);
  }
}

TEST_CASE("property: tail ranks are scale invariant") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Spectrum s(random_eigenvalues(rng, 60), 4);
    for (double c : {1e-6, 0.3, 17.0, 1e8}) {
      const TerMetrics a = ter_metrics(s, 5);
      const TerMetrics b = ter_metrics(s.scaled(c), 5);
      CHECK(b.r_d_sigma == doctest::Approx(a.r_d_sigma).epsilon(1e-12));
      CHECK(b.r_d_sigma_sq == doctest::Approx(a.r_d_sigma_sq).epsilon(1e-12));
      CHECK(a.regime == b.regime);
    }
  }
}

TEST_CASE("property: two-level ranks equal p - d exactly") {
  for (int p : {2, 7, 100, 1500, 15000}) {
    for (double rho : {0.9, 0.123, 1e-3}) {
      const TerMetrics t = ter_metrics(make_two_level_spectrum(1, p, rho), 1);
      CHECK(t.r_d_sigma == double(p - 1));
      CHECK(t.r_d_sigma_sq == double(p - 1));
    }
  }
}

TEST_CASE("sparsity ratio") {
  const Spectrum s({4.0, 2.0, 0.5, 0.25}, 1);
  SUBCASE("zero tail") {
    const std::vector<double> theta{1.0, 0.0, 0.0, 0.0};
    CHECK(sparsity_ratio(s, theta) == 0.0);
  }
  SUBCASE("matches elementwise summation") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::vector<double> theta(4);
    for (auto& t : theta) t = g(rng);
    const double tail = 2.0 * theta[1] * theta[1] + 0.5 * theta[2] * theta[2] +
                        0.25 * theta[3] * theta[3];
    const double spike = theta[0] * theta[0] / 4.0;
    CHECK(sparsity_ratio(s, theta) == doctest::Approx(tail / spike).epsilon(1e-14));
    CHECK(spike_signal_norm_sq(s, theta) == doctest::Approx(spike).epsilon(1e-15));
  }
  SUBCASE("undefined without a spiked part") {
    const std::vector<double> theta{0.0, 1.0, 0.0, 0.0};
    CHECK_THROWS_WITH_AS((void)sparsity_ratio(s, theta),
                         doctest::Contains("undefined sparsity ratio"), DomainError);
  }
  const std::vector<double> short_theta{1.0};
  CHECK_THROWS_AS((void)sparsity_ratio(s, short_theta), DomainError);
}
