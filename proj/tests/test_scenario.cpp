#include <doctest.h>

#include <cmath>
#include <set>

#include "ridgerisk/error.hpp"
#include "ridgerisk/scenario.hpp"

using namespace ridgerisk;

namespace {

std::span<const double> view(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

TEST_CASE("seed derivation separates streams and indices") {
  std::set<std::uint64_t> seen;
  for (auto stream : {SeedStream::Theta, SeedStream::Replicate, SeedStream::Oracle,
                      SeedStream::Rotation}) {
    for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(42, stream, i));
  }
  CHECK(seen.size() == 400);
  CHECK(derive_seed(1, SeedStream::Replicate, 3) == derive_seed(1, SeedStream::Replicate, 3));
  CHECK(derive_seed(1, SeedStream::Replicate, 3) != derive_seed(2, SeedStream::Replicate, 3));
}

TEST_CASE("sphere samples") {
  Rng rng = make_rng(5, SeedStream::Oracle, 0);
  SUBCASE("one dimension gives +-1") {
    for (int k = 0; k < 20; ++k) CHECK(std::abs(sample_sphere(1, rng)[0]) == 1.0);
  }
  SUBCASE("radius sqrt(p)") {
    for (int p : {2, 9, 100, 1500}) {
      CHECK(sample_sphere(p, rng).squaredNorm() == doctest::Approx(double(p)).epsilon(1e-12));
    }
  }
  SUBCASE("first coordinate has mean zero") {
    const int draws = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int k = 0; k < draws; ++k) {
      const double x = sample_sphere(6, rng)[0];
      sum += x;
      sum_sq += x * x;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
    CHECK(std::abs(mean) <= 5.0 * se);
  }
  CHECK_THROWS_AS((void)sample_sphere(0, rng), DomainError);
}

TEST_CASE("whitened covariates are isotropic") {
  Rng rng = make_rng(9, SeedStream::Oracle, 1);
  const int p = 8;
  Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(p, 1.0, 2.0);
  u.normalize();
  const int draws = 100000;
  double s1 = 0, s1sq = 0, su = 0, susq = 0;
  for (int k = 0; k < draws; ++k) {
    const Eigen::VectorXd z = sample_whitened_covariate(p, rng);
    const double a = z[0] * z[0];
    const double b = std::pow(u.dot(z), 2);
    s1 += a;
    s1sq += a * a;
    su += b;
    susq += b * b;
  }
  const double m1 = s1 / draws, mu = su / draws;
  const double se1 = std::sqrt((s1sq / draws - m1 * m1) / draws);
  const double seu = std::sqrt((susq / draws - mu * mu) / draws);
  CHECK(std::abs(m1 - 1.0) <= 5.0 * se1);
  CHECK(std::abs(mu - 1.0) <= 5.0 * seu);
}

TEST_CASE("theta generator") {
  Rng rng = make_rng(1, SeedStream::Theta, 0);
  SUBCASE("spiked entries are 1/sqrt(d)") {
    const Eigen::VectorXd t = generate_theta(make_two_level_spectrum(4, 30, 0.2), 30, rng);
    for (int j = 0; j < 4; ++j) CHECK(t[j] == 0.5);
  }
  SUBCASE("small and moderate branch") {
    const double rho = 0.37;
    const Spectrum s = make_two_level_spectrum(5, 1500, rho);
    const Eigen::VectorXd t = generate_theta(s, 1500, rng);
    CHECK(sparsity_ratio(s, view(t)) == doctest::Approx(0.01 * rho * rho).epsilon(1e-10));
    CHECK(spike_signal_norm_sq(s, view(t)) * std::pow(s.last_spike(), 2) ==
          doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("large branch") {
    const Spectrum s = make_two_level_spectrum(5, 1500, 0.02);
    const int n = 50;
    REQUIRE(ter_metrics(s, n).regime == TerRegime::Large);
    const Eigen::VectorXd t = generate_theta(s, n, rng);
    const double scale = 1.0 / s.last_spike() + n / s.tail_sum();
    CHECK(sparsity_ratio(s, view(t)) == doctest::Approx(0.01 / (scale * scale)).epsilon(1e-10));
  }
}

TEST_CASE("datasets") {
  const Scenario sc = make_scenario(make_two_level_spectrum(3, 40, 0.1), 25, 0.5, 77);

  SUBCASE("response is design times theta plus retained noise") {
    const Dataset data = generate_dataset(sc, 0);
    CHECK((data.y() - data.x() * sc.theta_star - data.noise()).norm() <= 1e-12 * data.y().norm());
    CHECK(data.n() == 25);
    CHECK(data.p() == 40);
  }
  SUBCASE("noiseless data is exact") {
    Scenario quiet = sc;
    quiet.noise_var = 0.0;
    const Dataset data = generate_dataset(quiet, 2);
    CHECK(data.noise().isZero(0.0));
    const Eigen::VectorXd fitted = data.x() * quiet.theta_star;
    CHECK(data.y() == fitted);
  }
  SUBCASE("bit-identical regeneration") {
    const Dataset a = generate_dataset(sc, 4);
    const Dataset b = generate_dataset(sc, 4);
    CHECK(a.x() == b.x());
    CHECK(a.y() == b.y());
    const Dataset c = generate_dataset(sc, 5);
    CHECK(a.x() != c.x());
  }
  SUBCASE("covariate columns scale with the eigenvalues") {
    const Scenario big = make_scenario(make_two_level_spectrum(1, 3, 0.04), 20000, 0.0, 3);
    const Dataset data = generate_dataset(big, 0);
    const double v0 = data.x().col(0).squaredNorm() / 20000.0;
    const double v2 = data.x().col(2).squaredNorm() / 20000.0;
    CHECK(v0 == doctest::Approx(1.0).epsilon(0.05));
    CHECK(v2 == doctest::Approx(0.04).epsilon(0.05));
  }
  CHECK_THROWS_AS((void)generate_dataset(sc, -1), DomainError);
}

TEST_CASE("thin svd reconstructs wide and tall designs") {
  Rng rng = make_rng(2, SeedStream::Oracle, 3);
  std::normal_distribution<double> g;
  for (auto [n, p] : {std::pair{7, 19}, std::pair{19, 7}, std::pair{12, 12}}) {
    Eigen::MatrixXd x(n, p);
    for (int j = 0; j < p; ++j) {
      for (int i = 0; i < n; ++i) x(i, j) = g(rng);
    }
    const ThinSvd svd = thin_svd(x);
    const int r = std::min(n, p);
    CHECK(svd.u.cols() == r);
    CHECK(svd.v.cols() == r);
    const Eigen::MatrixXd rebuilt = svd.u * svd.singular_values.asDiagonal() * svd.v.transpose();
    CHECK((rebuilt - x).norm() <= 1e-8 * x.norm());
    CHECK((svd.v.transpose() * svd.v - Eigen::MatrixXd::Identity(r, r)).norm() <= 1e-12);
  }
}

TEST_CASE("scenario validation") {
  Scenario sc = make_scenario(make_two_level_spectrum(1, 4, 0.5), 10, 1.0, 1);
  sc.theta_star.resize(3);
  CHECK_THROWS_AS(sc.validate(), DomainError);
  CHECK_THROWS_AS((void)make_scenario(make_two_level_spectrum(1, 4, 0.5), 0, 1.0, 1), DomainError);
  CHECK_THROWS_AS((void)make_scenario(make_two_level_spectrum(1, 4, 0.5), 5, -1.0, 1), DomainError);
}
