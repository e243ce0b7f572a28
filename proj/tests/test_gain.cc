#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "dsse/errors.h"
#include "dsse/gain.h"

using namespace dsse;

namespace {

GainParams params(int bands, double mu, double lambda, double gmin = 0.2, double gmax = 0.8) {
  GainParams p;
  p.mu.assign(static_cast<size_t>(bands), mu);
  p.lambda.assign(static_cast<size_t>(bands), lambda);
  p.gamma_min = gmin;
  p.gamma_max = gmax;
  return p;
}

int frames_to_90_percent(double from, double to, const GainParams& p) {
  GainState st = make_gain_state(1);
  st.prev_gain[0] = from;
  for (int f = 1; f < 1000; ++f) {
    const double g = smooth_gain(std::vector<double>{to}, st, p)[0];
    if (std::abs(g - to) <= 0.1 * std::abs(to - from)) return f;
  }
  return 1000;
}

}  // namespace

TEST_CASE("compute_snr") {
  CHECK(compute_snr(std::vector<double>{2.0}, std::vector<double>{1.0}, 1e-10)[0] == 4.0);
  CHECK(compute_snr(std::vector<double>{0.3}, std::vector<double>{0.3}, 1e-10)[0] ==
        doctest::Approx(1.0));
  const double guarded = compute_snr(std::vector<double>{1.0}, std::vector<double>{0.0}, 1e-10)[0];
  CHECK(std::isfinite(guarded));
  CHECK(guarded == doctest::Approx(1e20));
}

TEST_CASE("compute_raw_gain") {
  const std::vector<double> mu{1.49}, lambda{0.178};
  CHECK(compute_raw_gain(std::vector<double>{4.0}, mu, lambda)[0] ==
        doctest::Approx(0.79215).epsilon(1e-5));
  CHECK(compute_raw_gain(std::vector<double>{1.0}, mu, lambda)[0] == 0.178);
  CHECK(compute_raw_gain(std::vector<double>{1.49}, mu, lambda)[0] == 0.178);
  for (double snr : {1e-6, 0.5, 3.0, 1e9}) {
    CHECK(compute_raw_gain(std::vector<double>{snr}, std::vector<double>{0.0}, lambda)[0] == 1.0);
  }
  // Clamped up to the floor just above the threshold.
  CHECK(compute_raw_gain(std::vector<double>{1.5}, mu, lambda)[0] == 0.178);
}

TEST_CASE("compute_raw_gain is non-increasing in mu") {
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  const std::vector<double> lambda(64, 0.1);
  std::vector<double> snr(64);
  for (auto& v : snr) v = u(rng);
  std::vector<double> prev(64, 2.0);
  for (double mu = 0.0; mu <= 1.5; mu += 0.05) {
    const auto g = compute_raw_gain(snr, std::vector<double>(64, mu), lambda);
    for (size_t k = 0; k < g.size(); ++k) CHECK(g[k] <= prev[k]);
    prev = g;
  }
}

TEST_CASE("gamma_of") {
  CHECK(gamma_of(1.0, 0.2, 0.8) == doctest::Approx(0.8));
  CHECK(gamma_of(0.0, 0.2, 0.8) == doctest::Approx(0.2));
  CHECK(gamma_of(0.5, 0.2, 0.8) == doctest::Approx(0.5));
  CHECK(gamma_of(0.7, 0.2, 0.8) > gamma_of(0.6, 0.2, 0.8));
}

TEST_CASE("smooth_gain") {
  const auto p = params(1, 1.49, 0.178);
  GainState st = make_gain_state(1);
  CHECK(st.prev_gain[0] == 1.0);
  // gamma = 0.2 + 0.6 * 0.178 = 0.3068; G = 1 + 0.3068 * (0.178 - 1) = 0.7478104.
  CHECK(smooth_gain(std::vector<double>{0.178}, st, p)[0] == doctest::Approx(0.7478104).epsilon(1e-9));
  CHECK(st.prev_gain[0] == doctest::Approx(0.7478104).epsilon(1e-9));

  const auto one = params(1, 1.49, 0.178, 1.0, 1.0);
  GainState s1 = make_gain_state(1);
  CHECK(smooth_gain(std::vector<double>{0.42}, s1, one)[0] == doctest::Approx(0.42).epsilon(1e-15));

  GainState fixed = make_gain_state(1);
  fixed.prev_gain[0] = 0.6;
  CHECK(smooth_gain(std::vector<double>{0.6}, fixed, p)[0] == 0.6);
}

TEST_CASE("smooth_gain converges geometrically") {
  const auto p = params(1, 1.0, 0.1);
  GainState st = make_gain_state(1);
  const double target = 0.4;
  const double factor = 1.0 - gamma_of(target, p.gamma_min, p.gamma_max);
  double err = 1.0 - target;
  for (int f = 0; f < 30; ++f) {
    const double g = smooth_gain(std::vector<double>{target}, st, p)[0];
    err *= factor;
    CHECK(std::abs(g - target) == doctest::Approx(err).epsilon(1e-9));
  }
}

TEST_CASE("fast attack, slow release") {
  const auto p = params(1, 1.49, 0.178);
  CHECK(frames_to_90_percent(0.178, 1.0, p) < frames_to_90_percent(1.0, 0.178, p));
}

TEST_CASE("gains stay within [lambda, 1] on random streams") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::exponential_distribution<double> e(0.3);
  for (int trial = 0; trial < 20; ++trial) {
    const int bands = 1 + static_cast<int>(u(rng) * 40);
    GainParams p;
    for (int k = 0; k < bands; ++k) {
      p.mu.push_back(1.5 * u(rng));
      p.lambda.push_back(0.01 + 0.99 * u(rng));
    }
    p.gamma_min = u(rng);
    p.gamma_max = p.gamma_min + (1.0 - p.gamma_min) * u(rng);
    GainState st = make_gain_state(bands);
    for (int f = 0; f < 2000; ++f) {
      std::vector<double> snr(static_cast<size_t>(bands));
      for (auto& v : snr) v = e(rng);
      const auto g = smooth_gain(compute_raw_gain(snr, p.mu, p.lambda), st, p);
      for (int k = 0; k < bands; ++k) {
        CHECK(g[k] >= p.lambda[k]);
        CHECK(g[k] <= 1.0);
      }
    }
  }
}

TEST_CASE("GainParams validation") {
  auto p = params(3, 1.0, 0.5);
  CHECK_NOTHROW(p.validate(3));
  CHECK_THROWS_AS(p.validate(4), ConfigError);
  auto bad = p;
  bad.lambda[0] = 0.0;
  CHECK_THROWS_AS(bad.validate(3), ConfigError);
  bad = p;
  bad.mu[2] = -0.1;
  CHECK_THROWS_AS(bad.validate(3), ConfigError);
  bad = p;
  bad.mu[2] = 1.6;
  CHECK_THROWS_AS(bad.validate(3), ConfigError);
  bad = p;
  bad.gamma_min = 0.9;
  bad.gamma_max = 0.5;
  CHECK_THROWS_AS(bad.validate(3), ConfigError);
}
