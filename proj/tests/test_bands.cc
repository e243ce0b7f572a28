#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "doctest.h"

#include "dsse/bands.h"
#include "dsse/errors.h"

using namespace dsse;

namespace {

// Frozen output of tests/oracles/bark_plan.py for fft_len 256 at 16 kHz.
const std::vector<int> kEdges33 = {0,  1,  2,  3,  4,  5,  6,  7,  8,  9,  10, 12,
                                   14, 16, 18, 20, 22, 24, 26, 28, 31, 34, 38, 42,
                                   47, 53, 59, 66, 74, 83, 92, 103, 115, 129};
const std::vector<int> kEdges2 = {0, 23, 129};
const std::vector<int> kEdges8 = {0, 5, 10, 15, 23, 33, 52, 82, 129};

SpectralFrame random_spectrum(int bins, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  SpectralFrame s(bins);
  for (auto& b : s.bins) b = {g(rng), g(rng)};
  s.update_power();
  return s;
}

}  // namespace

TEST_CASE("bark scale reference points") {
  CHECK(bark(0.0) == 0.0);
  CHECK(bark(1000.0) == doctest::Approx(8.51).epsilon(0.01));
  CHECK(bark(8000.0) > bark(4000.0));
}

TEST_CASE("band plan edges match the independent oracle") {
  CHECK(build_band_plan(256, 16000, 33).edges == kEdges33);
  CHECK(build_band_plan(256, 16000, 2).edges == kEdges2);
  CHECK(build_band_plan(256, 16000, 8).edges == kEdges8);
}

TEST_CASE("band plans partition the half spectrum") {
  for (int fft : {128, 256, 512}) {
    for (int m = 1; m <= fft / 2 + 1; m += (m < 40 ? 1 : 17)) {
      const BandPlan plan = build_band_plan(fft, 16000, m);
      REQUIRE(plan.num_bands() == m);
      CHECK(plan.edges.front() == 0);
      CHECK(plan.edges.back() == fft / 2 + 1);
      for (int k = 0; k < m; ++k) {
        CHECK(plan.width(k) >= 1);
        if (k > 0) CHECK(plan.width(k) >= plan.width(k - 1));
      }
    }
  }
}

TEST_CASE("band plan special cases") {
  const BandPlan one = build_band_plan(256, 16000, 1);
  CHECK(one.edges == std::vector<int>{0, 129});
  const BandPlan all = build_band_plan(256, 16000, 129);
  for (int k = 0; k < 129; ++k) CHECK(all.width(k) == 1);
  CHECK_THROWS_AS(build_band_plan(256, 16000, 0), ConfigError);
  CHECK_THROWS_AS(build_band_plan(256, 16000, 130), ConfigError);
}

TEST_CASE("band centres") {
  const BandPlan plan = build_band_plan(256, 16000, 33);
  for (int k = 0; k < plan.num_bands(); ++k) {
    const double lo = plan.edges[k], hi = plan.edges[k + 1] - 1;
    CHECK(plan.center_bins[k] == doctest::Approx((lo + hi) / 2.0));
    CHECK(plan.centers_hz[k] == doctest::Approx(plan.center_bins[k] * 62.5));
  }
}

TEST_CASE("pool_to_bands") {
  const BandPlan plan = build_band_plan(256, 16000, 33);
  SpectralFrame flat(129);
  for (auto& b : flat.bins) b = {0.0, 1.0};
  flat.update_power();
  for (double v : pool_to_bands(flat, plan)) CHECK(v == doctest::Approx(1.0));

  SpectralFrame zero(129);
  for (double v : pool_to_bands(zero, plan)) CHECK(v == 0.0);

  // Two bins of magnitude 3 and 4: RMS = sqrt(12.5).
  const BandPlan two = build_band_plan(256, 16000, 33);
  SpectralFrame s(129);
  s.bins[10] = 3.0;
  s.bins[11] = 4.0;
  s.update_power();
  REQUIRE(two.edges[10] == 10);
  REQUIRE(two.width(10) == 2);
  CHECK(pool_to_bands(s, two)[10] == doctest::Approx(std::sqrt(12.5)));

  // Bounded by the band's min and max bin magnitude.
  std::mt19937 rng(4);
  for (int t = 0; t < 200; ++t) {
    const auto r = random_spectrum(129, rng);
    const auto pooled = pool_to_bands(r, plan);
    for (int k = 0; k < plan.num_bands(); ++k) {
      double lo = 1e300, hi = 0.0;
      for (int i = plan.edges[k]; i < plan.edges[k + 1]; ++i) {
        lo = std::min(lo, std::abs(r.bins[i]));
        hi = std::max(hi, std::abs(r.bins[i]));
      }
      CHECK(pooled[k] >= lo * (1.0 - 1e-12));
      CHECK(pooled[k] <= hi * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("expand_to_bins: constants and bounds") {
  const BandPlan plan = build_band_plan(256, 16000, 33);
  for (double g : {1.0, 0.178, 0.5}) {
    const std::vector<double> bands(33, g);
    for (double v : expand_to_bins(bands, plan)) CHECK(v == doctest::Approx(g).epsilon(1e-15));
  }
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> g(33);
    for (auto& v : g) v = u(rng);
    const auto [mn, mx] = std::minmax_element(g.begin(), g.end());
    for (double v : expand_to_bins(g, plan)) {
      CHECK(v >= *mn - 1e-15);
      CHECK(v <= *mx + 1e-15);
    }
  }
}

TEST_CASE("expand_to_bins: M=2 ramp evaluated by hand") {
  const BandPlan plan = build_band_plan(256, 16000, 2);
  // Centres at bins 11 and 75.5.
  REQUIRE(plan.center_bins[0] == 11.0);
  REQUIRE(plan.center_bins[1] == 75.5);
  const auto g = expand_to_bins(std::vector<double>{0.2, 1.0}, plan);
  for (int i = 0; i <= 11; ++i) CHECK(g[i] == doctest::Approx(0.2));
  for (int i = 76; i < 129; ++i) CHECK(g[i] == doctest::Approx(1.0));
  for (int i = 12; i < 76; ++i) {
    CHECK(g[i] == doctest::Approx(0.2 + 0.8 * (i - 11) / 64.5));
    CHECK(g[i] > g[i - 1]);
  }
}

TEST_CASE("expand_to_bins preserves monotone order") {
  const BandPlan plan = build_band_plan(256, 16000, 33);
  std::vector<double> inc(33), dec(33);
  for (int k = 0; k < 33; ++k) {
    inc[k] = 0.1 + 0.9 * k / 32.0;
    dec[k] = 1.0 - 0.8 * k / 32.0;
  }
  const auto gi = expand_to_bins(inc, plan), gd = expand_to_bins(dec, plan);
  for (size_t i = 1; i < gi.size(); ++i) {
    CHECK(gi[i] >= gi[i - 1]);
    CHECK(gd[i] <= gd[i - 1]);
  }
}

TEST_CASE("apply_gains scales magnitude and keeps phase") {
  std::mt19937 rng(8);
  const auto s = random_spectrum(129, rng);
  const auto unit = apply_gains(s, std::vector<double>(129, 1.0));
  CHECK(unit.bins == s.bins);
  CHECK(unit.power == s.power);

  const auto half = apply_gains(s, std::vector<double>(129, 0.5));
  for (size_t i = 0; i < s.size(); ++i) {
    CHECK(std::abs(half.bins[i]) == doctest::Approx(0.5 * std::abs(s.bins[i])));
    CHECK(std::abs(std::arg(half.bins[i]) - std::arg(s.bins[i])) <= 1e-12);
    CHECK(half.power[i] == doctest::Approx(0.25 * s.power[i]));
  }
}

TEST_CASE("band_plan_csv") {
  const auto csv = band_plan_csv(build_band_plan(256, 16000, 2));
  CHECK(csv == "band_index,low_bin,high_bin,center_hz\n0,0,22,687.5\n1,23,128,4718.75\n");
}
