#include <doctest.h>

#include <algorithm>
#include <random>

#include "calorie/error.hpp"
#include "calorie/imaging.hpp"
#include "support.hpp"

using namespace calorie;
using namespace calorie::imaging;

namespace {

ScalarGrid brute_median(const ScalarGrid& g, int k) {
  ScalarGrid out(g.rows(), g.cols());
  const int h = k / 2;
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) {
      std::vector<double> w;
      for (int dr = -h; dr <= h; ++dr)
        for (int dc = -h; dc <= h; ++dc)
          w.push_back(g.clamped(static_cast<std::ptrdiff_t>(r) + dr, static_cast<std::ptrdiff_t>(c) + dc));
      std::sort(w.begin(), w.end());
      out(r, c) = w[w.size() / 2];
    }
  return out;
}

}  // namespace

TEST_CASE("normalize_bbox_patch places content by the longer side") {
  ScalarGrid img(300, 300, 1.0);
  SUBCASE("tall box") {
    const NormalizedPatch p = normalize_bbox_patch(img, {10, 10, 120, 240}, 60, 0.0);
    CHECK(p.scale == doctest::Approx(0.25));
    CHECK(p.content_w == 30);
    CHECK(p.content_h == 60);
    CHECK(p.content_x == 15);
    CHECK(p.data(30, 14) == 0.0);
    CHECK(p.data(30, 15) == doctest::Approx(1.0));
    CHECK(p.data(30, 44) == doctest::Approx(1.0));
    CHECK(p.data(30, 45) == 0.0);
  }
  SUBCASE("wide box") {
    const NormalizedPatch p = normalize_bbox_patch(img, {0, 0, 240, 120}, 60, -1.0);
    CHECK(p.content_w == 60);
    CHECK(p.content_h == 30);
    CHECK(p.content_y == 15);
    CHECK(p.data(14, 30) == -1.0);
    CHECK(p.data(45, 30) == -1.0);
  }
  SUBCASE("square box of side M is placed unchanged") {
    std::mt19937_64 rng(3);
    const ScalarGrid src = testing::random_grid(rng, 80, 80);
    const NormalizedPatch p = normalize_bbox_patch(src, {5, 7, 60, 60}, 60, 0.0);
    CHECK(p.scale == 1.0);
    for (std::size_t r = 0; r < 60; ++r)
      for (std::size_t c = 0; c < 60; ++c) CHECK(p.data(r, c) == doctest::Approx(src(r + 7, c + 5)).epsilon(1e-12));
    const NormalizedPatch again = normalize_bbox_patch(p.data, {0, 0, 60, 60}, 60, 0.0);
    CHECK(again.data == p.data);
  }
  SUBCASE("empty region") {
    CHECK_THROWS_WITH_AS(normalize_bbox_patch(img, {400, 400, 10, 10}, 60, 0.0), "empty person region", Error);
  }
}

TEST_CASE("median filter") {
  SUBCASE("constant grid is unchanged") {
    const ScalarGrid g(7, 9, 4.5);
    CHECK(median_filter(g, 5) == g);
  }
  SUBCASE("impulse is removed") {
    ScalarGrid g(5, 5, 0.0);
    g(2, 2) = 100.0;
    CHECK(median_filter(g, 5)(2, 2) == 0.0);
  }
  SUBCASE("matches sorted neighbourhoods") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t rows = 1 + rng() % 12, cols = 1 + rng() % 12;
      const int k = trial % 2 ? 3 : 5;
      const ScalarGrid g = testing::random_grid(rng, rows, cols);
      CHECK(median_filter(g, k) == brute_median(g, k));
    }
    const ScalarGrid g = testing::random_grid(rng, 9, 9);
    CHECK(median_filter(g, 3) == brute_median(g, 3));
  }
  SUBCASE("repeated values") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
      ScalarGrid g(11, 13);
      for (double& x : g.values()) x = static_cast<double>(rng() % 3) - 1.0;
      CHECK(median_filter(g, 5) == brute_median(g, 5));
    }
  }
  SUBCASE("even kernel") { CHECK_THROWS_AS(median_filter(ScalarGrid(3, 3), 4), Error); }
}

TEST_CASE("breath smoothing") {
  std::vector<BreathSample> readings;
  for (int i = 0; i < 40; ++i) readings.push_back({3.0 * i, i % 2 ? 3.0 : 1.0});
  SUBCASE("alternating series averages to 2 in the interior") {
    const auto s = smooth_breaths(readings, 6);
    REQUIRE(s.size() == readings.size());
    for (std::size_t i = 3; i + 3 < s.size(); ++i) CHECK(s[i].kcal_per_min == doctest::Approx(2.0));
    CHECK(s[10].time_s == readings[10].time_s);
  }
  SUBCASE("span 1 is the identity") { CHECK(smooth_breaths(readings, 1) == readings); }
  SUBCASE("constant input is unchanged") {
    std::vector<BreathSample> flat;
    for (int i = 0; i < 25; ++i) flat.push_back({3.0 * i, 2.5});
    for (const auto& s : smooth_breaths(flat, 20)) CHECK(s.kcal_per_min == 2.5);
  }
  SUBCASE("empty input") { CHECK_THROWS_AS(smooth_breaths({}, 20), Error); }
}

TEST_CASE("rate_at_frame interpolates and clamps") {
  const std::vector<BreathSample> s{{0.0, 2.0}, {3.0, 4.0}, {6.0, 1.0}};
  CHECK(rate_at_frame(s, 1.5) == doctest::Approx(3.0));
  CHECK(rate_at_frame(s, -2.0) == 2.0);
  CHECK(rate_at_frame(s, 9.0) == 1.0);
  CHECK(rate_at_frame(s, 3.0) == 4.0);
  double prev = rate_at_frame(s, 0.0);
  for (double t = 0.1; t <= 3.0; t += 0.1) {
    const double v = rate_at_frame(s, t);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK_THROWS_AS(rate_at_frame({}, 1.0), Error);
}

TEST_CASE("fallback person detector finds the nearest blob") {
  DepthImage background(40, 50, 3000);
  DepthImage frame = background;
  for (std::size_t r = 10; r < 30; ++r)
    for (std::size_t c = 20; c < 28; ++c) frame(r, c) = 1800;
  frame(2, 2) = 1000;  // isolated speck below min_area
  DepthBackground bg(40, 50);
  for (int i = 0; i < 5; ++i) bg.add(background);
  const auto box = detect_person(frame, bg.mode());
  REQUIRE(box.has_value());
  CHECK(*box == BoundingBox{20, 10, 8, 20});
  CHECK_FALSE(detect_person(background, bg.mode()).has_value());
}
