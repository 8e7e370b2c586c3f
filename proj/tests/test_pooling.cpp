#include <doctest.h>

#include <cmath>
#include <random>

#include "calorie/error.hpp"
#include "calorie/pooling.hpp"
#include "pooling_oracle.hpp"

using namespace calorie;
using namespace calorie::pooling;

namespace {

/// One-based inclusive bounds for comparison with the documented layout.
std::vector<std::pair<std::size_t, std::size_t>> one_based(const std::vector<Segment>& segs) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const Segment& s : segs) out.emplace_back(s.begin + 1, s.end);
  return out;
}

}  // namespace

TEST_CASE("segment bounds") {
  using P = std::vector<std::pair<std::size_t, std::size_t>>;
  CHECK(one_based(segment_bounds(8, 2)) == P{{1, 8}, {1, 4}, {5, 8}});
  CHECK(one_based(segment_bounds(8, 3)) == P{{1, 8}, {1, 4}, {5, 8}, {1, 2}, {3, 4}, {5, 6}, {7, 8}});
  CHECK(one_based(segment_bounds(7, 2)) == P{{1, 7}, {1, 3}, {4, 7}});
  CHECK_THROWS_WITH_AS(segment_bounds(3, 3), "window shorter than finest level", Error);
}

TEST_CASE("scalar pooling operators") {
  const std::vector<double> s{1, 3, 2};
  CHECK(pool_max(s, {0, 3}) == 3.0);
  CHECK(pool_sum(s, {0, 3}) == 6.0);
  CHECK(pool_max(std::vector<double>(5, -2.0), {0, 5}) == -2.0);
  CHECK(pool_sum(std::vector<double>(5, 0.0), {0, 5}) == 0.0);
  CHECK_THROWS_AS(pool_max(s, {1, 1}), Error);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-5, 5);
  std::vector<double> r(40);
  for (double& x : r) x = u(rng);
  double m = r[3];
  for (std::size_t t = 3; t < 31; ++t) m = std::max(m, r[t]);
  CHECK(pool_max(r, {3, 31}) == m);
  CHECK(pool_sum(r, {0, 17}) + pool_sum(r, {17, 40}) == doctest::Approx(pool_sum(r, {0, 40})).epsilon(1e-12));
}

TEST_CASE("DCT pooling") {
  SUBCASE("constant series is DC only") {
    const auto d = pool_dct(std::vector<double>(16, 3.0), 2);
    CHECK(d[0] == doctest::Approx(3.0 * 4.0));
    CHECK(d[1] == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("first cosine basis vector") {
    const std::size_t T = 20;
    std::vector<double> s(T);
    for (std::size_t t = 0; t < T; ++t) s[t] = std::cos(M_PI * (2.0 * t + 1.0) / (2.0 * T));
    const auto d = pool_dct(s, 2);
    CHECK(std::abs(d[0]) < 1e-12);
    CHECK(d[1] == doctest::Approx(std::sqrt(T / 2.0)));
  }
  SUBCASE("coefficients beyond the length are zero") {
    const auto d = pool_dct(std::vector<double>{1.0, 2.0, 3.0}, 8);
    REQUIRE(d.size() == 8);
    for (std::size_t k = 3; k < 8; ++k) CHECK(d[k] == 0.0);
  }
  SUBCASE("Parseval on full-length coefficients") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n01;
    std::vector<double> s(33);
    double energy = 0.0;
    for (double& x : s) {
      x = n01(rng);
      energy += x * x;
    }
    double coeff = 0.0;
    for (double c : pool_dct(s, 33)) coeff += c * c;
    CHECK(coeff == doctest::Approx(energy).epsilon(1e-12));
  }
  CHECK_THROWS_AS(pool_dct({}, 2), Error);
}

TEST_CASE("pool_window") {
  SUBCASE("layout arithmetic") {
    const PoolingConfig cfg;
    CHECK(cfg.output_length(195) == 13650);
    CHECK(pool_window(Eigen::MatrixXd::Zero(16, 195), cfg).size() == 13650);
  }
  SUBCASE("single max over one level") {
    PoolingConfig cfg{1, true, false, false, 8};
    Eigen::MatrixXd f(3, 1);
    f << 1, 3, 2;
    CHECK(pool_window(f, cfg) == std::vector<double>{3.0});
  }
  SUBCASE("matches the loop implementation") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int trial = 0; trial < 100; ++trial) {
      PoolingConfig cfg;
      cfg.levels = 1 + static_cast<int>(rng() % 3);
      cfg.dct_coefficients = 1 + static_cast<int>(rng() % 10);
      const auto T = static_cast<Eigen::Index>((1 << (cfg.levels - 1)) + rng() % 60);
      const auto N = static_cast<Eigen::Index>(1 + rng() % 8);
      const Eigen::MatrixXd f = Eigen::MatrixXd::NullaryExpr(T, N, [&] { return u(rng); });
      const auto a = pool_window(f, cfg), b = testing::brute_pool(f, cfg);
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9).scale(1.0));
    }
  }
  SUBCASE("time-constant window") {
    Eigen::MatrixXd f(8, 2);
    f.col(0).setConstant(2.0);
    f.col(1).setConstant(-1.0);
    PoolingConfig cfg;
    cfg.dct_coefficients = 2;
    const auto out = pool_window(f, cfg);
    // Segment 0 (length 8): max, sum, dct pairs.
    CHECK(out[0] == 2.0);
    CHECK(out[1] == -1.0);
    CHECK(out[2] == 16.0);
    CHECK(out[3] == -8.0);
    CHECK(out[4] == doctest::Approx(2.0 * std::sqrt(8.0)));
    CHECK(std::abs(out[5]) < 1e-12);
    CHECK(out[6] == doctest::Approx(std::sqrt(8.0)));
    // Level-0 sum equals the sum of the two level-1 sums.
    const std::size_t per_segment = 2 * (1 + 1 + 2);
    CHECK(out[2] == out[per_segment + 2] + out[2 * per_segment + 2]);
  }
  SUBCASE("reordering frames inside a finest segment keeps max and sum") {
    Eigen::MatrixXd f(8, 1);
    f << 1, 5, 2, 7, 3, 3, 9, 0;
    Eigen::MatrixXd g = f;
    std::swap(g(0, 0), g(1, 0));
    PoolingConfig scalar{3, true, true, false, 8};
    CHECK(pool_window(f, scalar) == pool_window(g, scalar));
    PoolingConfig dct{3, false, false, true, 2};
    CHECK(pool_window(f, dct) != pool_window(g, dct));
  }
}
