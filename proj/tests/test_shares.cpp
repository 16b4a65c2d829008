#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "fct/error.hpp"
#include "fct/shares.hpp"
#include "fct/star_join.hpp"

using namespace fct;

namespace {

double exhaustive_load(std::size_t k, const std::vector<double>& sizes,
                       std::vector<std::size_t>* best_shares = nullptr) {
  double best = INFINITY;
  for (std::size_t x = 1; x <= k; ++x) {
    for (std::size_t y = 1; x * y <= k; ++y) {
      for (std::size_t z = 1; x * y * z <= k; ++z) {
        double v = dimension_load({x, y, z}, sizes);
        if (v < best) {
          best = v;
          if (best_shares) *best_shares = {x, y, z};
        }
      }
    }
  }
  return best;
}

std::size_t product(const std::vector<std::size_t>& v) {
  return std::accumulate(v.begin(), v.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

TEST_SUITE("shares") {
  TEST_CASE("equal dimensions split k evenly") {
    auto real = star_shares(9, {1e4, 1e4, 1e4});
    for (double a : real) CHECK(a == doctest::Approx(std::cbrt(9.0)).epsilon(1e-12));
    CHECK(integerize_shares(real, 9) == std::vector<std::size_t>{2, 2, 2});
    auto plan = plan_shares(9, {1e4, 1e4, 1e4});
    CHECK(plan.shares == std::vector<std::size_t>{2, 2, 2});
    CHECK(plan.tasks() == 8);
  }

  TEST_CASE("single dimension takes all of k") {
    auto real = star_shares(7, {123});
    REQUIRE(real.size() == 1);
    CHECK(real[0] == doctest::Approx(7.0));
    CHECK(integerize_shares(real, 7) == std::vector<std::size_t>{7});
  }

  TEST_CASE("star shares are proportional with product k") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> size(1, 1e6);
    for (int t = 0; t < 200; ++t) {
      std::size_t m = 1 + rng() % 5;
      std::size_t k = 1 + rng() % 500;
      std::vector<double> s(m);
      for (auto& x : s) x = size(rng);
      auto a = star_shares(k, s);
      double prod = 1;
      for (double v : a) prod *= v;
      CHECK(std::abs(prod - double(k)) / double(k) < 1e-9);
      for (std::size_t i = 1; i < m; ++i) {
        CHECK(std::abs(s[i] / a[i] - s[0] / a[0]) / (s[0] / a[0]) < 1e-9);
      }
    }
  }

  TEST_CASE("star shares reject bad input") {
    CHECK_THROWS_AS(star_shares(0, {1, 2}), Error);
    CHECK_THROWS_AS(star_shares(4, {1, 0}), Error);
  }

  TEST_CASE("triangle cost at its own shares") {
    auto sh = triangle_shares(8, 1000, 1000, 1000);
    CHECK(triangle_cost(sh, 1000, 1000, 1000) == doctest::Approx(6000).epsilon(1e-12));
    CHECK(sh.a * sh.b * sh.c == doctest::Approx(8.0).epsilon(1e-12));
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(1, 1e5);
    for (int t = 0; t < 100; ++t) {
      double k = 1 + double(rng() % 1000), r = u(rng), s = u(rng), tt = u(rng);
      auto x = triangle_shares(k, r, s, tt);
      double expect = 3 * std::cbrt(k * r * s * tt);
      CHECK(std::abs(triangle_cost(x, r, s, tt) - expect) / expect < 1e-9);
    }
  }

  TEST_CASE("no point of a grid beats the triangle optimum") {
    const double k = 64, r = 2000, s = 500, t = 8000;
    const double best = triangle_cost(triangle_shares(k, r, s, t), r, s, t);
    for (int i = 1; i <= 50; ++i) {
      for (int j = 1; j <= 50; ++j) {
        double a = 0.25 * i, b = 0.25 * j, c = k / (a * b);
        CHECK(triangle_cost({a, b, c}, r, s, t) >= best * (1 - 1e-12));
      }
    }
  }

  TEST_CASE("integer shares against exhaustive search") {
    std::vector<std::size_t> opt;
    std::vector<double> sizes = {10, 10, 1000};
    double best = exhaustive_load(12, sizes, &opt);
    auto got = plan_shares(12, sizes).shares;
    CHECK(product(got) <= 12);
    CHECK(dimension_load(got, sizes) <= 1.10 * best);
  }

  TEST_CASE("integer shares respect k and stay at least 1") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 300; ++t) {
      std::size_t m = 1 + rng() % 4;
      std::size_t k = 1 + rng() % 200;
      std::vector<double> s(m);
      for (auto& x : s) x = 1 + double(rng() % 100000);
      auto sh = plan_shares(k, s).shares;
      CHECK(product(sh) <= k);
      for (auto v : sh) CHECK(v >= 1);
    }
  }

  TEST_CASE("communication cost") {
    auto c = communication_cost({2, 2, 2}, 1e6, {1e4, 1e4, 1e4});
    CHECK(c.value == doctest::Approx(1'120'000));
    REQUIRE(c.breakdown.size() == 4);
    CHECK(c.breakdown[0] == doctest::Approx(1e6));
    CHECK(c.breakdown[1] == doctest::Approx(40000));
    CHECK(communication_cost({1, 1, 1}, 5, {7, 4, 4}).value == doctest::Approx(20));
    CHECK(communication_cost({2, 2, 2}, 5, {7, 4, 4}).value == doctest::Approx(65));
  }
}

TEST_SUITE("hypercube") {
  TEST_CASE("labels are mixed radix, first digit most significant") {
    Hypercube cube({2, 3, 4});
    CHECK(cube.tasks() == 24);
    CHECK(cube.label({1, 0, 0}) == 12);
    CHECK(cube.digits(23) == std::vector<std::size_t>{1, 2, 3});
    for (std::size_t t = 0; t < cube.tasks(); ++t) CHECK(cube.label(cube.digits(t)) == t);
    CHECK(Hypercube({2, 2, 2}).display(4) == "100");
    CHECK(Hypercube({12, 2}).display(13) == "6.1");
    CHECK(Hypercube(std::vector<std::size_t>{}).display(0) == "0");
  }

  TEST_CASE("digit is the key hash modulo the share") {
    Hypercube cube({2, 2, 2});
    CHECK(cube.digit(0, "a1") == 1);
    CHECK(cube.digit(0, "a2") == 0);
    CHECK(cube.digit(0, "a3") == 1);
    CHECK(cube.digit(0, "a4") == 0);
  }

  TEST_CASE("bad digits throw") {
    Hypercube cube({2, 2});
    CHECK_THROWS_AS(cube.label({2, 0}), Error);
    CHECK_THROWS_AS(cube.label({0}), Error);
  }
}
