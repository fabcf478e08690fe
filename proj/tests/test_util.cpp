#include <doctest.h>

#include <cmath>
#include <random>

#include "gw/util.hpp"

using namespace gw;

TEST_CASE("log_sum_exp matches naive summation") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ud(-40.0, 40.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 37);
    std::vector<double> xs(n);
    long double naive = 0.0L;
    for (double& v : xs) {
      v = ud(rng);
      naive += expl(static_cast<long double>(v));
    }
    CHECK(log_sum_exp(xs) == doctest::Approx(static_cast<double>(logl(naive))).epsilon(1e-13));
  }
}

TEST_CASE("log_sum_exp handles -inf and extremes") {
  std::vector<double> xs{kNegInf, kNegInf};
  CHECK(log_sum_exp(xs) == kNegInf);
  std::vector<double> mixed{kNegInf, 3.0};
  CHECK(log_sum_exp(mixed) == doctest::Approx(3.0));
  std::vector<double> far{-1000.0, 1000.0};
  CHECK(log_sum_exp(far) == doctest::Approx(1000.0));
}

TEST_CASE("project_simplex returns feasible nearest point") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    std::vector<double> y(n);
    for (double& v : y) v = ud(rng);
    const std::vector<double> p = project_simplex(y);
    double s = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    // Optimality: perturbing mass between a positive coordinate and any other
    // cannot get closer to y.
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j || p[i] <= 1e-12) continue;
        const double eps = 1e-7;
        double base = 0.0, moved = 0.0;
        for (int k = 0; k < n; ++k) {
          double pk = p[k];
          if (k == i) pk -= eps;
          if (k == j) pk += eps;
          base += (p[k] - y[k]) * (p[k] - y[k]);
          moved += (pk - y[k]) * (pk - y[k]);
        }
        CHECK(moved >= base - 1e-12);
      }
    }
  }
}

TEST_CASE("counter rng streams are pure functions of (seed, stream, index)") {
  CounterRng a(123, 7);
  std::vector<double> first;
  for (int i = 0; i < 16; ++i) first.push_back(a.next_unit());
  CounterRng b(123, 7);
  for (int i = 0; i < 16; ++i) CHECK(b.next_unit() == first[i]);
  CounterRng c(123, 8);
  bool any_diff = false;
  for (int i = 0; i < 16; ++i) any_diff = any_diff || (c.next_unit() != first[i]);
  CHECK(any_diff);
  CounterRng d(99, 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = d.next_unit();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("golden_max finds the maximum of a smooth unimodal function") {
  const double x = golden_max(0.0, 10.0, [](double t) { return -(t - 3.7) * (t - 3.7); });
  CHECK(x == doctest::Approx(3.7).epsilon(1e-9));
}
