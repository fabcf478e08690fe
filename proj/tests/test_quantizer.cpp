#include <doctest.h>

#include <algorithm>
#include <random>

#include "gw/errors.hpp"
#include "gw/quantizer.hpp"
#include "test_helpers.hpp"

using namespace gw;

TEST_CASE("majorization basics") {
  const std::vector<double> point{1.0, 0.0}, half{0.5, 0.5};
  CHECK(majorizes(point, half).majorizes);
  CHECK_FALSE(majorizes(half, point).majorizes);
  CHECK(majorizes(half, half).majorizes);

  const std::vector<double> q{0.5, 0.3, 0.2}, p{0.4, 0.35, 0.25};
  CHECK(majorizes(q, p).majorizes);
  const MajorizationVerdict bad = majorizes(p, q);
  CHECK_FALSE(bad.majorizes);
  CHECK(bad.first_violated_prefix == 1);

  // Total masses compare one-sidedly (<= on the full prefix as well).
  CHECK(majorizes(std::vector<double>{0.5, 0.5}, std::vector<double>{0.3, 0.3}).majorizes);
  CHECK_FALSE(majorizes(std::vector<double>{0.3, 0.3}, std::vector<double>{0.5, 0.5}).majorizes);

  CHECK_THROWS_AS(majorizes(point, q), LengthMismatch);
  CHECK_THROWS_AS(majorizes(std::vector<double>{-0.1, 1.1}, half), NegativeEntry);
}

TEST_CASE("greedy quantizer collapses when one ball covers everything") {
  Mat d(3, 3);
  for (int x = 0; x < 3; ++x)
    for (int xh = 0; xh < 3; ++xh) d(x, xh) = std::abs(x - xh);
  const DistortionModel m = make_model({"0", "1", "2"}, {"0", "1", "2"}, std::move(d), 1.0);
  const FiniteSource src = gwt::source_from({0.5, 0.3, 0.2});
  const Quantizer q = greedy_quantizer(src, build_ball_index(m));
  CHECK(q.map == std::vector<int>{1, 1, 1});
  const std::vector<double> pf = pushforward(src, q, 3);
  CHECK(pf[1] == doctest::Approx(1.0));
  CHECK(distortion_renyi(src, m, 0.5).value == doctest::Approx(0.0));
}

TEST_CASE("greedy quantizer is the identity for lossless hamming") {
  std::mt19937_64 rng(3);
  const FiniteSource src = gwt::source_from(gwt::random_pmf(rng, 4, 0.05));
  const Quantizer q = greedy_quantizer(src, build_ball_index(hamming_model(4, 0.0)));
  CHECK(q.map == std::vector<int>{0, 1, 2, 3});
  CHECK(pushforward(src, q, 4) == src.pmf);
}

TEST_CASE("greedy tie-break picks the smallest reproduction index") {
  Mat d(2, 2, 0.0);  // every ball covers everything
  const DistortionModel m = make_model({"0", "1"}, {"a", "b"}, std::move(d), 0.0);
  const FiniteSource src = gwt::source_from({0.5, 0.5});
  const Quantizer q = greedy_quantizer(src, build_ball_index(m));
  CHECK(q.map == std::vector<int>{0, 0});
}

TEST_CASE("zero-mass symbols get the smallest feasible reproduction") {
  Mat d(2, 3);
  d(0, 0) = 0.0; d(0, 1) = 0.0; d(0, 2) = 1.0;
  d(1, 0) = 1.0; d(1, 1) = 0.0; d(1, 2) = 0.0;
  const DistortionModel m = make_model({"0", "1"}, {"a", "b", "c"}, std::move(d), 0.0);
  const FiniteSource src = gwt::source_from({1.0, 0.0});
  const Quantizer q = greedy_quantizer(src, build_ball_index(m));
  CHECK(q.map[1] == 1);  // smallest index in the ball {b, c}
}

TEST_CASE("renyi entropy closed forms") {
  for (double alpha : {0.25, 0.5, 2.0, 5.0}) {
    CHECK(renyi_entropy(std::vector<double>{0.2, 0.2, 0.2, 0.2, 0.2}, alpha) ==
          doctest::Approx(std::log(5.0)).epsilon(1e-12));
    CHECK(renyi_entropy(std::vector<double>{0.0, 1.0, 0.0}, alpha) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
  const double h = renyi_entropy(std::vector<double>{0.75, 0.25}, 0.5);
  CHECK(h == doctest::Approx(2.0 * std::log(std::sqrt(0.75) + std::sqrt(0.25))).epsilon(1e-13));
  CHECK(h == doctest::Approx(0.62378).epsilon(2e-4));
  // continuity near alpha = 1/2
  CHECK(renyi_entropy(std::vector<double>{0.75, 0.25}, 0.5 + 1e-6) == doctest::Approx(h).epsilon(1e-5));
  CHECK(renyi_entropy(std::vector<double>{0.75, 0.25}, 0.5 - 1e-6) == doctest::Approx(h).epsilon(1e-5));

  CHECK_THROWS_AS(renyi_entropy(std::vector<double>{0.5, 0.5}, 1.0), AlphaOutOfRange);
  CHECK_THROWS_AS(renyi_entropy(std::vector<double>{0.5, 0.5}, 0.0), AlphaOutOfRange);
  CHECK_THROWS_AS(renyi_entropy(std::vector<double>{0.5, 0.5}, -2.0), AlphaOutOfRange);
}

TEST_CASE("distortion renyi rejects alpha outside (0,1)") {
  const FiniteSource src = gwt::source_from({0.75, 0.25});
  CHECK_THROWS_AS(distortion_renyi(src, hamming_model(2, 0.0), 1.5), AlphaOutOfRange);
  // but the greedy value is still available as an upper bound
  CHECK(greedy_renyi_upper(src, hamming_model(2, 0.0), 1.5) ==
        doctest::Approx(renyi_entropy(src.pmf, 1.5)));
}

TEST_CASE("lossless hamming distortion renyi equals the plain renyi entropy") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const FiniteSource src = gwt::source_from(gwt::random_pmf(rng, 4, 0.02));
    for (double alpha : {0.25, 0.5, 0.75})
      CHECK(distortion_renyi(src, hamming_model(4, 0.0), alpha).value ==
            doctest::Approx(renyi_entropy(src.pmf, alpha)).epsilon(1e-13));
  }
}

TEST_CASE("greedy output law majorizes every feasible quantizer and matches the oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const int nx = 2 + static_cast<int>(rng() % 4);
    const int nxh = 2 + static_cast<int>(rng() % 4);
    const DistortionModel m = gwt::random_model(rng, nx, nxh);
    const FiniteSource src = gwt::source_from(gwt::random_pmf(rng, nx));
    const BallIndex balls = build_ball_index(m);
    const Quantizer greedy = greedy_quantizer(src, balls);
    const std::vector<double> gpf = pushforward(src, greedy, nxh);

    gwt::for_each_feasible_map(balls, [&](const std::vector<int>& map) {
      const std::vector<double> pf = pushforward(src, Quantizer{map}, nxh);
      CHECK(majorizes(gpf, pf, 1e-12).majorizes);
    });

    for (double alpha : {0.25, 0.5, 0.75}) {
      const double greedy_h = renyi_entropy(gpf, alpha);
      const ExhaustiveOracleResult oracle = exhaustive_quantizer_oracle(src, m, alpha);
      CHECK(greedy_h <= oracle.value + 1e-12);
      CHECK(greedy_h == doctest::Approx(oracle.value).epsilon(1e-12));
    }

    // pushforwards of sampled feasible random channels are also dominated
    for (int s = 0; s < 50; ++s) {
      const Channel c = gwt::random_feasible_channel(rng, balls);
      const std::vector<double> law = output_marginal(src.pmf, c);
      CHECK(majorizes(gpf, law, 1e-12).majorizes);
      CHECK(renyi_entropy(gpf, 0.5) <= renyi_entropy(law, 0.5) + 1e-12);
    }
  }
}

TEST_CASE("exhaustive oracle trivia") {
  std::mt19937_64 rng(23);
  // any constant map is feasible when delta dominates every entry
  const DistortionModel big = gwt::saturated_model(rng, 3, 3);
  const FiniteSource src = gwt::source_from(gwt::random_pmf(rng, 3));
  CHECK(exhaustive_quantizer_oracle(src, big, 0.5).value == doctest::Approx(0.0));
  // lossless binary: only the identity map is feasible
  const FiniteSource b = gwt::source_from({0.75, 0.25});
  const ExhaustiveOracleResult r = exhaustive_quantizer_oracle(b, hamming_model(2, 0.0), 0.5);
  CHECK(r.enumerated == 1);
  CHECK(r.value == doctest::Approx(0.62378).epsilon(2e-4));
}

TEST_CASE("exhaustive oracle parallel equals serial bit for bit") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const DistortionModel m = gwt::random_model(rng, 5, 5);
    const FiniteSource src = gwt::source_from(gwt::random_pmf(rng, 5));
    const ExhaustiveOracleResult par = exhaustive_quantizer_oracle(src, m, 0.5);
    const ExhaustiveOracleResult ser = exhaustive_quantizer_oracle_serial(src, m, 0.5);
    CHECK(par.value == ser.value);
    CHECK(par.argmin.map == ser.argmin.map);
  }
}

TEST_CASE("exhaustive oracle enforces its cap") {
  std::mt19937_64 rng(31);
  const DistortionModel m = gwt::random_model(rng, 10, 10, 1.0, 1.0);
  const FiniteSource src = gwt::source_from(gwt::random_pmf(rng, 10));
  CHECK_THROWS_AS(exhaustive_quantizer_oracle(src, m, 0.5, 1000), InstanceTooLarge);
}

TEST_CASE("schur concavity: majorizing laws have smaller renyi entropy") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 3 + static_cast<int>(rng() % 5);
    std::vector<double> p = gwt::random_pmf(rng, m);
    std::vector<double> q = p;
    // transfers from poorer to richer entries make q dominate p
    for (int k = 0; k < 3; ++k) {
      int i = static_cast<int>(rng() % m), j = static_cast<int>(rng() % m);
      if (q[i] < q[j]) std::swap(i, j);
      const double eps = ud(rng) * q[j];
      q[i] += eps;
      q[j] -= eps;
    }
    REQUIRE(majorizes(q, p, 1e-12).majorizes);
    for (double alpha : {0.25, 0.5, 0.75})
      CHECK(renyi_entropy(q, alpha) <= renyi_entropy(p, alpha) + 1e-10);
  }
}

TEST_CASE("distortion renyi is nonincreasing in delta") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    DistortionModel m = gwt::random_model(rng, 4, 4);
    const FiniteSource src = gwt::source_from(gwt::random_pmf(rng, 4));
    DistortionModel wider = m;
    wider.delta += 0.3;
    CHECK(distortion_renyi(src, wider, 0.5).value <=
          distortion_renyi(src, m, 0.5).value + 1e-12);
  }
}

TEST_CASE("greedy quantizer commutes with reproduction relabeling modulo ties") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const int nx = 4, nxh = 4;
    const DistortionModel m = gwt::random_model(rng, nx, nxh);
    const FiniteSource src = gwt::source_from(gwt::random_pmf(rng, nx, 0.01));
    std::vector<int> perm{0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    DistortionModel shuffled = m;
    for (int x = 0; x < nx; ++x)
      for (int xh = 0; xh < nxh; ++xh) shuffled.d(x, perm[xh]) = m.d(x, xh);
    const BallIndex balls = build_ball_index(m);
    const Quantizer a = greedy_quantizer(src, balls);
    const Quantizer b = greedy_quantizer(src, build_ball_index(shuffled));
    // The output law is label-free (ties broken by index can reshuffle the
    // map when two reproductions cover identical residual sets).
    std::vector<double> pa = pushforward(src, a, nxh);
    std::vector<double> pb = pushforward(src, b, nxh);
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    for (int i = 0; i < nxh; ++i) CHECK(pa[i] == doctest::Approx(pb[i]).epsilon(1e-13));

    // With pairwise-distinct balls, exact mass ties have probability zero, so
    // the map itself must be the permuted one.
    bool distinct = true;
    for (int i = 0; i < nxh && distinct; ++i)
      for (int j = i + 1; j < nxh && distinct; ++j)
        if (balls.reverse[i] == balls.reverse[j]) distinct = false;
    if (distinct)
      for (int x = 0; x < nx; ++x) CHECK(b.map[x] == perm[a.map[x]]);
  }
}
