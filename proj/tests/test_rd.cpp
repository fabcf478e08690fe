#include <doctest.h>

#include <cmath>
#include <random>

#include "gw/errors.hpp"
#include "gw/rd.hpp"
#include "test_helpers.hpp"

using namespace gw;

namespace {

double binary_entropy(double p) { return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p); }

}  // namespace

TEST_CASE("information measures") {
  CHECK(entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}) == doctest::Approx(std::log(4.0)));
  CHECK(entropy(std::vector<double>{1.0, 0.0}) == doctest::Approx(0.0));

  const std::vector<double> p{0.75, 0.25}, u{0.5, 0.5};
  CHECK(divergence(p, p).value == doctest::Approx(0.0));
  const ExtReal d = divergence(p, u);
  REQUIRE(d.finite);
  CHECK(d.value == doctest::Approx(0.13081).epsilon(1e-4));
  CHECK(d.value == doctest::Approx(0.75 * std::log(1.5) + 0.25 * std::log(0.5)).epsilon(1e-13));

  // support mismatch yields the infinity marker, not a float inf
  const ExtReal inf = divergence(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0});
  CHECK_FALSE(inf.finite);

  Channel c;
  c.v = Mat(2, 2);
  c.v(0, 0) = 0.9; c.v(0, 1) = 0.1; c.v(1, 0) = 0.2; c.v(1, 1) = 0.8;
  c.validate();
  CHECK(cond_entropy(c, u) ==
        doctest::Approx(0.5 * binary_entropy(0.9) + 0.5 * binary_entropy(0.2)).epsilon(1e-13));
  const std::vector<double> marg = output_marginal(u, c);
  CHECK(marg[0] == doctest::Approx(0.55));
  CHECK(mutual_info(u, c) == doctest::Approx(entropy(marg) - cond_entropy(c, u)).epsilon(1e-13));
}

TEST_CASE("objective identity: I + D equals the single-sum form") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const int nx = 2 + static_cast<int>(rng() % 3);
    const int nxh = 2 + static_cast<int>(rng() % 3);
    const std::vector<double> qx = gwt::random_pmf(rng, nx);
    const std::vector<double> qxh = gwt::random_pmf(rng, nxh, 0.05);
    Channel v;
    v.v = Mat(nx, nxh);
    for (int x = 0; x < nx; ++x) {
      const std::vector<double> row = gwt::random_pmf(rng, nxh, 0.01);
      for (int xh = 0; xh < nxh; ++xh) v.v(x, xh) = row[xh];
    }
    const ExtReal dkl = divergence(output_marginal(qx, v), qxh);
    REQUIRE(dkl.finite);
    const double lhs = mutual_info(qx, v) + dkl.value;
    double rhs = 0.0;
    for (int x = 0; x < nx; ++x)
      for (int xh = 0; xh < nxh; ++xh)
        if (v.v(x, xh) > 0.0)
          rhs += qx[x] * v.v(x, xh) * (std::log(v.v(x, xh)) - std::log(qxh[xh]));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
  }
}

TEST_CASE("mismatched rate: product channel feasible means zero") {
  std::mt19937_64 rng(67);
  const DistortionModel m = gwt::saturated_model(rng, 3, 3);
  const std::vector<double> qx = gwt::random_pmf(rng, 3);
  const std::vector<double> qxh = gwt::random_pmf(rng, 3, 0.05);
  const RDResult r = mismatched_rd(qx, qxh, m);
  CHECK(r.value == doctest::Approx(0.0));
  CHECK(r.lambda == 0.0);
  for (int x = 0; x < 3; ++x)
    for (int xh = 0; xh < 3; ++xh) CHECK(r.witness.v(x, xh) == doctest::Approx(qxh[xh]));
}

TEST_CASE("mismatched rate: binary symmetric closed form") {
  const std::vector<double> u{0.5, 0.5};
  const RDResult r = mismatched_rd(u, u, hamming_model(2, 0.1));
  CHECK(r.value == doctest::Approx(std::log(2.0) - binary_entropy(0.1)).epsilon(1e-9));
  CHECK(r.value == doctest::Approx(0.36806).epsilon(1e-4));
  CHECK(r.witness.v(0, 1) == doctest::Approx(0.1).epsilon(1e-8));
  CHECK(r.witness.v(1, 0) == doctest::Approx(0.1).epsilon(1e-8));
  CHECK(r.converged);
  CHECK(r.residual <= 1e-9);
}

TEST_CASE("mismatched rate: near-lossless budget recovers the cross entropy") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> qx = gwt::random_pmf(rng, 3, 0.02);
    const std::vector<double> qxh = gwt::random_pmf(rng, 3, 0.05);
    const RDResult r = mismatched_rd(qx, qxh, hamming_model(3, 1e-12));
    double cross = 0.0;
    for (int x = 0; x < 3; ++x) cross -= qx[x] * std::log(qxh[x]);
    CHECK(r.value == doctest::Approx(cross).epsilon(1e-7));
  }
}

TEST_CASE("mismatched rate reports infeasibility with a certificate") {
  const std::vector<double> qx{0.5, 0.5};
  const std::vector<double> qxh{1.0, 0.0};  // support misses symbol 1's only ball
  const RDResult r = mismatched_rd(qx, qxh, hamming_model(2, 0.25));
  CHECK_FALSE(r.finite);
  CHECK(r.blocking_symbol == 1);
}

TEST_CASE("mismatched rate agrees with a projected-gradient reference") {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 12; ++trial) {
    const DistortionModel m = gwt::random_model(rng, 3, 3, 0.05, 0.45);
    const std::vector<double> qx = gwt::random_pmf(rng, 3, 0.02);
    const std::vector<double> qxh = gwt::random_pmf(rng, 3, 0.05);
    const RDResult fast = mismatched_rd(qx, qxh, m);
    const double ref = gwt::mismatched_rd_pgd(qx, qxh, m);
    CHECK(fast.value == doctest::Approx(ref).epsilon(2e-6));
    CHECK(fast.value <= ref + 2e-6);  // the reference cannot beat the exact minimum
  }
}

TEST_CASE("mismatched witness satisfies its own report") {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 40; ++trial) {
    const DistortionModel m = gwt::random_model(rng, 4, 3, 0.05, 0.9);
    const std::vector<double> qx = gwt::random_pmf(rng, 4);
    const std::vector<double> qxh = gwt::random_pmf(rng, 3, 0.04);
    const RDResult r = mismatched_rd(qx, qxh, m);
    REQUIRE(r.finite);
    r.witness.validate(1e-9);
    double dist = 0.0, obj = 0.0;
    for (int x = 0; x < 4; ++x)
      for (int xh = 0; xh < 3; ++xh) {
        dist += qx[x] * r.witness.v(x, xh) * m.d(x, xh);
        if (r.witness.v(x, xh) > 0.0)
          obj += qx[x] * r.witness.v(x, xh) * (std::log(r.witness.v(x, xh)) - std::log(qxh[xh]));
      }
    CHECK(dist <= m.delta + 1e-9);
    CHECK(obj == doctest::Approx(r.value).epsilon(1e-9));
  }
}

TEST_CASE("mismatched rate is nonincreasing in delta and dominates the matched rate") {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 25; ++trial) {
    DistortionModel m = gwt::random_model(rng, 3, 3, 0.1, 0.7);
    const std::vector<double> qx = gwt::random_pmf(rng, 3);
    const std::vector<double> qxh = gwt::random_pmf(rng, 3, 0.05);
    DistortionModel wider = m;
    wider.delta += 0.1;
    CHECK(mismatched_rd(qx, qxh, wider).value <= mismatched_rd(qx, qxh, m).value + 1e-10);
    CHECK(mismatched_rd(qx, qxh, m).value >= rate_distortion(qx, m).value - 1e-8);
  }
}

TEST_CASE("rate-distortion closed forms") {
  const std::vector<double> u{0.5, 0.5};
  for (double delta : {0.05, 0.1, 0.2}) {
    const RDResult r = rate_distortion(u, hamming_model(2, delta));
    CHECK(r.value == doctest::Approx(std::log(2.0) - binary_entropy(delta)).epsilon(1e-7));
  }
  // lossless limit
  std::mt19937_64 rng(89);
  const std::vector<double> qx = gwt::random_pmf(rng, 3, 0.05);
  CHECK(rate_distortion(qx, hamming_model(3, 0.0)).value ==
        doctest::Approx(entropy(qx)).epsilon(1e-7));
  // budget beyond the worst entry
  const DistortionModel wide = gwt::saturated_model(rng, 3, 3);
  CHECK(rate_distortion(qx, wide).value == doctest::Approx(0.0));
}

TEST_CASE("min-over-output-law identity") {
  const std::vector<double> u{0.5, 0.5};
  const MinIdentityReport rep = verify_min_identity(u, hamming_model(2, 0.1));
  CHECK(rep.gap <= 1e-6);
  CHECK(rep.mismatched_min == doctest::Approx(0.36806).epsilon(1e-4));
  CHECK(rep.converged);

  std::mt19937_64 rng(97);
  const DistortionModel wide = gwt::saturated_model(rng, 3, 3);
  const MinIdentityReport flat = verify_min_identity(gwt::random_pmf(rng, 3), wide);
  CHECK(flat.mismatched_min == doctest::Approx(0.0));
  CHECK(flat.rate_distortion_value == doctest::Approx(0.0));

  for (int trial = 0; trial < 30; ++trial) {
    const DistortionModel m = gwt::random_model(rng, 3, 3, 0.05, 0.9);
    const std::vector<double> qx = gwt::random_pmf(rng, 3, 0.01);
    CHECK(verify_min_identity(qx, m).gap <= 1e-6);
  }
}
