#include "gw/quantizer.hpp"

#include <algorithm>
#include <cmath>

#include "gw/errors.hpp"
#include "gw/util.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gw {

MajorizationVerdict majorizes(std::span<const double> q, std::span<const double> p, double tol) {
  if (q.size() != p.size()) throw LengthMismatch("majorizes: vectors must have equal length");
  for (double v : q)
    if (!(v >= 0.0)) throw NegativeEntry("majorizes: negative entry in q");
  for (double v : p)
    if (!(v >= 0.0)) throw NegativeEntry("majorizes: negative entry in p");
  std::vector<double> qs(q.begin(), q.end()), ps(p.begin(), p.end());
  std::sort(qs.begin(), qs.end(), std::greater<>());
  std::sort(ps.begin(), ps.end(), std::greater<>());
  double cq = 0.0, cp = 0.0;
  for (std::size_t j = 0; j < qs.size(); ++j) {
    cq += qs[j];
    cp += ps[j];
    if (cp > cq + tol) return {false, static_cast<int>(j + 1)};
  }
  return {true, std::nullopt};
}

Quantizer greedy_quantizer(const FiniteSource& source, const BallIndex& balls) {
  source.validate();
  if (source.size() != balls.nx) throw DimensionMismatch("source/ball index size mismatch");
  const int nx = balls.nx, nxh = balls.nxh;
  std::vector<char> covered(nx, 0);
  std::vector<char> used(nxh, 0);
  std::vector<int> map(nx, -1);
  for (int step = 0; step < nxh; ++step) {
    int best = -1;
    double best_mass = -1.0;
    for (int xh = 0; xh < nxh; ++xh) {
      if (used[xh]) continue;
      double m = 0.0;
      for (int x : balls.reverse[xh])
        if (!covered[x]) m += source.pmf[x];
      if (m > best_mass) {  // strict: smallest index wins ties
        best_mass = m;
        best = xh;
      }
    }
    used[best] = 1;
    for (int x : balls.reverse[best]) {
      if (!covered[x]) {
        covered[x] = 1;
        map[x] = best;
      }
    }
  }
  // Zero-mass symbols still need a feasible image.
  for (int x = 0; x < nx; ++x)
    if (source.pmf[x] == 0.0) map[x] = balls.forward[x].front();
  return {std::move(map)};
}

std::vector<double> pushforward(const FiniteSource& source, const Quantizer& q, int nxh) {
  std::vector<double> pf(nxh, 0.0);
  for (int x = 0; x < source.size(); ++x) pf[q.map[x]] += source.pmf[x];
  return pf;
}

double renyi_entropy(std::span<const double> p, double alpha) {
  if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha))
    throw AlphaOutOfRange("alpha must lie in (0,1) or (1,inf)");
  std::vector<double> terms;
  terms.reserve(p.size());
  for (double v : p) {
    if (!(v >= 0.0)) throw NegativeEntry("renyi_entropy: negative mass");
    if (v > 0.0) terms.push_back(alpha * std::log(v));
  }
  if (terms.empty()) throw Error("renyi_entropy: zero vector");
  return log_sum_exp(terms) / (1.0 - alpha);
}

DistortionRenyiResult distortion_renyi(const FiniteSource& source, const DistortionModel& model,
                                       double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw AlphaOutOfRange("distortion_renyi requires alpha in (0,1); the greedy value is only "
                          "an upper bound for alpha > 1 (see greedy_renyi_upper)");
  const BallIndex balls = build_ball_index(model);
  Quantizer q = greedy_quantizer(source, balls);
  const std::vector<double> pf = pushforward(source, q, balls.nxh);
  return {renyi_entropy(pf, alpha), std::move(q)};
}

double greedy_renyi_upper(const FiniteSource& source, const DistortionModel& model, double alpha) {
  const BallIndex balls = build_ball_index(model);
  const Quantizer q = greedy_quantizer(source, balls);
  return renyi_entropy(pushforward(source, q, balls.nxh), alpha);
}

namespace {

struct MapEnumeration {
  const BallIndex& balls;
  std::uint64_t total;

  explicit MapEnumeration(const BallIndex& b, std::uint64_t cap) : balls(b), total(1) {
    for (const auto& choices : balls.forward) {
      total *= choices.size();
      if (total > cap)
        throw InstanceTooLarge("feasible quantizer count exceeds cap " + std::to_string(cap));
    }
  }

  void decode(std::uint64_t idx, std::vector<int>& map) const {
    for (int x = 0; x < balls.nx; ++x) {
      const auto& choices = balls.forward[x];
      map[x] = choices[idx % choices.size()];
      idx /= choices.size();
    }
  }
};

struct BlockMin {
  double value = std::numeric_limits<double>::infinity();
  std::uint64_t index = 0;
};

BlockMin scan_block(const MapEnumeration& en, const FiniteSource& source, double alpha,
                    std::uint64_t lo, std::uint64_t hi, std::vector<int>& map,
                    std::vector<double>& pf) {
  BlockMin best;
  for (std::uint64_t i = lo; i < hi; ++i) {
    en.decode(i, map);
    std::fill(pf.begin(), pf.end(), 0.0);
    for (int x = 0; x < source.size(); ++x) pf[map[x]] += source.pmf[x];
    const double h = renyi_entropy(pf, alpha);
    if (h < best.value) {
      best.value = h;
      best.index = i;
    }
  }
  return best;
}

ExhaustiveOracleResult oracle_impl(const FiniteSource& source, const DistortionModel& model,
                                   double alpha, std::uint64_t cap, bool parallel) {
  source.validate();
  const BallIndex balls = build_ball_index(model);
  const MapEnumeration en(balls, cap);

  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t nblocks = (en.total + kBlock - 1) / kBlock;
  std::vector<BlockMin> mins(nblocks);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) if (parallel && nblocks > 1)
#endif
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b) {
    std::vector<int> map(balls.nx);
    std::vector<double> pf(balls.nxh);
    const std::uint64_t lo = static_cast<std::uint64_t>(b) * kBlock;
    const std::uint64_t hi = std::min(en.total, lo + kBlock);
    mins[b] = scan_block(en, source, alpha, lo, hi, map, pf);
  }
  (void)parallel;

  // Combine in block order: strictly smaller value wins, equal value keeps the
  // earlier index. Identical to the serial scan for any thread count.
  BlockMin best = mins.front();
  for (std::size_t b = 1; b < mins.size(); ++b)
    if (mins[b].value < best.value) best = mins[b];

  ExhaustiveOracleResult out;
  out.value = best.value;
  out.enumerated = en.total;
  out.argmin.map.resize(balls.nx);
  en.decode(best.index, out.argmin.map);
  return out;
}

}  // namespace

ExhaustiveOracleResult exhaustive_quantizer_oracle(const FiniteSource& source,
                                                   const DistortionModel& model, double alpha,
                                                   std::uint64_t cap) {
  return oracle_impl(source, model, alpha, cap, true);
}

ExhaustiveOracleResult exhaustive_quantizer_oracle_serial(const FiniteSource& source,
                                                          const DistortionModel& model,
                                                          double alpha, std::uint64_t cap) {
  return oracle_impl(source, model, alpha, cap, false);
}

}  // namespace gw
