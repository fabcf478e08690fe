#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "gw/distortion.hpp"
#include "gw/moments.hpp"
#include "gw/rd.hpp"
#include "gw/source.hpp"

namespace gwt {

using namespace gw;

inline std::vector<double> random_pmf(std::mt19937_64& rng, int m, double floor = 0.0) {
  std::exponential_distribution<double> ed(1.0);
  std::vector<double> p(m);
  double s = 0.0;
  for (double& v : p) {
    v = ed(rng) + floor;
    s += v;
  }
  for (double& v : p) v /= s;
  return p;
}

inline FiniteSource source_from(std::vector<double> pmf) {
  FiniteSource s;
  for (std::size_t i = 0; i < pmf.size(); ++i) s.symbols.push_back(std::to_string(i));
  s.pmf = std::move(pmf);
  return s;
}

// Random model whose balls are all nonempty: delta is drawn above the largest
// row minimum.
inline DistortionModel random_model(std::mt19937_64& rng, int nx, int nxh,
                                    double slack_lo = 0.0, double slack_hi = 1.0) {
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  Mat d(nx, nxh);
  for (int x = 0; x < nx; ++x)
    for (int xh = 0; xh < nxh; ++xh) d(x, xh) = ud(rng);
  double need = 0.0, dmax = 0.0;
  for (int x = 0; x < nx; ++x) {
    double row_min = 1e300;
    for (int xh = 0; xh < nxh; ++xh) {
      row_min = std::min(row_min, d(x, xh));
      dmax = std::max(dmax, d(x, xh));
    }
    need = std::max(need, row_min);
  }
  const double u = slack_lo + (slack_hi - slack_lo) * ud(rng);
  const double delta = need + u * std::max(0.0, dmax - need);
  std::vector<std::string> sl, rl;
  for (int i = 0; i < nx; ++i) sl.push_back(std::to_string(i));
  for (int i = 0; i < nxh; ++i) rl.push_back(std::to_string(i));
  return make_model(sl, rl, std::move(d), delta);
}

// Model whose budget strictly dominates every entry: every ball is the whole
// reproduction alphabet, including for block means (which can round a hair
// above the max entry).
inline DistortionModel saturated_model(std::mt19937_64& rng, int nx, int nxh) {
  DistortionModel m = random_model(rng, nx, nxh);
  m.delta = m.max_entry() + 1.0;
  return m;
}

// Visit every feasible deterministic quantizer map.
template <class F>
void for_each_feasible_map(const BallIndex& balls, F&& fn) {
  std::vector<int> pick(balls.nx, 0);
  std::vector<int> map(balls.nx);
  while (true) {
    for (int x = 0; x < balls.nx; ++x) map[x] = balls.forward[x][pick[x]];
    fn(map);
    int slot = balls.nx - 1;
    while (slot >= 0 && ++pick[slot] == static_cast<int>(balls.forward[slot].size())) {
      pick[slot] = 0;
      --slot;
    }
    if (slot < 0) return;
  }
}

// Random channel from the almost-surely-feasible set: each row is a Dirichlet
// law over the ball of x.
inline Channel random_feasible_channel(std::mt19937_64& rng, const BallIndex& balls) {
  std::exponential_distribution<double> ed(1.0);
  Channel c;
  c.v = Mat(balls.nx, balls.nxh, 0.0);
  for (int x = 0; x < balls.nx; ++x) {
    double s = 0.0;
    std::vector<double> w(balls.forward[x].size());
    for (double& v : w) {
      v = ed(rng);
      s += v;
    }
    for (std::size_t i = 0; i < w.size(); ++i) c.v(x, balls.forward[x][i]) = w[i] / s;
  }
  return c;
}

// Reference solver for the constrained channel minimization: quadratic-penalty
// mirror descent on the rows with monotone backtracking. Deliberately
// unrelated to the tilted-family bisection used by the library.
inline double mismatched_rd_pgd(std::span<const double> qx, std::span<const double> qxh,
                                const DistortionModel& model) {
  const int nx = model.nx(), nxh = model.nxh();
  std::vector<double> log_qxh(nxh, -1e300);
  for (int i = 0; i < nxh; ++i)
    if (qxh[i] > 0.0) log_qxh[i] = std::log(qxh[i]);

  const auto distortion_of = [&](const Mat& w) {
    double s = 0.0;
    for (int x = 0; x < nx; ++x)
      for (int xh = 0; xh < nxh; ++xh) s += qx[x] * w(x, xh) * model.d(x, xh);
    return s;
  };
  const auto objective_of = [&](const Mat& w) {
    double f = 0.0;
    for (int x = 0; x < nx; ++x)
      for (int xh = 0; xh < nxh; ++xh)
        if (w(x, xh) > 0.0 && qx[x] > 0.0)
          f += qx[x] * w(x, xh) * (std::log(w(x, xh)) - log_qxh[xh]);
    return f;
  };

  Mat v(nx, nxh, 1.0 / nxh);
  for (double mu : {1e2, 1e4, 1e6, 1e8, 1e10, 1e12}) {
    const auto penalized = [&](const Mat& w) {
      const double viol = std::max(0.0, distortion_of(w) - model.delta);
      return objective_of(w) + mu * viol * viol;
    };
    double cur = penalized(v);
    for (int it = 0; it < 4000; ++it) {
      const double viol = std::max(0.0, distortion_of(v) - model.delta);
      Mat grad(nx, nxh, 0.0);
      for (int x = 0; x < nx; ++x)
        for (int xh = 0; xh < nxh; ++xh)
          grad(x, xh) = std::log(std::max(v(x, xh), 1e-300)) - log_qxh[xh] + 1.0 +
                        2.0 * mu * viol * model.d(x, xh);
      double eta = 1.0;
      bool moved = false;
      for (int bt = 0; bt < 60 && !moved; ++bt, eta *= 0.5) {
        Mat w(nx, nxh, 0.0);
        bool bad = false;
        for (int x = 0; x < nx && !bad; ++x) {
          double z = 0.0;
          for (int xh = 0; xh < nxh; ++xh) {
            w(x, xh) = std::max(v(x, xh), 1e-300) * std::exp(-eta * grad(x, xh));
            z += w(x, xh);
          }
          if (!(z > 0.0) || !std::isfinite(z)) {
            bad = true;
            break;
          }
          for (int xh = 0; xh < nxh; ++xh) w(x, xh) /= z;
        }
        if (bad) continue;
        const double val = penalized(w);
        if (std::isfinite(val) && val <= cur - 1e-16) {
          v = std::move(w);
          cur = val;
          moved = true;
        }
      }
      if (!moved) break;  // stationary for this penalty stage
    }
  }
  // Snap any residual infeasibility by blending toward the cheapest supported
  // column, then report the raw objective.
  const double cur_dist = distortion_of(v);
  if (cur_dist > model.delta) {
    Mat cheap(nx, nxh, 0.0);
    for (int x = 0; x < nx; ++x) {
      int best = -1;
      double bd = 1e300;
      for (int xh = 0; xh < nxh; ++xh)
        if (qxh[xh] > 0.0 && model.d(x, xh) < bd) {
          bd = model.d(x, xh);
          best = xh;
        }
      cheap(x, best) = 1.0;
    }
    const double cheap_dist = distortion_of(cheap);
    if (cheap_dist <= model.delta) {
      const double a = (cur_dist - model.delta) / (cur_dist - cheap_dist);
      for (int x = 0; x < nx; ++x)
        for (int xh = 0; xh < nxh; ++xh) v(x, xh) = (1.0 - a) * v(x, xh) + a * cheap(x, xh);
    }
  }
  return objective_of(v);
}

}  // namespace gwt
