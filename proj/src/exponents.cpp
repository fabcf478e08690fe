#include "gw/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gw/errors.hpp"
#include "gw/quantizer.hpp"
#include "gw/util.hpp"

namespace gw {

namespace {

std::vector<double> floor_and_normalize(std::vector<double> q, double floor = 1e-12) {
  double s = 0.0;
  for (double& v : q) {
    v = std::max(v, floor);
    s += v;
  }
  for (double& v : q) v /= s;
  return q;
}

// Evaluations of Phi(lam, qh) = -rho*lam*delta + log sum_x P(x) Z_lam(x)^-rho
// for one fixed source law.
class PhiEval {
 public:
  PhiEval(const FiniteSource& px, const DistortionModel& model, double rho)
      : model_(model), rho_(rho) {
    for (double p : px.pmf) log_p_.push_back(p > 0.0 ? std::log(p) : kNegInf);
  }

  double rho() const { return rho_; }
  const DistortionModel& model() const { return model_; }

  struct Point {
    double value = 0.0;
    std::vector<double> log_z;      // per source symbol
    std::vector<double> q_star;     // maximizing source law
  };

  Point eval(double lam, std::span<const double> log_qh) const {
    const int nx = model_.nx(), nxh = model_.nxh();
    Point pt;
    pt.log_z.assign(nx, 0.0);
    std::vector<double> terms;
    terms.reserve(nx);
    for (int x = 0; x < nx; ++x) {
      double mx = kNegInf;
      for (int xh = 0; xh < nxh; ++xh)
        mx = std::max(mx, log_qh[xh] - lam * model_.d(x, xh));
      double z = 0.0;
      for (int xh = 0; xh < nxh; ++xh)
        z += std::exp(log_qh[xh] - lam * model_.d(x, xh) - mx);
      pt.log_z[x] = mx + std::log(z);
      if (log_p_[x] != kNegInf) terms.push_back(log_p_[x] - rho_ * pt.log_z[x]);
    }
    const double lse = log_sum_exp(terms);
    pt.value = -rho_ * lam * model_.delta + lse;
    pt.q_star.assign(nx, 0.0);
    for (int x = 0; x < nx; ++x)
      if (log_p_[x] != kNegInf)
        pt.q_star[x] = std::exp(log_p_[x] - rho_ * pt.log_z[x] - lse);
    return pt;
  }

  double value_only(double lam, std::span<const double> log_qh) const {
    return eval(lam, log_qh).value;
  }

  // d Phi / d qh(xh) at (lam, qh): -rho * sum_x Q*(x) e^{-lam d(x,xh)} / Z(x).
  std::vector<double> gradient_qh(double lam, const Point& pt) const {
    const int nx = model_.nx(), nxh = model_.nxh();
    std::vector<double> g(nxh, 0.0);
    for (int x = 0; x < nx; ++x) {
      if (pt.q_star[x] == 0.0) continue;
      for (int xh = 0; xh < nxh; ++xh)
        g[xh] -= rho_ * pt.q_star[x] * std::exp(-lam * model_.d(x, xh) - pt.log_z[x]);
    }
    return g;
  }

 private:
  const DistortionModel& model_;
  double rho_;
  std::vector<double> log_p_;
};

std::vector<double> to_logs(std::span<const double> q) {
  std::vector<double> lq(q.size(), kNegInf);
  for (std::size_t i = 0; i < q.size(); ++i)
    if (q[i] > 0.0) lq[i] = std::log(q[i]);
  return lq;
}

double lambda_cap(const DistortionModel& model, const SolverControls& ctl) {
  const double d_scale = std::max(model.max_entry(), 1e-300);
  return ctl.lambda_cap_scale / d_scale;
}

struct LambdaOpt {
  double lam = 0.0;
  PhiEval::Point point;
};

// Dense multiplier grid plus golden refinement of the best bracket. The grid
// covers twelve decades around 1/max(d); endpoints 0 and the cap are included
// so that lossless-style optima (attained in the underflow regime) are exact.
LambdaOpt maximize_over_lambda(const PhiEval& f, std::span<const double> log_qh, double cap,
                               int grid_n = 96) {
  const double d_scale = std::max(f.model().max_entry(), 1e-300);
  std::vector<double> grid{0.0};
  const double lo = 1e-6 / d_scale;
  for (int i = 0; i < grid_n; ++i)
    grid.push_back(lo * std::pow(cap / lo, static_cast<double>(i) / (grid_n - 1)));

  int besti = 0;
  double bestv = -std::numeric_limits<double>::infinity();
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    vals[i] = f.value_only(grid[i], log_qh);
    if (vals[i] > bestv) {
      bestv = vals[i];
      besti = static_cast<int>(i);
    }
  }
  const double a = grid[besti == 0 ? 0 : besti - 1];
  const double b = grid[std::min<std::size_t>(grid.size() - 1, besti + 1)];
  double lam = grid[besti];
  if (b > a)
    lam = golden_max(a, b, [&](double l) { return f.value_only(l, log_qh); }, 90);
  LambdaOpt out;
  out.point = f.eval(lam, log_qh);
  out.lam = lam;
  if (bestv > out.point.value) {
    out.lam = grid[besti];
    out.point = f.eval(out.lam, log_qh);
  }
  return out;
}

void check_strategy_covers(const FiniteSource& px, std::span<const double> qh,
                           const DistortionModel& model) {
  for (int x = 0; x < model.nx(); ++x) {
    if (px.pmf[x] == 0.0) continue;
    double m = std::numeric_limits<double>::infinity();
    for (int xh = 0; xh < model.nxh(); ++xh)
      if (qh[xh] > 0.0) m = std::min(m, model.d(x, xh));
    if (m > model.delta) throw InfiniteExponent(x);
  }
}

double objective_via_rd(const FiniteSource& px, std::span<const double> q_star,
                        std::span<const double> qh, const DistortionModel& model, double rho,
                        const SolverControls& ctl) {
  const RDResult r = mismatched_rd(q_star, qh, model, ctl);
  if (!r.finite) return std::numeric_limits<double>::infinity();
  const ExtReal dkl = divergence(q_star, px.pmf);
  if (!dkl.finite) return std::numeric_limits<double>::infinity();
  return rho * r.value - dkl.value;
}

}  // namespace

ExponentReport iid_strategy_exponent(const FiniteSource& px, const Strategy& qxh,
                                     const DistortionModel& model, double rho,
                                     const SolverControls& ctl) {
  px.validate();
  qxh.validate();
  model.validate();
  if (!(rho > 0.0)) throw RhoOutOfRange("rho must be positive");
  if (px.size() != model.nx() || qxh.size() != model.nxh())
    throw DimensionMismatch("iid_strategy_exponent shape mismatch");
  check_strategy_covers(px, qxh.pmf, model);

  ExponentReport rep;
  rep.outer_witness = qxh.pmf;
  if (model.max_entry() == 0.0) {
    rep.inner_witness = px.pmf;
    return rep;  // every reproduction is in budget; the rate term vanishes
  }
  const PhiEval f(px, model, rho);
  const std::vector<double> lq = to_logs(qxh.pmf);
  const LambdaOpt opt = maximize_over_lambda(f, lq, lambda_cap(model, ctl));
  rep.value = opt.point.value;
  rep.lambda = opt.lam;
  rep.inner_witness = opt.point.q_star;
  rep.bracket_lower = rep.bracket_upper = rep.value;
  rep.witness_residual =
      std::abs(objective_via_rd(px, rep.inner_witness, qxh.pmf, model, rho, ctl) - rep.value);
  rep.converged = rep.witness_residual <= 1e-6;
  return rep;
}

namespace {

struct OuterEval {
  double value = 0.0;
  double lam = 0.0;
  std::vector<double> q_star;
  std::vector<double> grad;      // subgradient of the (convex) outer objective
  double support_lb = 0.0;       // value + min(grad) - <grad, qh>
};

OuterEval eval_outer(const PhiEval& f, const std::vector<double>& qh, double cap) {
  OuterEval e;
  const std::vector<double> lq = to_logs(qh);
  const LambdaOpt opt = maximize_over_lambda(f, lq, cap);
  e.value = opt.point.value;
  e.lam = opt.lam;
  e.q_star = opt.point.q_star;
  e.grad = f.gradient_qh(opt.lam, opt.point);
  double dot = 0.0, mn = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < qh.size(); ++i) {
    dot += e.grad[i] * qh[i];
    mn = std::min(mn, e.grad[i]);
  }
  e.support_lb = e.value + mn - dot;
  return e;
}

struct DescentResult {
  std::vector<double> qh;
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  long iters = 0;
};

DescentResult project_descent(const PhiEval& f, std::vector<double> q, double cap, int iters,
                              double target_gap) {
  DescentResult res;
  res.qh = q;
  std::vector<double> best = q;
  for (int t = 1; t <= iters; ++t) {
    const OuterEval e = eval_outer(f, q, cap);
    ++res.iters;
    if (e.value < res.ub) {
      res.ub = e.value;
      best = q;
    }
    res.lb = std::max(res.lb, e.support_lb);
    if (res.ub - res.lb <= target_gap) break;
    double gmax = 0.0;
    for (double g : e.grad) gmax = std::max(gmax, std::abs(g));
    const double step = 0.25 / (gmax + 1e-12) / std::sqrt(static_cast<double>(t));
    std::vector<double> y(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) y[i] = q[i] - step * e.grad[i];
    q = floor_and_normalize(project_simplex(y));
  }
  res.qh = best;
  return res;
}

// Coordinate polish: golden-section line searches along pairwise mass
// transfers (these directions span the simplex tangent space, and the outer
// objective is convex, so each 1-D slice is unimodal).
double pairwise_polish(const PhiEval& f, std::vector<double>& q, double cap, long& iters) {
  const int n = static_cast<int>(q.size());
  double current = eval_outer(f, q, cap).value;
  ++iters;
  for (int sweep = 0; sweep < 12; ++sweep) {
    double improved = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double lo = -(q[i] - 1e-12), hi = q[j] - 1e-12;
        if (hi - lo < 1e-11) continue;
        auto slice = [&](double t) {
          std::vector<double> trial = q;
          trial[i] += t;
          trial[j] -= t;
          ++iters;
          return -eval_outer(f, floor_and_normalize(std::move(trial), 1e-12), cap).value;
        };
        const double t = golden_max(lo, hi, slice, 48);
        std::vector<double> trial = q;
        trial[i] += t;
        trial[j] -= t;
        trial = floor_and_normalize(std::move(trial), 1e-12);
        const double v = eval_outer(f, trial, cap).value;
        ++iters;
        if (v < current - 1e-14) {
          improved += current - v;
          current = v;
          q = std::move(trial);
        }
      }
    }
    if (improved < 1e-13) break;
  }
  return current;
}

std::vector<std::vector<double>> outer_seeds(const FiniteSource& px, const DistortionModel& model,
                                             double rho, const PhiEval& f, double cap) {
  const int nxh = model.nxh();
  std::vector<std::vector<double>> seeds;
  seeds.push_back(std::vector<double>(nxh, 1.0 / nxh));
  // One-shot optimum as a warm start: tilted law of the greedy quantizer's output.
  const BallIndex balls = build_ball_index(model);
  const Quantizer gq = greedy_quantizer(px, balls);
  seeds.push_back(floor_and_normalize(tilted_strategy(pushforward(px, gq, nxh), rho).pmf));
  if (nxh == 2 || nxh == 3) {
    // Coarse simplex grid (step 0.02), best point only.
    std::vector<std::vector<double>> grid_pts;
    const int steps = 50;
    for (int i = 0; i <= steps; ++i) {
      const double a = static_cast<double>(i) / steps;
      if (nxh == 2) {
        grid_pts.push_back({a, 1.0 - a});
      } else {
        for (int j = 0; i + j <= steps; ++j) {
          const double b = static_cast<double>(j) / steps;
          grid_pts.push_back({a, b, 1.0 - a - b});
        }
      }
    }
    double bestv = std::numeric_limits<double>::infinity();
    std::vector<double> bestq;
    for (auto& g : grid_pts) {
      auto q = floor_and_normalize(std::move(g));
      const double v = eval_outer(f, q, cap).value;
      if (v < bestv) {
        bestv = v;
        bestq = std::move(q);
      }
    }
    if (!bestq.empty()) seeds.push_back(bestq);
  }
  std::mt19937_64 rng(0x5EEDF00DULL);
  std::exponential_distribution<double> ed(1.0);
  for (int r = 0; r < 6; ++r) {
    std::vector<double> q(nxh);
    for (double& v : q) v = ed(rng);
    seeds.push_back(floor_and_normalize(std::move(q)));
  }
  return seeds;
}

}  // namespace

ExponentReport optimal_iid_exponent(const FiniteSource& px, const DistortionModel& model,
                                    double rho, const SolverControls& ctl, int max_alphabet) {
  px.validate();
  model.validate();
  if (!(rho > 0.0)) throw RhoOutOfRange("rho must be positive");
  if (model.nx() > max_alphabet || model.nxh() > max_alphabet)
    throw InstanceTooLarge("optimal_iid_exponent alphabets capped at " +
                           std::to_string(max_alphabet));
  build_ball_index(model);  // rejects empty balls up front

  ExponentReport rep;
  if (model.max_entry() == 0.0) {
    rep.inner_witness = px.pmf;
    rep.outer_witness.assign(model.nxh(), 1.0 / model.nxh());
    return rep;
  }
  const PhiEval f(px, model, rho);
  const double cap = lambda_cap(model, ctl);

  DescentResult best;
  for (auto& seed : outer_seeds(px, model, rho, f, cap)) {
    DescentResult r = project_descent(f, seed, cap, 400, 1e-6);
    rep.iterations += r.iters;
    if (r.ub < best.ub) {
      const double lb_keep = std::max(best.lb, r.lb);
      best = std::move(r);
      best.lb = lb_keep;
    } else {
      best.lb = std::max(best.lb, r.lb);
    }
  }
  DescentResult refine = project_descent(f, best.qh, cap, 2500, 1e-6);
  rep.iterations += refine.iters;
  best.lb = std::max(best.lb, refine.lb);
  if (refine.ub < best.ub) best.qh = refine.qh;
  best.ub = std::min(best.ub, refine.ub);

  std::vector<double> q = best.qh;
  const double polished = pairwise_polish(f, q, cap, rep.iterations);
  if (polished < best.ub) {
    best.ub = polished;
    best.qh = q;
  }
  const OuterEval fin = eval_outer(f, best.qh, cap);
  best.lb = std::max(best.lb, fin.support_lb);

  rep.value = best.ub;
  rep.outer_witness = best.qh;
  rep.inner_witness = fin.q_star;
  rep.lambda = fin.lam;
  rep.bracket_lower = best.lb;
  rep.bracket_upper = best.ub;
  rep.converged = (best.ub - best.lb) <= 1e-4;
  rep.witness_residual =
      std::abs(objective_via_rd(px, rep.inner_witness, rep.outer_witness, model, rho, ctl) -
               rep.value);
  return rep;
}

namespace {

struct InnerMin {
  double value = 0.0;
  std::vector<double> qh;
  double fw_gap = 0.0;
  long iters = 0;
};

// min over qh of Phi(lam, qh): multiplicative fixed-point with damping. The
// Frank-Wolfe gap rho*(max_xh g - <qh, g>) certifies optimality of the convex
// minimization.
InnerMin minimize_qh(const PhiEval& f, double lam, std::vector<double> q0, long max_iters) {
  const int nxh = static_cast<int>(q0.size());
  const int nx = f.model().nx();
  InnerMin res;
  std::vector<double> q = floor_and_normalize(std::move(q0));
  PhiEval::Point pt = f.eval(lam, to_logs(q));
  double gamma = 1.0;
  for (long it = 0; it < max_iters; ++it) {
    ++res.iters;
    std::vector<double> g(nxh, 0.0);
    for (int x = 0; x < nx; ++x) {
      if (pt.q_star[x] == 0.0) continue;
      for (int xh = 0; xh < nxh; ++xh)
        g[xh] += pt.q_star[x] * std::exp(-lam * f.model().d(x, xh) - pt.log_z[x]);
    }
    double dot = 0.0, gmax = 0.0;
    for (int xh = 0; xh < nxh; ++xh) {
      dot += q[xh] * g[xh];
      gmax = std::max(gmax, g[xh]);
    }
    res.fw_gap = f.rho() * std::max(0.0, gmax - dot);
    if (res.fw_gap <= 1e-13 * std::max(1.0, std::abs(pt.value))) break;
    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      std::vector<double> trial(nxh);
      for (int xh = 0; xh < nxh; ++xh) trial[xh] = q[xh] * std::pow(g[xh] / dot, gamma);
      trial = floor_and_normalize(std::move(trial));
      PhiEval::Point tp = f.eval(lam, to_logs(trial));
      if (tp.value <= pt.value + 1e-15 * std::abs(pt.value)) {
        q = std::move(trial);
        pt = std::move(tp);
        accepted = true;
        gamma = std::min(1.0, gamma * 1.4);
      } else {
        gamma *= 0.5;
      }
    }
    if (!accepted) break;
  }
  res.value = pt.value;
  res.qh = q;
  return res;
}

}  // namespace

namespace {

// Tighten an inner minimizer by golden-section pairwise transfers at fixed
// multiplier; returns the final value and Frank-Wolfe gap.
InnerMin polish_qh(const PhiEval& f, double lam, std::vector<double> q, long& iters) {
  const int n = static_cast<int>(q.size());
  double current = f.eval(lam, to_logs(q)).value;
  for (int sweep = 0; sweep < 10; ++sweep) {
    double improved = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double lo = -(q[i] - 1e-12), hi = q[j] - 1e-12;
        if (hi - lo < 1e-12) continue;
        auto slice = [&](double t) {
          std::vector<double> trial = q;
          trial[i] += t;
          trial[j] -= t;
          ++iters;
          return -f.value_only(lam, to_logs(floor_and_normalize(std::move(trial))));
        };
        const double t = golden_max(lo, hi, slice, 60);
        std::vector<double> trial = q;
        trial[i] += t;
        trial[j] -= t;
        trial = floor_and_normalize(std::move(trial));
        const double v = f.value_only(lam, to_logs(trial));
        ++iters;
        if (v < current) {
          improved += current - v;
          current = v;
          q = std::move(trial);
        }
      }
    }
    if (improved < 1e-14) break;
  }
  InnerMin out = minimize_qh(f, lam, q, 200);
  iters += out.iters;
  if (out.value > current) {
    out.value = current;
    out.qh = q;
  }
  return out;
}

}  // namespace

ExponentReport synchronous_exponent(const FiniteSource& px, const DistortionModel& model,
                                    double rho, const SolverControls& ctl) {
  px.validate();
  model.validate();
  if (!(rho > 0.0)) throw RhoOutOfRange("rho must be positive");
  build_ball_index(model);

  ExponentReport rep;
  if (model.max_entry() == 0.0) {
    rep.inner_witness = px.pmf;
    rep.outer_witness.assign(model.nxh(), 1.0 / model.nxh());
    return rep;
  }
  const PhiEval f(px, model, rho);
  const double cap = lambda_cap(model, ctl);
  const double d_scale = std::max(model.max_entry(), 1e-300);

  std::vector<double> grid{0.0};
  const double lo = 1e-6 / d_scale;
  const int grid_n = 96;
  for (int i = 0; i < grid_n; ++i)
    grid.push_back(lo * std::pow(cap / lo, static_cast<double>(i) / (grid_n - 1)));

  std::vector<double> warm(model.nxh(), 1.0 / model.nxh());
  double bestv = -std::numeric_limits<double>::infinity();
  double best_lam = 0.0;
  std::vector<double> best_qh = warm;
  double best_gap = 0.0;
  for (double lam : grid) {
    InnerMin im = minimize_qh(f, lam, warm, 4000);
    rep.iterations += im.iters;
    warm = im.qh;
    if (im.value > bestv) {
      bestv = im.value;
      best_lam = lam;
      best_qh = im.qh;
      best_gap = im.fw_gap;
    }
  }
  // Golden refinement around the best grid multiplier.
  auto idx = std::find(grid.begin(), grid.end(), best_lam) - grid.begin();
  const double a = grid[idx == 0 ? 0 : idx - 1];
  const double b = grid[std::min<std::size_t>(grid.size() - 1, idx + 1)];
  if (b > a) {
    std::vector<double> local = best_qh;
    const double lam = golden_max(
        a, b,
        [&](double l) {
          InnerMin im = minimize_qh(f, l, local, 2000);
          rep.iterations += im.iters;
          local = im.qh;
          return im.value;
        },
        60);
    InnerMin im = minimize_qh(f, lam, local, 4000);
    rep.iterations += im.iters;
    if (im.value > bestv) {
      bestv = im.value;
      best_lam = lam;
      best_qh = im.qh;
      best_gap = im.fw_gap;
    }
  }
  // Final tightening of the inner minimization at the chosen multiplier.
  {
    InnerMin im = polish_qh(f, best_lam, best_qh, rep.iterations);
    if (im.value <= bestv) {
      bestv = im.value;
      best_qh = im.qh;
      best_gap = im.fw_gap;
    }
  }

  rep.value = bestv;
  rep.lambda = best_lam;
  rep.outer_witness = best_qh;
  rep.inner_witness = f.eval(best_lam, to_logs(best_qh)).q_star;
  rep.bracket_lower = rep.bracket_upper = bestv;
  rep.converged = best_gap <= 1e-8 * std::max(1.0, std::abs(bestv));
  {
    const RDResult r = rate_distortion(rep.inner_witness, model, ctl);
    const ExtReal dkl = divergence(rep.inner_witness, px.pmf);
    rep.witness_residual = dkl.finite
                               ? std::abs(rho * r.value - dkl.value - rep.value)
                               : std::numeric_limits<double>::infinity();
  }
  return rep;
}

double iid_penalty(const FiniteSource& px, const DistortionModel& model, double rho,
                   const SolverControls& ctl) {
  return optimal_iid_exponent(px, model, rho, ctl).value -
         synchronous_exponent(px, model, rho, ctl).value;
}

ExponentReport uncertainty_exponent(const std::vector<FiniteSource>& sources,
                                    const DistortionModel& model, double rho,
                                    const SolverControls& ctl) {
  if (sources.empty()) throw Error("uncertainty_exponent: empty source class");
  for (const auto& s : sources) {
    s.validate();
    if (s.size() != model.nx()) throw DimensionMismatch("uncertainty class shape mismatch");
  }
  model.validate();
  build_ball_index(model);

  ExponentReport rep;
  if (model.max_entry() == 0.0) {
    rep.inner_witness = sources.front().pmf;
    rep.outer_witness.assign(model.nxh(), 1.0 / model.nxh());
    return rep;
  }
  std::vector<PhiEval> fs;
  fs.reserve(sources.size());
  for (const auto& s : sources) fs.emplace_back(s, model, rho);
  const double cap = lambda_cap(model, ctl);

  // Same convex outer problem with the classwise max; the subgradient comes
  // from the maximizing class member.
  const auto eval_class = [&](const std::vector<double>& q) {
    OuterEval best;
    best.value = -std::numeric_limits<double>::infinity();
    for (auto& f : fs) {
      OuterEval e = eval_outer(f, q, cap);
      if (e.value > best.value) best = std::move(e);
    }
    return best;
  };

  std::vector<double> q(model.nxh(), 1.0 / model.nxh());
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  std::vector<double> best_q = q;
  for (int t = 1; t <= 2500; ++t) {
    const OuterEval e = eval_class(q);
    ++rep.iterations;
    if (e.value < ub) {
      ub = e.value;
      best_q = q;
    }
    lb = std::max(lb, e.support_lb);
    if (ub - lb <= 1e-6) break;
    double gmax = 0.0;
    for (double g : e.grad) gmax = std::max(gmax, std::abs(g));
    const double step = 0.25 / (gmax + 1e-12) / std::sqrt(static_cast<double>(t));
    std::vector<double> y(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) y[i] = q[i] - step * e.grad[i];
    q = floor_and_normalize(project_simplex(y));
  }
  // Pairwise polish on the classwise objective.
  {
    const int n = static_cast<int>(best_q.size());
    double current = eval_class(best_q).value;
    ++rep.iterations;
    for (int sweep = 0; sweep < 8; ++sweep) {
      double improved = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          const double tlo = -(best_q[i] - 1e-12), thi = best_q[j] - 1e-12;
          if (thi - tlo < 1e-11) continue;
          auto slice = [&](double t) {
            std::vector<double> trial = best_q;
            trial[i] += t;
            trial[j] -= t;
            ++rep.iterations;
            return -eval_class(floor_and_normalize(std::move(trial))).value;
          };
          const double t = golden_max(tlo, thi, slice, 40);
          std::vector<double> trial = best_q;
          trial[i] += t;
          trial[j] -= t;
          trial = floor_and_normalize(std::move(trial));
          const double v = eval_class(trial).value;
          ++rep.iterations;
          if (v < current - 1e-14) {
            improved += current - v;
            current = v;
            best_q = std::move(trial);
          }
        }
      }
      if (improved < 1e-13) break;
    }
    ub = std::min(ub, current);
  }
  const OuterEval fin = eval_class(best_q);
  lb = std::max(lb, fin.support_lb);
  rep.value = ub;
  rep.outer_witness = best_q;
  rep.inner_witness = fin.q_star;
  rep.lambda = fin.lam;
  rep.bracket_lower = lb;
  rep.bracket_upper = ub;
  rep.converged = (ub - lb) <= 1e-4;
  return rep;
}

}  // namespace gw
