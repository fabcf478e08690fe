#include "gw/rd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gw/errors.hpp"

namespace gw {

void Channel::validate(double tol) const {
  for (int x = 0; x < nx(); ++x) {
    double s = 0.0;
    for (int xh = 0; xh < nxh(); ++xh) {
      if (!(v(x, xh) >= 0.0)) throw NegativeEntry("channel entries must be >= 0");
      s += v(x, xh);
    }
    if (std::abs(s - 1.0) > tol) throw Error("channel row does not sum to 1");
  }
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw NegativeEntry("entropy: negative mass");
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

double cond_entropy(const Channel& v, std::span<const double> p) {
  if (static_cast<int>(p.size()) != v.nx()) throw DimensionMismatch("cond_entropy shape mismatch");
  double h = 0.0;
  for (int x = 0; x < v.nx(); ++x)
    if (p[x] > 0.0) h += p[x] * entropy(v.v.row(x));
  return h;
}

std::vector<double> output_marginal(std::span<const double> p, const Channel& v) {
  if (static_cast<int>(p.size()) != v.nx()) throw DimensionMismatch("marginal shape mismatch");
  std::vector<double> out(v.nxh(), 0.0);
  for (int x = 0; x < v.nx(); ++x)
    for (int xh = 0; xh < v.nxh(); ++xh) out[xh] += p[x] * v.v(x, xh);
  return out;
}

double mutual_info(std::span<const double> p, const Channel& v) {
  return entropy(output_marginal(p, v)) - cond_entropy(v, p);
}

ExtReal divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DimensionMismatch("divergence length mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0) || !(q[i] >= 0.0)) throw NegativeEntry("divergence: negative mass");
    if (p[i] > 0.0) {
      if (q[i] == 0.0) return ExtReal::infinity();
      d += p[i] * (std::log(p[i]) - std::log(q[i]));
    }
  }
  return ExtReal::of(d);
}

namespace {

struct TiltedPoint {
  double lambda = 0.0;
  double distortion = 0.0;
  double objective = 0.0;  // -lam * distortion - sum_x qx log Z_x
};

class TiltedFamily {
 public:
  TiltedFamily(std::span<const double> qx, std::span<const double> qxh,
               const DistortionModel& model)
      : qx_(qx), model_(model), log_qxh_(qxh.size(), kNegInf) {
    for (std::size_t i = 0; i < qxh.size(); ++i)
      if (qxh[i] > 0.0) log_qxh_[i] = std::log(qxh[i]);
  }

  TiltedPoint eval(double lam) const {
    const int nx = model_.nx(), nxh = model_.nxh();
    TiltedPoint p;
    p.lambda = lam;
    double sum_logZ = 0.0;
    for (int x = 0; x < nx; ++x) {
      if (qx_[x] == 0.0) continue;
      double mx = kNegInf;
      for (int xh = 0; xh < nxh; ++xh)
        mx = std::max(mx, log_qxh_[xh] - lam * model_.d(x, xh));
      double z = 0.0, dz = 0.0;
      for (int xh = 0; xh < nxh; ++xh) {
        const double w = std::exp(log_qxh_[xh] - lam * model_.d(x, xh) - mx);
        z += w;
        dz += w * model_.d(x, xh);
      }
      p.distortion += qx_[x] * dz / z;
      sum_logZ += qx_[x] * (mx + std::log(z));
    }
    p.objective = -lam * p.distortion - sum_logZ;
    return p;
  }

  Channel channel(double lam) const {
    const int nx = model_.nx(), nxh = model_.nxh();
    Channel c;
    c.v = Mat(nx, nxh, 0.0);
    for (int x = 0; x < nx; ++x) {
      double mx = kNegInf;
      for (int xh = 0; xh < nxh; ++xh)
        mx = std::max(mx, log_qxh_[xh] - lam * model_.d(x, xh));
      double z = 0.0;
      for (int xh = 0; xh < nxh; ++xh) z += std::exp(log_qxh_[xh] - lam * model_.d(x, xh) - mx);
      for (int xh = 0; xh < nxh; ++xh)
        c.v(x, xh) = std::exp(log_qxh_[xh] - lam * model_.d(x, xh) - mx) / z;
    }
    return c;
  }

  double raw_objective(const Channel& c) const {
    double f = 0.0;
    for (int x = 0; x < model_.nx(); ++x) {
      if (qx_[x] == 0.0) continue;
      for (int xh = 0; xh < model_.nxh(); ++xh) {
        const double v = c.v(x, xh);
        if (v > 0.0) f += qx_[x] * v * (std::log(v) - log_qxh_[xh]);
      }
    }
    return f;
  }

 private:
  std::span<const double> qx_;
  const DistortionModel& model_;
  std::vector<double> log_qxh_;
};

// Along the tilted family the achieved distortion falls and the objective
// rises as the multiplier grows; a violation means the solver is broken.
void check_sweep(std::vector<TiltedPoint>& pts, double d_scale) {
  std::sort(pts.begin(), pts.end(),
            [](const TiltedPoint& a, const TiltedPoint& b) { return a.lambda < b.lambda; });
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].distortion > pts[i - 1].distortion + 1e-10 * std::max(1.0, d_scale))
      throw std::logic_error("tilted family distortion is not monotone in the multiplier");
    if (pts[i].objective < pts[i - 1].objective - 1e-9 * std::max(1.0, std::abs(pts[i].objective)))
      throw std::logic_error("tilted family objective is not monotone along the sweep");
  }
}

}  // namespace

RDResult mismatched_rd(std::span<const double> qx, std::span<const double> qxh,
                       const DistortionModel& model, const SolverControls& ctl) {
  model.validate();
  validate_pmf(std::vector<double>(qx.begin(), qx.end()));
  validate_pmf(std::vector<double>(qxh.begin(), qxh.end()));
  if (static_cast<int>(qx.size()) != model.nx() || static_cast<int>(qxh.size()) != model.nxh())
    throw DimensionMismatch("mismatched_rd shape mismatch");

  RDResult out;
  // Feasibility inside the output-law support: the cheapest channel routes
  // each x to its closest supported reproduction.
  double dmin_avg = 0.0;
  int worst = -1;
  double worst_m = -1.0;
  for (int x = 0; x < model.nx(); ++x) {
    if (qx[x] == 0.0) continue;
    double m = std::numeric_limits<double>::infinity();
    for (int xh = 0; xh < model.nxh(); ++xh)
      if (qxh[xh] > 0.0) m = std::min(m, model.d(x, xh));
    dmin_avg += qx[x] * m;
    if (m > worst_m) {
      worst_m = m;
      worst = x;
    }
  }
  if (dmin_avg > model.delta) {
    out.finite = false;
    out.value = std::numeric_limits<double>::infinity();
    out.blocking_symbol = worst;
    out.converged = false;
    out.residual = dmin_avg - model.delta;
    return out;
  }

  const TiltedFamily fam(qx, qxh, model);
  std::vector<TiltedPoint> seen;
  const auto probe = [&](double lam) {
    TiltedPoint p = fam.eval(lam);
    seen.push_back(p);
    ++out.iterations;
    return p;
  };

  const double d_scale = std::max(model.max_entry(), 1e-300);
  const TiltedPoint at0 = probe(0.0);
  double lam_star = 0.0;
  if (at0.distortion > model.delta) {
    const double cap = ctl.lambda_cap_scale / d_scale;
    double lo = 0.0, hi = 1.0 / d_scale;
    while (probe(hi).distortion > model.delta && hi < cap) {
      lo = hi;
      hi = std::min(cap, hi * 4.0);
    }
    if (seen.back().distortion > model.delta) {
      lam_star = hi;  // cap reached; residual reported below
    } else {
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (probe(mid).distortion <= model.delta)
          hi = mid;
        else
          lo = mid;
      }
      lam_star = hi;
    }
  }
  check_sweep(seen, d_scale);

  out.lambda = lam_star;
  out.witness = fam.channel(lam_star);
  const TiltedPoint fin = fam.eval(lam_star);
  out.value = fam.raw_objective(out.witness);
  if (std::abs(out.value - fin.objective) > 1e-9 * std::max(1.0, std::abs(out.value)))
    throw std::logic_error("tilted objective identity failed");
  out.residual = std::max(0.0, fin.distortion - model.delta);
  out.converged = out.residual <= ctl.feasibility_tol;
  return out;
}

namespace {

struct BAPoint {
  double rate = 0.0;
  double distortion = 0.0;
  Channel witness;
  long iterations = 0;
  bool converged = false;
};

BAPoint blahut_arimoto_slope(std::span<const double> qx, const DistortionModel& model, double lam,
                             const SolverControls& ctl) {
  const int nx = model.nx(), nxh = model.nxh();
  std::vector<double> q(nxh, 1.0 / nxh);
  BAPoint pt;
  double prev = std::numeric_limits<double>::infinity();
  int stall = 0;
  const long cap = std::max<long>(1000, ctl.max_iters / 5);
  Channel c;
  c.v = Mat(nx, nxh, 0.0);
  for (long it = 0; it < cap; ++it) {
    // V(xh|x) ∝ q(xh) e^{-lam d}
    for (int x = 0; x < nx; ++x) {
      double mx = kNegInf;
      for (int xh = 0; xh < nxh; ++xh) {
        const double l = (q[xh] > 0.0 ? std::log(q[xh]) : kNegInf) - lam * model.d(x, xh);
        mx = std::max(mx, l);
      }
      double z = 0.0;
      for (int xh = 0; xh < nxh; ++xh) {
        const double l = (q[xh] > 0.0 ? std::log(q[xh]) : kNegInf) - lam * model.d(x, xh);
        c.v(x, xh) = std::exp(l - mx);
        z += c.v(x, xh);
      }
      for (int xh = 0; xh < nxh; ++xh) c.v(x, xh) /= z;
    }
    q = output_marginal(qx, c);
    pt.iterations = it + 1;
    // Track the slope Lagrangian I + lam * D; it is nonincreasing under the
    // alternating updates.
    double dist = 0.0;
    for (int x = 0; x < nx; ++x)
      for (int xh = 0; xh < nxh; ++xh) dist += qx[x] * c.v(x, xh) * model.d(x, xh);
    const double val = mutual_info(qx, c) + lam * dist;
    if (std::abs(val - prev) < ctl.value_tol) {
      if (++stall >= ctl.stall_iters) {
        pt.converged = true;
        break;
      }
    } else {
      stall = 0;
    }
    prev = val;
  }
  pt.witness = c;
  pt.distortion = 0.0;
  for (int x = 0; x < nx; ++x)
    for (int xh = 0; xh < nxh; ++xh) pt.distortion += qx[x] * pt.witness.v(x, xh) * model.d(x, xh);
  pt.rate = mutual_info(qx, pt.witness);
  return pt;
}

}  // namespace

RDResult rate_distortion(std::span<const double> qx, const DistortionModel& model,
                         const SolverControls& ctl) {
  model.validate();
  validate_pmf(std::vector<double>(qx.begin(), qx.end()));
  if (static_cast<int>(qx.size()) != model.nx()) throw DimensionMismatch("rate_distortion shape");

  RDResult out;
  const int nx = model.nx(), nxh = model.nxh();

  // Zero rate iff a constant reproduction meets the budget.
  int best_col = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int xh = 0; xh < nxh; ++xh) {
    double c = 0.0;
    for (int x = 0; x < nx; ++x) c += qx[x] * model.d(x, xh);
    if (c < best_cost) {
      best_cost = c;
      best_col = xh;
    }
  }
  if (best_cost <= model.delta) {
    out.value = 0.0;
    out.witness.v = Mat(nx, nxh, 0.0);
    for (int x = 0; x < nx; ++x) out.witness.v(x, best_col) = 1.0;
    out.lambda = 0.0;
    out.residual = 0.0;
    return out;
  }

  const double d_scale = std::max(model.max_entry(), 1e-300);
  const double cap = ctl.lambda_cap_scale / d_scale;
  double lo = 0.0, hi = 1.0 / d_scale;
  BAPoint lo_pt, hi_pt = blahut_arimoto_slope(qx, model, hi, ctl);
  out.iterations += hi_pt.iterations;
  while (hi_pt.distortion > model.delta && hi < cap) {
    lo = hi;
    lo_pt = hi_pt;
    hi = std::min(cap, hi * 4.0);
    hi_pt = blahut_arimoto_slope(qx, model, hi, ctl);
    out.iterations += hi_pt.iterations;
  }
  bool have_lo = lo > 0.0;
  if (hi_pt.distortion <= model.delta) {
    for (int it = 0; it < 90 && hi - lo > 1e-13 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      BAPoint mid_pt = blahut_arimoto_slope(qx, model, mid, ctl);
      out.iterations += mid_pt.iterations;
      if (mid_pt.distortion <= model.delta) {
        hi = mid;
        hi_pt = mid_pt;
      } else {
        lo = mid;
        lo_pt = mid_pt;
        have_lo = true;
      }
      if (std::abs(hi_pt.distortion - model.delta) <= 1e-12 * std::max(1.0, d_scale)) break;
    }
  }

  out.lambda = hi;
  out.witness = hi_pt.witness;
  out.value = hi_pt.rate;
  double achieved = hi_pt.distortion;
  // Time-share across a flat of the curve when the bisection bracketed the
  // budget strictly.
  if (have_lo && lo_pt.distortion > model.delta && hi_pt.distortion < model.delta &&
      std::abs(hi_pt.distortion - model.delta) > 1e-12 * std::max(1.0, d_scale)) {
    const double a =
        (model.delta - hi_pt.distortion) / (lo_pt.distortion - hi_pt.distortion);
    if (a > 0.0 && a < 1.0) {
      Channel mix;
      mix.v = Mat(nx, nxh, 0.0);
      for (int x = 0; x < nx; ++x)
        for (int xh = 0; xh < nxh; ++xh)
          mix.v(x, xh) = a * lo_pt.witness.v(x, xh) + (1.0 - a) * hi_pt.witness.v(x, xh);
      const double mix_rate = mutual_info(qx, mix);
      if (mix_rate < out.value) {
        out.witness = mix;
        out.value = mix_rate;
        achieved = model.delta;
      }
    }
  }
  out.residual = std::max(0.0, achieved - model.delta);
  out.converged = out.residual <= ctl.feasibility_tol && out.iterations < ctl.max_iters;
  return out;
}

MinIdentityReport verify_min_identity(std::span<const double> qx, const DistortionModel& model,
                                      const SolverControls& ctl) {
  MinIdentityReport rep;
  std::vector<double> q(model.nxh(), 1.0 / model.nxh());
  double prev = std::numeric_limits<double>::infinity();
  int stall = 0;
  bool ok = false;
  RDResult inner;
  for (long it = 0; it < ctl.max_iters; ++it) {
    inner = mismatched_rd(qx, q, model, ctl);
    rep.iterations = it + 1;
    if (!inner.finite) throw std::logic_error("alternating minimization left the feasible set");
    if (inner.value > prev + 1e-12)
      throw std::logic_error("alternating minimization objective increased");
    // Output-marginal step: the divergence term vanishes at Q_Xh = Q_X V.
    q = output_marginal(qx, inner.witness);
    if (std::abs(inner.value - prev) < ctl.value_tol) {
      if (++stall >= ctl.stall_iters) {
        ok = true;
        break;
      }
    } else {
      stall = 0;
    }
    prev = inner.value;
  }
  rep.mismatched_min = inner.value;
  rep.minimizer = q;
  const RDResult rd = rate_distortion(qx, model, ctl);
  rep.rate_distortion_value = rd.value;
  rep.gap = std::abs(rep.mismatched_min - rep.rate_distortion_value);
  rep.converged = ok && rd.converged;
  return rep;
}

}  // namespace gw
