#pragma once

#include <span>
#include <vector>

#include "gw/distortion.hpp"
#include "gw/util.hpp"

namespace gw {

/// Conditional law V(xh|x): each row is a pmf over the reproduction alphabet.
struct Channel {
  Mat v;

  int nx() const { return v.rows; }
  int nxh() const { return v.cols; }
  void validate(double tol = 1e-12) const;
};

struct SolverControls {
  double value_tol = 1e-10;      // absolute change per iteration
  int stall_iters = 3;           // consecutive small changes required
  long max_iters = 100000;
  double feasibility_tol = 1e-9;
  double lambda_cap_scale = 1e6;  // multiplier cap = scale / max distortion entry
};

struct RDResult {
  double value = 0.0;  // nats
  Channel witness;
  double lambda = 0.0;
  long iterations = 0;
  bool converged = true;
  double residual = 0.0;  // max(0, achieved distortion - delta)
  bool finite = true;     // false: no channel meets the budget inside the output support
  int blocking_symbol = -1;
};

// Standard information measures in nats, 0 log 0 = 0.
double entropy(std::span<const double> p);
double cond_entropy(const Channel& v, std::span<const double> p);
double mutual_info(std::span<const double> p, const Channel& v);
std::vector<double> output_marginal(std::span<const double> p, const Channel& v);
// +infinity marker when support(p) is not contained in support(q).
ExtReal divergence(std::span<const double> p, std::span<const double> q);

// min over channels with average distortion <= delta of
//   I(Q_X, V) + D(Q_X V || Q_Xh)
//   = sum_{x,xh} Q_X(x) V(xh|x) log[V(xh|x)/Q_Xh(xh)].
// Solved through the tilted family V_lam(xh|x) ∝ Q_Xh(xh) e^{-lam d(x,xh)} with
// the multiplier found by bisection on the distortion constraint; lam = 0 (the
// product channel, value 0) is returned whenever it is already feasible.
RDResult mismatched_rd(std::span<const double> qx, std::span<const double> qxh,
                       const DistortionModel& model, const SolverControls& ctl = {});

// Rate-distortion function min_{V: avg distortion <= delta} I(Q_X, V), by
// fixed-slope Blahut-Arimoto inner loops with bisection on the slope, plus
// time-sharing across flat segments of the curve.
RDResult rate_distortion(std::span<const double> qx, const DistortionModel& model,
                         const SolverControls& ctl = {});

struct MinIdentityReport {
  double mismatched_min = 0.0;       // min over Q_Xh of the mismatched rate
  double rate_distortion_value = 0.0;
  double gap = 0.0;
  long iterations = 0;
  bool converged = true;
  std::vector<double> minimizer;  // the minimizing output law
};

// Checks min_{Q_Xh} R(Q_X, Q_Xh | delta) = R(Q_X | delta) by alternating exact
// inner solves with output-marginal updates. Independent of the fixed-slope
// route used by rate_distortion.
MinIdentityReport verify_min_identity(std::span<const double> qx, const DistortionModel& model,
                                      const SolverControls& ctl = {});

}  // namespace gw
