#pragma once

#include <span>
#include <vector>

#include "gw/distortion.hpp"
#include "gw/moments.hpp"
#include "gw/rd.hpp"
#include "gw/source.hpp"

namespace gw {

struct ExponentReport {
  double value = 0.0;                 // nats per symbol
  std::vector<double> inner_witness;  // maximizing source law Q_X*
  std::vector<double> outer_witness;  // output law Q_Xh* (fixed input for the strategy variant)
  double lambda = 0.0;                // distortion multiplier at the optimum
  bool converged = true;
  double bracket_lower = 0.0;         // duality bracket around the min-max value
  double bracket_upper = 0.0;
  long iterations = 0;
  double witness_residual = 0.0;      // |objective(witnesses) - value| via the rd module
};

// Growth rate of the rho-th guessing moment under the single-letter strategy
// Q_Xh: max over source laws Q_X of rho*R(Q_X,Q_Xh|delta) - D(Q_X||P_X).
// Evaluated exactly by a scalar search over the distortion multiplier: for
// fixed lambda the maximization over Q_X has the closed form
//   log sum_x P(x) Z_lambda(x)^-rho,  Z_lambda(x) = sum_xh Q_Xh(xh) e^{-lambda d(x,xh)},
// with maximizer Q*(x) ∝ P(x) Z_lambda(x)^-rho. Throws InfiniteExponent when
// some positive-mass source symbol has no in-budget reproduction inside the
// strategy support.
ExponentReport iid_strategy_exponent(const FiniteSource& px, const Strategy& qxh,
                                     const DistortionModel& model, double rho,
                                     const SolverControls& ctl = {});

// Best exponent over single-letter strategies: min over Q_Xh of the above.
// Convex outer problem; projected subgradient descent with pairwise
// golden-section polish, bracketed by supporting-hyperplane lower bounds.
ExponentReport optimal_iid_exponent(const FiniteSource& px, const DistortionModel& model,
                                    double rho, const SolverControls& ctl = {},
                                    int max_alphabet = 12);

// Synchronous benchmark max_Q [rho*R(Q|delta) - D(Q||P)], computed as the
// max-min of the same multiplier/output-law bifunction used above.
ExponentReport synchronous_exponent(const FiniteSource& px, const DistortionModel& model,
                                    double rho, const SolverControls& ctl = {});

// Cost of restricting to single-letter strategies: min-max minus max-min.
double iid_penalty(const FiniteSource& px, const DistortionModel& model, double rho,
                   const SolverControls& ctl = {});

// Worst case over a finite class of candidate source laws.
ExponentReport uncertainty_exponent(const std::vector<FiniteSource>& sources,
                                    const DistortionModel& model, double rho,
                                    const SolverControls& ctl = {});

}  // namespace gw
