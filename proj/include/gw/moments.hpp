#pragma once

#include <limits>
#include <span>
#include <vector>

#include "gw/distortion.hpp"
#include "gw/quantizer.hpp"
#include "gw/source.hpp"

namespace gw {

/// Randomized guessing strategy: a pmf over the reproduction alphabet. The
/// guesser emits i.i.d. draws from it until one lands in the distortion ball.
struct Strategy {
  std::vector<double> pmf;

  int size() const { return static_cast<int>(pmf.size()); }
  void validate() const { validate_pmf(pmf); }
};

inline constexpr int kMaxIntegerRho = 12;

// Escort/tilted law: entries proportional to base^(1/(1+rho)); zero atoms stay
// zero. Throws RhoOutOfRange unless rho > 0.
Strategy tilted_strategy(std::span<const double> base, double rho);

// q_x = strategy mass of A_delta(x). Zero is a legal return.
double ball_mass(const Strategy& strategy, const BallIndex& balls, int x);

// Smoothed moment: exactly q^-rho. Throws ZeroBallMass on q <= 0.
double v_moment(double q, double rho);
double log_v_moment(double q, double rho);

// Exact rho-th moment of the geometric law with success probability q, for
// integer rho in [1, kMaxIntegerRho]. rho <= 4 uses the explicit rational
// forms; larger rho evaluates the Eulerian polynomial of the moment generating
// function (the two agree on overlap, which is unit-tested).
double g_moment_integer(double q, int rho);
double log_g_moment_integer(double q, int rho);

// Eulerian numbers A(rho, 0..rho-1), exposed for tests.
std::vector<double> eulerian_row(int rho);

// Series sum_{k>=1} k^rho (1-q)^{k-1} q with certified truncation (absolute
// tail bound below tol).
double g_moment_series(double q, double rho, double tol);

// Gamma-form generalized binomial series sum_m C(m+rho-1, rho) (1-q)^{m-1} q,
// an independent route to q^-rho used by verification.
double v_moment_series(double q, double rho, double tol);

// Analytic envelopes of the geometric moment, valid for every real rho > 0:
// lower of q^-rho (rho >= 1, Jensen) or the tilted-tail bounds for q < 1/2;
// upper of max(Gamma(rho+1), 1) * q^-rho.
double log_g_moment_lower_bound(double q, double rho);
double log_g_moment_upper_bound(double q, double rho);

struct MomentReport {
  double rho = 0.0;
  bool rho_integral = false;

  struct PerSymbol {
    int x = 0;
    double q = 0.0;
    double v = 0.0;        // q^-rho
    double g = 0.0;        // exact for integer rho, series otherwise
    double g_lower = 0.0;  // q^-rho
    double g_upper = 0.0;  // rho! q^-rho for integer rho, analytic envelope otherwise
    double log_v = 0.0;
    double log_g = 0.0;
  };
  std::vector<PerSymbol> per_symbol;

  double expected_v = 0.0;  // may overflow to +inf; the log fields are authoritative
  double expected_g = 0.0;
  double log_expected_v = 0.0;
  double log_expected_g = 0.0;

  // Right-hand sides of the achievability bounds (log domain, nats); filled by
  // oneshot_achievability, NaN otherwise.
  double thm_rhs_v_log = std::numeric_limits<double>::quiet_NaN();
  double thm_rhs_g_log = std::numeric_limits<double>::quiet_NaN();
};

// Per-symbol and expected moments of a fixed strategy. Throws ZeroBallMass
// naming the first positive-mass symbol whose ball the strategy misses.
MomentReport expected_moments(const FiniteSource& source, const Strategy& strategy,
                              const BallIndex& balls, double rho, double series_tol = 1e-12);

struct OneShotReport {
  MomentReport moments;
  Quantizer quantizer;
  std::vector<double> quantized_law;
  Strategy strategy;   // tilted law of the quantized output
  double h_delta = 0;  // distortion-ball Renyi entropy at order 1/(1+rho)
};

// Builds the greedy quantizer, tilts its output law, and evaluates moments
// together with the achievability right-hand sides; log E[V_rho] <= rho *
// h_delta is re-checked internally.
OneShotReport oneshot_achievability(const FiniteSource& source, const DistortionModel& model,
                                    double rho);

struct SyncGuessReport {
  double value = 0.0;  // min over orderings of E[(first in-ball position)^rho]
  double log_value = 0.0;
  std::vector<int> ordering;  // ordering[i] = reproduction guessed at step i+1
  // Bracket rho*H - rho*log log(1+min(|X|,|Xh|)) <= log value <= rho*H, only
  // meaningful when min(|X|,|Xh|) >= 2.
  double bracket_lower = 0.0, bracket_upper = 0.0;
  bool bracket_applicable = false;
};

// Exhaustive optimum over synchronous (bijective ordering) strategies; |Xh|
// limited to max_alphabet (factorial enumeration).
SyncGuessReport optimal_sync_guesswork(const FiniteSource& source, const DistortionModel& model,
                                       double rho, int max_alphabet = 8);

}  // namespace gw
