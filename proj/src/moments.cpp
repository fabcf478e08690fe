#include "gw/moments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gw/errors.hpp"
#include "gw/util.hpp"

namespace gw {

Strategy tilted_strategy(std::span<const double> base, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw RhoOutOfRange("rho must be positive and finite");
  double total = 0.0;
  for (double v : base) {
    if (!(v >= 0.0)) throw NegativeEntry("tilted_strategy: negative mass");
    total += v;
  }
  if (total <= 0.0) throw Error("tilted_strategy: base law has zero total mass");
  const double inv = 1.0 / (1.0 + rho);
  std::vector<double> logs;
  logs.reserve(base.size());
  for (double v : base) logs.push_back(v > 0.0 ? inv * std::log(v) : kNegInf);
  const double lse = log_sum_exp(logs);
  Strategy s;
  s.pmf.resize(base.size());
  for (std::size_t i = 0; i < base.size(); ++i)
    s.pmf[i] = logs[i] == kNegInf ? 0.0 : std::exp(logs[i] - lse);
  return s;
}

double ball_mass(const Strategy& strategy, const BallIndex& balls, int x) {
  double q = 0.0;
  for (int xh : balls.forward[x]) q += strategy.pmf[xh];
  return q;
}

double log_v_moment(double q, double rho) {
  if (!(q > 0.0)) throw ZeroBallMass(-1, "?");
  return -rho * std::log(std::min(q, 1.0));
}

double v_moment(double q, double rho) { return std::exp(log_v_moment(q, rho)); }

std::vector<double> eulerian_row(int rho) {
  if (rho < 1 || rho > kMaxIntegerRho) throw RhoOutOfRange("integer rho must be in [1, 12]");
  // A(n,k) = (k+1) A(n-1,k) + (n-k) A(n-1,k-1); values stay far below 2^53.
  std::vector<double> row{1.0};
  for (int n = 2; n <= rho; ++n) {
    std::vector<double> next(n, 0.0);
    for (int k = 0; k < n; ++k) {
      const double a = k < static_cast<int>(row.size()) ? (k + 1) * row[k] : 0.0;
      const double b = k >= 1 ? (n - k) * row[k - 1] : 0.0;
      next[k] = a + b;
    }
    row = std::move(next);
  }
  return row;
}

namespace {

void check_geometric_q(double q) {
  if (!(q > 0.0)) throw ZeroBallMass(-1, "?");
  if (q > 1.0 + 1e-12) throw Error("success probability exceeds 1");
}

// Eulerian polynomial of the geometric moment generating function evaluated at
// 1-q; dividing by q^rho gives the exact rho-th moment.
double eulerian_poly(double x, int rho) {
  const std::vector<double> row = eulerian_row(rho);
  double acc = 0.0;
  for (int k = static_cast<int>(row.size()) - 1; k >= 0; --k) acc = acc * x + row[k];
  return acc;
}

}  // namespace

double g_moment_integer(double q, int rho) {
  check_geometric_q(q);
  if (rho < 1 || rho > kMaxIntegerRho) throw RhoOutOfRange("integer rho must be in [1, 12]");
  q = std::min(q, 1.0);
  switch (rho) {
    case 1: return 1.0 / q;
    case 2: return (2.0 - q) / (q * q);
    case 3: return (q * q - 6.0 * q + 6.0) / (q * q * q);
    case 4: return (-q * q * q + 14.0 * q * q - 36.0 * q + 24.0) / (q * q * q * q);
    default: return eulerian_poly(1.0 - q, rho) * std::exp(-rho * std::log(q));
  }
}

double log_g_moment_integer(double q, int rho) {
  check_geometric_q(q);
  if (rho < 1 || rho > kMaxIntegerRho) throw RhoOutOfRange("integer rho must be in [1, 12]");
  q = std::min(q, 1.0);
  return std::log(eulerian_poly(1.0 - q, rho)) - rho * std::log(q);
}

double g_moment_series(double q, double rho, double tol) {
  check_geometric_q(q);
  if (!(rho > 0.0)) throw RhoOutOfRange("rho must be positive");
  if (!(tol > 0.0)) throw Error("tol must be positive");
  q = std::min(q, 1.0);
  if (q == 1.0) return 1.0;
  const long double r1mq = 1.0L - static_cast<long double>(q);
  long double sum = 0.0L;
  long double pw = 1.0L;  // (1-q)^{k-1}
  for (long long k = 1;; ++k) {
    const long double term = powl(static_cast<long double>(k), rho) * pw * q;
    sum += term;
    pw *= r1mq;
    // Terms decay by t_{k+1}/t_k = ((k+1)/k)^rho (1-q), which is decreasing in
    // k; once r = ((k+2)/(k+1))^rho (1-q) < 1 the remaining tail is at most
    // t_{k+1} / (1 - r).
    const long double ratio_next =
        powl(static_cast<long double>(k + 2) / static_cast<long double>(k + 1), rho) * r1mq;
    if (ratio_next < 1.0L) {
      const long double t_next = powl(static_cast<long double>(k + 1), rho) * pw * q;
      if (t_next / (1.0L - ratio_next) < static_cast<long double>(tol))
        return static_cast<double>(sum);
    }
    if (k > 200000000LL) throw Error("g_moment_series: truncation did not certify");
  }
}

double v_moment_series(double q, double rho, double tol) {
  check_geometric_q(q);
  if (!(rho > 0.0)) throw RhoOutOfRange("rho must be positive");
  q = std::min(q, 1.0);
  if (q == 1.0) return 1.0;
  const long double r1mq = 1.0L - static_cast<long double>(q);
  const double lg_rho1 = std::lgamma(rho + 1.0);
  long double sum = 0.0L;
  long double pw = 1.0L;
  for (long long m = 1;; ++m) {
    const double lc = std::lgamma(static_cast<double>(m) + rho) - lg_rho1 -
                      std::lgamma(static_cast<double>(m));
    const long double term = expl(static_cast<long double>(lc)) * pw * q;
    sum += term;
    pw *= r1mq;
    // Coefficient ratio (m+rho)/m decreases toward 1, so the same geometric
    // tail certificate applies.
    const long double ratio_next =
        (static_cast<long double>(m + 1) + static_cast<long double>(rho)) /
        static_cast<long double>(m + 1) * r1mq;
    if (ratio_next < 1.0L) {
      const long double t_next =
          expl(static_cast<long double>(std::lgamma(static_cast<double>(m + 1) + rho) - lg_rho1 -
                                        std::lgamma(static_cast<double>(m + 1)))) *
          pw * q;
      if (t_next / (1.0L - ratio_next) < static_cast<long double>(tol))
        return static_cast<double>(sum);
    }
    if (m > 200000000LL) throw Error("v_moment_series: truncation did not certify");
  }
}

double log_g_moment_upper_bound(double q, double rho) {
  check_geometric_q(q);
  // k^rho <= max(1, 1/Gamma(1+rho)) * Gamma(k+rho)/Gamma(k): the ratio
  // k^rho Gamma(k)/Gamma(k+rho) is monotone in k with limit 1, so its max is
  // attained at k=1 (rho<1) or in the limit (rho>=1). Hence
  // G_rho <= max(Gamma(rho+1), 1) * q^-rho for every real rho > 0.
  return std::max(std::lgamma(rho + 1.0), 0.0) - rho * std::log(std::min(q, 1.0));
}

double log_g_moment_lower_bound(double q, double rho) {
  check_geometric_q(q);
  q = std::min(q, 1.0);
  if (rho >= 1.0) return -rho * std::log(q);  // Jensen, convex power
  double lb = 0.0;  // guesses start at 1
  if (q < 0.5) {
    lb = std::max(lb, rho * std::log((1.0 - q) / q) - 1.0 / (1.0 - q));
    lb = std::max(lb, -rho * std::log(2.0) - 2.0 - rho * std::log(q));
  }
  return lb;
}

MomentReport expected_moments(const FiniteSource& source, const Strategy& strategy,
                              const BallIndex& balls, double rho, double series_tol) {
  source.validate();
  strategy.validate();
  if (strategy.size() != balls.nxh) throw DimensionMismatch("strategy/ball index size mismatch");
  if (!(rho > 0.0)) throw RhoOutOfRange("rho must be positive");

  MomentReport rep;
  rep.rho = rho;
  const int irho = static_cast<int>(std::lround(rho));
  rep.rho_integral = std::abs(rho - irho) < 1e-12 && irho >= 1 && irho <= kMaxIntegerRho;

  std::vector<double> log_v_terms, log_g_terms;
  for (int x = 0; x < source.size(); ++x) {
    MomentReport::PerSymbol row;
    row.x = x;
    row.q = ball_mass(strategy, balls, x);
    if (source.pmf[x] > 0.0 && row.q <= 0.0) throw ZeroBallMass(x, source.symbols[x]);
    if (row.q > 0.0) {
      row.log_v = log_v_moment(row.q, rho);
      row.v = std::exp(row.log_v);
      row.g_lower = rep.rho_integral ? row.v : std::exp(log_g_moment_lower_bound(row.q, rho));
      row.g_upper = rep.rho_integral ? std::exp(std::lgamma(rho + 1.0) + row.log_v)
                                     : std::exp(log_g_moment_upper_bound(row.q, rho));
      if (rep.rho_integral) {
        row.log_g = log_g_moment_integer(row.q, irho);
        row.g = std::exp(row.log_g);
        if (row.log_g < row.log_v - 1e-9 ||
            row.log_g > row.log_v + std::lgamma(rho + 1.0) + 1e-9)
          throw std::logic_error("geometric moment escaped its sandwich");
      } else {
        const double scale = std::exp(std::min(700.0, row.log_v));
        row.g = g_moment_series(row.q, rho, series_tol * std::max(1.0, scale));
        row.log_g = std::log(row.g);
      }
    } else {
      row.v = row.g = row.log_v = row.log_g = std::numeric_limits<double>::quiet_NaN();
    }
    if (source.pmf[x] > 0.0) {
      const double lp = std::log(source.pmf[x]);
      log_v_terms.push_back(lp + row.log_v);
      log_g_terms.push_back(lp + row.log_g);
    }
    rep.per_symbol.push_back(row);
  }
  rep.log_expected_v = log_sum_exp(log_v_terms);
  rep.log_expected_g = log_sum_exp(log_g_terms);
  rep.expected_v = std::exp(rep.log_expected_v);
  rep.expected_g = std::exp(rep.log_expected_g);
  return rep;
}

OneShotReport oneshot_achievability(const FiniteSource& source, const DistortionModel& model,
                                    double rho) {
  if (!(rho > 0.0)) throw RhoOutOfRange("rho must be positive");
  OneShotReport out;
  const double alpha = 1.0 / (1.0 + rho);
  DistortionRenyiResult dr = distortion_renyi(source, model, alpha);
  out.h_delta = dr.value;
  out.quantizer = std::move(dr.quantizer);
  const BallIndex balls = build_ball_index(model);
  out.quantized_law = pushforward(source, out.quantizer, balls.nxh);
  out.strategy = tilted_strategy(out.quantized_law, rho);
  out.moments = expected_moments(source, out.strategy, balls, rho);
  out.moments.thm_rhs_v_log = rho * out.h_delta;
  if (out.moments.rho_integral)
    out.moments.thm_rhs_g_log = rho * out.h_delta + std::lgamma(rho + 1.0);
  if (out.moments.log_expected_v > out.moments.thm_rhs_v_log + 1e-9)
    throw std::logic_error("achievability bound violated; tilted strategy construction is broken");
  return out;
}

SyncGuessReport optimal_sync_guesswork(const FiniteSource& source, const DistortionModel& model,
                                       double rho, int max_alphabet) {
  source.validate();
  if (!(rho > 0.0)) throw RhoOutOfRange("rho must be positive");
  const BallIndex balls = build_ball_index(model);
  if (balls.nxh > max_alphabet)
    throw InstanceTooLarge("synchronous optimum needs |Xh|! enumeration; |Xh| > " +
                           std::to_string(max_alphabet));
  std::vector<int> order(balls.nxh);
  for (int i = 0; i < balls.nxh; ++i) order[i] = i;

  SyncGuessReport best;
  best.value = std::numeric_limits<double>::infinity();
  do {
    double val = 0.0;
    for (int x = 0; x < balls.nx; ++x) {
      if (source.pmf[x] == 0.0) continue;
      int hit = 0;
      for (int pos = 0; pos < balls.nxh; ++pos) {
        if (balls.contains(x, order[pos])) {
          hit = pos + 1;
          break;
        }
      }
      val += source.pmf[x] * std::pow(static_cast<double>(hit), rho);
    }
    if (val < best.value) {
      best.value = val;
      best.ordering = order;
    }
  } while (std::next_permutation(order.begin(), order.end()));

  best.log_value = std::log(best.value);
  const int mn = std::min(balls.nx, balls.nxh);
  if (mn >= 2) {
    // (1 + ln m)^-rho * exp(rho H) <= min E <= exp(rho H), the classical
    // harmonic-sum correction for ordered guessing.
    const double h = distortion_renyi(source, model, 1.0 / (1.0 + rho)).value;
    best.bracket_upper = rho * h;
    best.bracket_lower = rho * h - rho * std::log(1.0 + std::log(static_cast<double>(mn)));
    best.bracket_applicable = true;
  }
  return best;
}

}  // namespace gw
