#include "gw/types_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gw/errors.hpp"
#include "gw/exponents.hpp"
#include "gw/util.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gw {

std::vector<double> TypeClass::pmf() const {
  std::vector<double> p(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    p[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  return p;
}

namespace {

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

std::uint64_t checked_type_count(int n, int m, std::uint64_t cap) {
  // C(n+m-1, m-1), guarded through the log domain before exact evaluation.
  if (log_binomial(n + m - 1, m - 1) > std::log(static_cast<double>(cap)) + 1.0)
    throw InstanceTooLarge("type enumeration exceeds cap");
  std::uint64_t c = 1;
  for (int i = 1; i <= m - 1; ++i)
    c = c * static_cast<std::uint64_t>(n + m - 1 - (m - 1) + i) / static_cast<std::uint64_t>(i);
  if (c > cap) throw InstanceTooLarge("type enumeration exceeds cap");
  return c;
}

void fill_types(int remaining, int slot, std::vector<int>& cur, std::vector<TypeClass>& out,
                int n) {
  const int m = static_cast<int>(cur.size());
  if (slot == m - 1) {
    cur[slot] = remaining;
    out.push_back({n, cur});
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    cur[slot] = k;
    fill_types(remaining - k, slot + 1, cur, out, n);
  }
}

}  // namespace

std::vector<TypeClass> enumerate_types(int n, int alphabet_size, std::uint64_t cap) {
  if (n < 1 || alphabet_size < 1) throw Error("enumerate_types: need n >= 1 and alphabet >= 1");
  const std::uint64_t expected = checked_type_count(n, alphabet_size, cap);
  std::vector<TypeClass> out;
  out.reserve(expected);
  std::vector<int> cur(alphabet_size, 0);
  fill_types(n, 0, cur, out, n);
  if (out.size() != expected) throw std::logic_error("type count mismatch");
  return out;
}

std::vector<int> canonical_sequence(const TypeClass& t) {
  std::vector<int> seq;
  seq.reserve(t.n);
  for (std::size_t a = 0; a < t.counts.size(); ++a)
    seq.insert(seq.end(), t.counts[a], static_cast<int>(a));
  return seq;
}

double log_ball_probability_enumerate(std::span<const int> x_seq, const Strategy& strategy,
                                      const DistortionModel& model, std::uint64_t cap,
                                      bool parallel) {
  strategy.validate();
  const int n = static_cast<int>(x_seq.size());
  const int nxh = model.nxh();
  double total_log = n * std::log(static_cast<double>(nxh));
  if (total_log > std::log(static_cast<double>(cap)) + 1e-9)
    throw InstanceTooLarge("reproduction-space enumeration exceeds cap");
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) total *= nxh;
  if (total > cap) throw InstanceTooLarge("reproduction-space enumeration exceeds cap");

  std::vector<double> log_q(nxh, kNegInf);
  for (int xh = 0; xh < nxh; ++xh)
    if (strategy.pmf[xh] > 0.0) log_q[xh] = std::log(strategy.pmf[xh]);

  constexpr std::uint64_t kChunk = 1 << 14;
  const std::uint64_t nchunks = (total + kChunk - 1) / kChunk;
  std::vector<double> chunk_lse(nchunks, kNegInf);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) if (parallel && nchunks > 1)
#endif
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(nchunks); ++c) {
    std::vector<int> xh_seq(n);
    double acc = kNegInf;
    const std::uint64_t lo = static_cast<std::uint64_t>(c) * kChunk;
    const std::uint64_t hi = std::min(total, lo + kChunk);
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
      std::uint64_t t = idx;
      double lp = 0.0;
      for (int i = 0; i < n; ++i) {
        xh_seq[i] = static_cast<int>(t % nxh);
        t /= nxh;
        lp += log_q[xh_seq[i]];
      }
      if (lp != kNegInf && block_ball_membership(x_seq, xh_seq, model)) acc = log_add(acc, lp);
    }
    chunk_lse[c] = acc;
  }
  (void)parallel;

  // Chunk results combined in index order: identical for any thread count.
  double out = kNegInf;
  for (double v : chunk_lse) out = log_add(out, v);
  return out;
}

std::optional<double> log_ball_probability_dp(std::span<const int> x_seq,
                                              const Strategy& strategy,
                                              const DistortionModel& model,
                                              std::uint64_t state_cap) {
  if (!model.exact) return std::nullopt;
  strategy.validate();
  const auto& e = *model.exact;
  const int n = static_cast<int>(x_seq.size());
  const int nxh = model.nxh();

  // Feasible iff running integer cost total <= floor(n * delta_num * den / delta_den).
  const __int128 budget_num = static_cast<__int128>(n) * e.delta_num * e.den;
  if (budget_num < 0) return std::nullopt;
  const std::int64_t budget = static_cast<std::int64_t>(budget_num / e.delta_den);
  std::int64_t max_cost = 0;
  for (int i = 0; i < n; ++i) {
    std::int64_t row_max = 0;
    for (int xh = 0; xh < nxh; ++xh) row_max = std::max(row_max, e.at(x_seq[i], xh, nxh));
    max_cost += row_max;
  }
  const std::int64_t top = std::min(budget, max_cost);
  if (top < 0) return kNegInf;  // even a zero-cost block misses a negative budget: impossible here
  if (static_cast<std::uint64_t>(top) + 1 > state_cap) return std::nullopt;

  std::vector<double> dp(static_cast<std::size_t>(top) + 1, 0.0);
  dp[0] = 1.0;
  double log_scale = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> next(dp.size(), 0.0);
    for (std::size_t s = 0; s < dp.size(); ++s) {
      if (dp[s] == 0.0) continue;
      for (int xh = 0; xh < nxh; ++xh) {
        if (strategy.pmf[xh] == 0.0) continue;
        const std::int64_t c = e.at(x_seq[i], xh, nxh);
        if (static_cast<std::int64_t>(s) + c <= top)
          next[s + c] += dp[s] * strategy.pmf[xh];
      }
    }
    dp = std::move(next);
    double mx = 0.0;
    for (double v : dp) mx = std::max(mx, v);
    if (mx > 0.0 && mx < 1e-260) {
      for (double& v : dp) v *= 1e260;
      log_scale -= 260.0 * std::log(10.0);
    }
  }
  double total = pairwise_sum(dp);
  if (total <= 0.0) return kNegInf;
  return std::log(total) + log_scale;
}

double log_exact_ball_probability(std::span<const int> x_seq, const Strategy& strategy,
                                  const DistortionModel& model, std::uint64_t cap) {
  if (x_seq.empty()) throw LengthMismatch("empty sequence");
  for (int x : x_seq)
    if (x < 0 || x >= model.nx()) throw Error("sequence symbol out of range");
  if (auto dp = log_ball_probability_dp(x_seq, strategy, model)) return *dp;
  return log_ball_probability_enumerate(x_seq, strategy, model, cap, true);
}

double exact_ball_probability(std::span<const int> x_seq, const Strategy& strategy,
                              const DistortionModel& model, std::uint64_t cap) {
  return std::exp(log_exact_ball_probability(x_seq, strategy, model, cap));
}

BlockMomentReport exact_block_moment(const FiniteSource& source, const Strategy& strategy,
                                     const DistortionModel& model, int n, double rho,
                                     std::uint64_t cap) {
  source.validate();
  strategy.validate();
  if (!(rho > 0.0)) throw RhoOutOfRange("rho must be positive");
  BlockMomentReport rep;
  rep.n = n;
  rep.rho = rho;
  const int irho = static_cast<int>(std::lround(rho));
  rep.rho_integral = std::abs(rho - irho) < 1e-12 && irho >= 1 && irho <= kMaxIntegerRho;

  std::vector<double> log_p(source.size(), kNegInf);
  for (int a = 0; a < source.size(); ++a)
    if (source.pmf[a] > 0.0) log_p[a] = std::log(source.pmf[a]);

  std::vector<double> v_terms, g_terms, lo_terms, up_terms;
  for (const TypeClass& t : enumerate_types(n, source.size(), cap)) {
    double log_w = log_multinomial(n, t.counts);
    bool dead = false;
    for (int a = 0; a < source.size(); ++a) {
      if (t.counts[a] == 0) continue;
      if (log_p[a] == kNegInf) {
        dead = true;
        break;
      }
      log_w += t.counts[a] * log_p[a];
    }
    if (dead) continue;
    const std::vector<int> x_seq = canonical_sequence(t);
    const double log_q = log_exact_ball_probability(x_seq, strategy, model, cap);
    if (log_q == kNegInf) throw ZeroBallMass(x_seq.front(), "block type starting here");
    v_terms.push_back(log_w - rho * log_q);
    lo_terms.push_back(log_w + log_g_moment_lower_bound(std::exp(log_q), rho));
    up_terms.push_back(log_w + log_g_moment_upper_bound(std::exp(log_q), rho));
    if (rep.rho_integral) {
      const double q = std::exp(log_q);
      const double log_poly = std::log(
          [&] {
            const std::vector<double> row = eulerian_row(irho);
            double acc = 0.0;
            for (int k = static_cast<int>(row.size()) - 1; k >= 0; --k)
              acc = acc * (1.0 - q) + row[k];
            return acc;
          }());
      g_terms.push_back(log_w + log_poly - rho * log_q);
    }
  }
  rep.log_expected_v = log_sum_exp(v_terms);
  rep.log_g_lower = log_sum_exp(lo_terms);
  rep.log_g_upper = log_sum_exp(up_terms);
  if (rep.rho_integral) {
    rep.log_expected_g = log_sum_exp(g_terms);
    if (rep.log_expected_g < rep.log_expected_v - 1e-9 ||
        rep.log_expected_g > rep.log_expected_v + std::lgamma(rho + 1.0) + 1e-9)
      throw std::logic_error("block moment escaped its sandwich");
  } else {
    rep.log_expected_g = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

double log_block_moment_per_sequence(const FiniteSource& source, const Strategy& strategy,
                                     const DistortionModel& model, int n, double rho,
                                     std::uint64_t cap, bool parallel) {
  source.validate();
  const int nx = source.size();
  double total_log = n * std::log(static_cast<double>(nx));
  if (total_log > std::log(static_cast<double>(cap)) + 1e-9)
    throw InstanceTooLarge("source-space enumeration exceeds cap");
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) total *= nx;
  if (total > cap) throw InstanceTooLarge("source-space enumeration exceeds cap");

  std::vector<double> log_p(nx, kNegInf);
  for (int a = 0; a < nx; ++a)
    if (source.pmf[a] > 0.0) log_p[a] = std::log(source.pmf[a]);

  constexpr std::uint64_t kChunk = 1 << 10;
  const std::uint64_t nchunks = (total + kChunk - 1) / kChunk;
  std::vector<double> chunk_lse(nchunks, kNegInf);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) if (parallel && nchunks > 1)
#endif
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(nchunks); ++c) {
    std::vector<int> x_seq(n);
    double acc = kNegInf;
    const std::uint64_t lo = static_cast<std::uint64_t>(c) * kChunk;
    const std::uint64_t hi = std::min(total, lo + kChunk);
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
      std::uint64_t t = idx;
      double lw = 0.0;
      for (int i = 0; i < n; ++i) {
        x_seq[i] = static_cast<int>(t % nx);
        t /= nx;
        lw += log_p[x_seq[i]];
      }
      if (lw == kNegInf) continue;
      const double log_q = log_exact_ball_probability(x_seq, strategy, model, cap);
      acc = log_add(acc, lw - rho * log_q);
    }
    chunk_lse[c] = acc;
  }
  (void)parallel;

  double out = kNegInf;
  for (double v : chunk_lse) out = log_add(out, v);
  return out;
}

ConvergenceTable exponent_convergence_check(const FiniteSource& source, const Strategy& strategy,
                                            const DistortionModel& model, double rho,
                                            std::span<const int> n_list, std::uint64_t cap) {
  ConvergenceTable table;
  table.exponent = iid_strategy_exponent(source, strategy, model, rho).value;
  for (int n : n_list) {
    const BlockMomentReport r = exact_block_moment(source, strategy, model, n, rho, cap);
    ConvergenceRow row;
    row.n = n;
    row.rate_v = r.log_expected_v / n;
    row.gap_v = std::abs(row.rate_v - table.exponent);
    if (r.rho_integral) {
      row.rate_g = r.log_expected_g / n;
      row.gap_g = std::abs(row.rate_g - table.exponent);
    } else {
      row.rate_g = std::numeric_limits<double>::quiet_NaN();
      row.gap_g = row.gap_v;
    }
    table.rows.push_back(row);
  }
  const auto gap_of = [&](const ConvergenceRow& r) {
    return std::isnan(r.rate_g) ? r.gap_v : r.gap_g;
  };
  const std::size_t k = table.rows.size();
  if (k >= 3) {
    table.last_three_monotone = gap_of(table.rows[k - 3]) > gap_of(table.rows[k - 2]) &&
                                gap_of(table.rows[k - 2]) > gap_of(table.rows[k - 1]);
  }
  if (k >= 1) {
    table.final_gap = gap_of(table.rows[k - 1]);
    double c = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i)
      if (table.rows[i].n >= 2)
        c = std::max(c, gap_of(table.rows[i]) * table.rows[i].n / std::log(table.rows[i].n));
    table.fitted_envelope_c = c;
    const int nl = table.rows[k - 1].n;
    table.final_under_envelope = nl >= 2 && table.final_gap <= c * std::log(nl) / nl;
  }
  return table;
}

namespace {

std::uint64_t multinomial_u64(int n, std::span<const int> counts) {
  // Product of binomials; all intermediate values fit u64 for the block sizes
  // the census caps allow.
  std::uint64_t result = 1;
  int remaining = n;
  for (int c : counts) {
    // C(remaining, c)
    std::uint64_t b = 1;
    for (int i = 1; i <= c; ++i)
      b = b * static_cast<std::uint64_t>(remaining - c + i) / static_cast<std::uint64_t>(i);
    result *= b;
    remaining -= c;
  }
  return result;
}

void row_compositions(int total, int parts, std::vector<int>& cur, int slot,
                      std::vector<std::vector<int>>& out) {
  if (slot == parts - 1) {
    cur[slot] = total;
    out.push_back(cur);
    return;
  }
  for (int k = total; k >= 0; --k) {
    cur[slot] = k;
    row_compositions(total - k, parts, cur, slot + 1, out);
  }
}

}  // namespace

std::vector<CensusCell> conditional_type_census(std::span<const int> x_seq,
                                                const DistortionModel& model,
                                                std::uint64_t cap) {
  const int nx = model.nx(), nxh = model.nxh();
  const int n = static_cast<int>(x_seq.size());
  if (n < 1) throw LengthMismatch("empty sequence");
  std::vector<int> base(nx, 0);
  for (int x : x_seq) {
    if (x < 0 || x >= nx) throw Error("sequence symbol out of range");
    ++base[x];
  }

  // Cell count = product over rows of C(n_a + m - 1, m - 1).
  double log_cells = 0.0;
  for (int a = 0; a < nx; ++a) log_cells += log_binomial(base[a] + nxh - 1, nxh - 1);
  if (log_cells > std::log(static_cast<double>(cap)) + 1e-9)
    throw InstanceTooLarge("conditional type census exceeds cap");

  std::vector<std::vector<std::vector<int>>> per_row(nx);
  for (int a = 0; a < nx; ++a) {
    std::vector<int> cur(nxh, 0);
    row_compositions(base[a], nxh, cur, 0, per_row[a]);
  }

  std::vector<CensusCell> cells;
  std::vector<int> pick(nx, 0);
  while (true) {
    CensusCell cell;
    cell.type.nx = nx;
    cell.type.nxh = nxh;
    cell.type.joint.assign(static_cast<std::size_t>(nx) * nxh, 0);
    cell.size = 1;
    for (int a = 0; a < nx; ++a) {
      const std::vector<int>& row = per_row[a][pick[a]];
      for (int b = 0; b < nxh; ++b)
        cell.type.joint[static_cast<std::size_t>(a) * nxh + b] = row[b];
      cell.size *= multinomial_u64(base[a], row);
    }
    if (model.exact) {
      const auto& e = *model.exact;
      __int128 cost = 0;
      for (int a = 0; a < nx; ++a)
        for (int b = 0; b < nxh; ++b)
          cost += static_cast<__int128>(cell.type.at(a, b)) * e.at(a, b, nxh);
      cell.feasible = cost * e.delta_den <= static_cast<__int128>(n) * e.delta_num * e.den;
    } else {
      double cost = 0.0;
      for (int a = 0; a < nx; ++a)
        for (int b = 0; b < nxh; ++b) cost += cell.type.at(a, b) * model.d(a, b);
      cell.feasible = cost <= n * model.delta;
    }
    cells.push_back(std::move(cell));
    int slot = nx - 1;
    while (slot >= 0 && ++pick[slot] == static_cast<int>(per_row[slot].size())) {
      pick[slot] = 0;
      --slot;
    }
    if (slot < 0) break;
  }
  return cells;
}

double census_cell_log_prob(const CensusCell& cell, const Strategy& strategy) {
  double lp = std::log(static_cast<double>(cell.size));
  for (int b = 0; b < cell.type.nxh; ++b) {
    int col = 0;
    for (int a = 0; a < cell.type.nx; ++a) col += cell.type.at(a, b);
    if (col == 0) continue;
    if (strategy.pmf[b] == 0.0) return kNegInf;
    lp += col * std::log(strategy.pmf[b]);
  }
  return lp;
}

}  // namespace gw
