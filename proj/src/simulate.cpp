#include "gw/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gw/errors.hpp"
#include "gw/types_oracle.hpp"
#include "gw/util.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gw {

void SimConfig::validate() const {
  if (trials < 1) throw Error("sim.trials must be >= 1");
  if (guess_cap < 1) throw Error("sim.guess_cap must be >= 1");
  if (n < 1) throw Error("sim.n must be >= 1");
  if (workers < 1) throw Error("sim.workers must be >= 1");
  if (rho_list.empty()) throw Error("sim.rho_list must be nonempty");
  for (double r : rho_list)
    if (!(r > 0.0)) throw Error("sim.rho_list entries must be positive");
}

std::uint64_t sample_guesswork(double q, double u) {
  if (!(q > 0.0)) throw ZeroBallMass(-1, "?");
  if (!(u > 0.0 && u < 1.0)) throw Error("sample_guesswork: u must lie in (0,1)");
  if (q >= 1.0) return 1;
  const double k = std::ceil(std::log(u) / std::log1p(-q));
  if (!(k >= 1.0)) return 1;
  if (k >= 1.8e19) return UINT64_MAX;
  return static_cast<std::uint64_t>(k);
}

namespace {

struct Tables {
  std::vector<double> cum_p;   // source inverse-CDF breakpoints
  std::vector<double> cum_q;   // strategy breakpoints (literal mode)
  std::map<std::vector<int>, double> q_by_type;  // analytic mode
};

int draw_index(const std::vector<double>& cum, double u) {
  return static_cast<int>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
}

std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> c(p.size() - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    acc += p[i];
    c[i] = acc;
  }
  return c;
}

struct ChunkSums {
  std::vector<long double> s1, s2;
  long censored = 0;
};

}  // namespace

SimReport simulate_block(const FiniteSource& source, const Strategy& strategy,
                         const DistortionModel& model, const SimConfig& cfg) {
  source.validate();
  strategy.validate();
  model.validate();
  cfg.validate();

  Tables tab;
  tab.cum_p = cumulative(source.pmf);
  tab.cum_q = cumulative(strategy.pmf);
  const bool analytic = cfg.mode == SimConfig::Mode::Analytic;
  if (analytic) {
    for (const TypeClass& t : enumerate_types(cfg.n, source.size())) {
      bool possible = true;
      for (int a = 0; a < source.size(); ++a)
        if (t.counts[a] > 0 && source.pmf[a] == 0.0) possible = false;
      if (!possible) continue;
      const std::vector<int> seq = canonical_sequence(t);
      const double q = exact_ball_probability(seq, strategy, model);
      if (q <= 0.0) throw ZeroBallMass(seq.front(), "block type starting here");
      tab.q_by_type[t.counts] = q;
    }
  }

  const std::size_t nr = cfg.rho_list.size();
  constexpr long kChunk = 4096;
  const long nchunks = (cfg.trials + kChunk - 1) / kChunk;
  std::vector<ChunkSums> chunks(nchunks);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.workers)
#endif
  for (long c = 0; c < nchunks; ++c) {
    ChunkSums& cs = chunks[c];
    cs.s1.assign(nr, 0.0L);
    cs.s2.assign(nr, 0.0L);
    std::vector<int> x_seq(cfg.n), xh_seq(cfg.n);
    std::vector<int> counts(source.size());
    const long lo = c * kChunk;
    const long hi = std::min(cfg.trials, lo + kChunk);
    for (long trial = lo; trial < hi; ++trial) {
      CounterRng rng(cfg.master_seed, static_cast<std::uint64_t>(trial));
      for (int i = 0; i < cfg.n; ++i) x_seq[i] = draw_index(tab.cum_p, rng.next_unit());
      std::uint64_t guesses = 0;
      bool censored = false;
      if (analytic) {
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < cfg.n; ++i) ++counts[x_seq[i]];
        const double q = tab.q_by_type.at(counts);
        guesses = sample_guesswork(q, rng.next_unit());
        if (guesses > cfg.guess_cap) {
          guesses = cfg.guess_cap;
          censored = true;
        }
      } else {
        for (std::uint64_t g = 1;; ++g) {
          for (int i = 0; i < cfg.n; ++i) xh_seq[i] = draw_index(tab.cum_q, rng.next_unit());
          if (block_ball_membership(x_seq, xh_seq, model)) {
            guesses = g;
            break;
          }
          if (g >= cfg.guess_cap) {
            guesses = cfg.guess_cap;
            censored = true;
            break;
          }
        }
      }
      cs.censored += censored ? 1 : 0;
      const double gd = static_cast<double>(guesses);
      for (std::size_t r = 0; r < nr; ++r) {
        const long double kr = std::pow(gd, cfg.rho_list[r]);
        cs.s1[r] += kr;
        cs.s2[r] += kr * kr;
      }
    }
  }

  SimReport rep;
  rep.trials = cfg.trials;
  rep.master_seed = cfg.master_seed;
  rep.workers = cfg.workers;
  rep.n = cfg.n;
  rep.mode = analytic ? "analytic" : "literal";
  long censored_total = 0;
  std::vector<long double> s1(nr, 0.0L), s2(nr, 0.0L);
  for (const ChunkSums& cs : chunks) {  // fixed chunk order: worker-count invariant
    censored_total += cs.censored;
    for (std::size_t r = 0; r < nr; ++r) {
      s1[r] += cs.s1[r];
      s2[r] += cs.s2[r];
    }
  }
  rep.censor_fraction = static_cast<double>(censored_total) / static_cast<double>(cfg.trials);
  rep.cap_too_low = rep.censor_fraction > 0.01;

  for (std::size_t r = 0; r < nr; ++r) {
    SimReport::RhoRow row;
    row.rho = cfg.rho_list[r];
    const long double mean = s1[r] / cfg.trials;
    const long double var = std::max<long double>(0.0L, s2[r] / cfg.trials - mean * mean);
    row.estimate = static_cast<double>(mean);
    row.std_error = static_cast<double>(sqrtl(var / cfg.trials));
    const int irho = static_cast<int>(std::lround(row.rho));
    const bool integral = std::abs(row.rho - irho) < 1e-12 && irho >= 1 && irho <= kMaxIntegerRho;
    if (integral) {
      try {
        const BlockMomentReport ex =
            exact_block_moment(source, strategy, model, cfg.n, row.rho, 1 << 22);
        row.exact = std::exp(ex.log_expected_g);
      } catch (const InstanceTooLarge&) {
      }
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace gw
