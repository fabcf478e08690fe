#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gw/distortion.hpp"
#include "gw/moments.hpp"
#include "gw/source.hpp"

namespace gw {

struct SimConfig {
  std::uint64_t master_seed = 0;
  long trials = 1;
  int n = 1;                  // blocklength
  std::vector<double> rho_list{1.0};
  std::uint64_t guess_cap = 1000000;  // censoring bound
  int workers = 1;
  enum class Mode { Analytic, Literal } mode = Mode::Analytic;

  void validate() const;
};

struct SimReport {
  struct RhoRow {
    double rho = 0.0;
    double estimate = 0.0;   // mean of (censored) guess count ^ rho
    double std_error = 0.0;
    double exact = std::numeric_limits<double>::quiet_NaN();  // when cheaply computable
  };
  std::vector<RhoRow> rows;
  double censor_fraction = 0.0;
  bool cap_too_low = false;  // censor fraction above 1%: estimates biased low
  long trials = 0;
  std::uint64_t master_seed = 0;
  int workers = 0;
  int n = 0;
  std::string mode;
};

// Geometric draw by inverse CDF: ceil(log u / log(1-q)) for q < 1, else 1.
// u must lie in (0,1). Saturates at the uint64 range.
std::uint64_t sample_guesswork(double q, double u);

// Monte-Carlo estimate of block guessing moments under an i.i.d. strategy.
// Analytic mode computes each trial's ball probability exactly and samples the
// geometric count; literal mode draws reproduction blocks until one lands in
// the ball or the cap censors the trial. Reports are bit-identical across
// worker counts for a fixed master seed.
SimReport simulate_block(const FiniteSource& source, const Strategy& strategy,
                         const DistortionModel& model, const SimConfig& cfg);

}  // namespace gw
