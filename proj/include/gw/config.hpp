#pragma once

#include <string>
#include <vector>

#include "gw/distortion.hpp"
#include "gw/moments.hpp"
#include "gw/rd.hpp"
#include "gw/simulate.hpp"
#include "gw/source.hpp"

namespace gw {

// One problem instance as read from a config file. The file is JSON with
// explicit keys; distortion entries and delta may be given as "a/b" strings
// (or JSON integers), in which case block feasibility runs in exact rational
// arithmetic. See README for the grammar.
struct ProblemConfig {
  FiniteSource source;
  DistortionModel model;
  std::vector<double> rho_list{1.0};

  enum class StrategyKind { Explicit, Tilted, Uniform, Optimize };
  StrategyKind strategy_kind = StrategyKind::Tilted;
  std::vector<double> strategy_pmf;

  SolverControls solver;
  SimConfig sim;
  std::vector<int> n_list;
};

// Throws ConfigError with a field-path message on any invariant violation.
ProblemConfig parse_config(const std::string& json_text);
ProblemConfig load_config(const std::string& path);

// Materialize the configured strategy. Tilted builds the one-shot optimal law
// (tilted output of the greedy quantizer) for the given rho; Optimize solves
// for the exponent-optimal single-letter law.
Strategy resolve_strategy(const ProblemConfig& cfg, double rho);

}  // namespace gw
