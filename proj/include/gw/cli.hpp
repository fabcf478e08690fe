#pragma once

#include <string>
#include <vector>

#include "gw/config.hpp"

namespace gw::cli {

// Process exit codes shared by all subcommands.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kInfiniteMoment = 2,
  kNonConvergence = 3,
  kInstanceTooLarge = 4,
};

int cmd_oneshot(const ProblemConfig& cfg, const std::string& out_dir);
int cmd_exponent(const ProblemConfig& cfg, const std::string& out_dir);
int cmd_rd(const ProblemConfig& cfg, const std::string& out_dir);
int cmd_oracle(const ProblemConfig& cfg, const std::string& out_dir,
               const std::vector<int>& n_list);
int cmd_simulate(const ProblemConfig& cfg, const std::string& out_dir);

// Full argv entry point (subcommand dispatch + error-to-exit-code mapping).
int run(int argc, const char* const* argv);

// Round a double to 12 significant digits (the precision all reports use).
double sig12(double v);

}  // namespace gw::cli
