#include "gw/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gw/errors.hpp"
#include "gw/exponents.hpp"
#include "gw/quantizer.hpp"
#include "gw/rd.hpp"
#include "gw/simulate.hpp"
#include "gw/types_oracle.hpp"

namespace gw::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i)
      out += header_[i] + (i + 1 < header_.size() ? "," : "\n");
    for (const auto& row : rows_)
      for (std::size_t i = 0; i < row.size(); ++i)
        out += row[i] + (i + 1 < row.size() ? "," : "\n");
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_file(const std::string& out_dir, const std::string& name, const std::string& body) {
  std::filesystem::create_directories(out_dir);
  std::ofstream f(out_dir + "/" + name, std::ios::trunc);
  if (!f) throw Error("cannot write " + out_dir + "/" + name);
  f << body;
}

ordered_json pmf_json(const std::vector<double>& p) {
  ordered_json arr = ordered_json::array();
  for (double v : p) arr.push_back(sig12(v));
  return arr;
}

void write_summary(const std::string& out_dir, const std::string& name, const ordered_json& j) {
  write_file(out_dir, name, j.dump(2) + "\n");
}

}  // namespace

double sig12(double v) {
  if (!std::isfinite(v)) return v;
  return std::stod(fmt12(v));
}

int cmd_oneshot(const ProblemConfig& cfg, const std::string& out_dir) {
  Csv csv({"rho", "symbol", "q", "v_rho", "g_rho", "g_lower", "g_upper"});
  ordered_json summary;
  summary["command"] = "oneshot";
  summary["delta"] = sig12(cfg.model.delta);
  ordered_json per_rho = ordered_json::array();

  const BallIndex balls = build_ball_index(cfg.model);
  try {
    for (double rho : cfg.rho_list) {
      const Strategy strategy = resolve_strategy(cfg, rho);
      const MomentReport rep = expected_moments(cfg.source, strategy, balls, rho);
      const double h = distortion_renyi(cfg.source, cfg.model, 1.0 / (1.0 + rho)).value;
      for (const auto& ps : rep.per_symbol)
        csv.add_row({fmt12(rho), cfg.source.symbols[ps.x], fmt12(ps.q), fmt12(ps.v), fmt12(ps.g),
                     fmt12(ps.g_lower), fmt12(ps.g_upper)});
      ordered_json r;
      r["rho"] = sig12(rho);
      r["strategy"] = pmf_json(strategy.pmf);
      r["expected_v"] = sig12(rep.expected_v);
      r["expected_g"] = sig12(rep.expected_g);
      r["log_expected_v"] = sig12(rep.log_expected_v);
      r["log_expected_g"] = sig12(rep.log_expected_g);
      r["h_delta"] = sig12(h);
      r["bound_rhs_v_log"] = sig12(rho * h);
      const int irho = static_cast<int>(std::lround(rho));
      if (rep.rho_integral) r["bound_rhs_g_log"] = sig12(rho * h + std::lgamma(irho + 1.0));
      if (cfg.strategy_kind == ProblemConfig::StrategyKind::Tilted) {
        const OneShotReport os = oneshot_achievability(cfg.source, cfg.model, rho);
        ordered_json qmap = ordered_json::array();
        for (int x : os.quantizer.map) qmap.push_back(cfg.model.repro_alphabet[x]);
        r["quantizer"] = qmap;
        r["quantized_law"] = pmf_json(os.quantized_law);
        r["bound_holds"] = os.moments.log_expected_v <= os.moments.thm_rhs_v_log + 1e-12;
      }
      per_rho.push_back(std::move(r));
    }
  } catch (const ZeroBallMass& e) {
    summary["error"] = e.what();
    summary["error_symbol"] = e.symbol >= 0 ? cfg.source.symbols[e.symbol] : "?";
    write_summary(out_dir, "oneshot_summary.json", summary);
    std::cerr << "oneshot: " << e.what() << "\n";
    return kInfiniteMoment;
  }
  summary["per_rho"] = std::move(per_rho);
  write_file(out_dir, "oneshot_report.csv", csv.str());
  write_summary(out_dir, "oneshot_summary.json", summary);
  std::cout << "oneshot: wrote " << out_dir << "/oneshot_report.csv\n";
  return kOk;
}

int cmd_exponent(const ProblemConfig& cfg, const std::string& out_dir) {
  Csv csv({"rho", "e_iid", "e_sync", "penalty", "bracket_lower", "bracket_upper", "lambda",
           "converged"});
  ordered_json summary;
  summary["command"] = "exponent";
  summary["delta"] = sig12(cfg.model.delta);
  ordered_json per_rho = ordered_json::array();
  bool all_converged = true;

  try {
    for (double rho : cfg.rho_list) {
      const ExponentReport opt = optimal_iid_exponent(cfg.source, cfg.model, rho, cfg.solver);
      const ExponentReport sync = synchronous_exponent(cfg.source, cfg.model, rho, cfg.solver);
      const double penalty = opt.value - sync.value;
      all_converged = all_converged && opt.converged && sync.converged;
      csv.add_row({fmt12(rho), fmt12(opt.value), fmt12(sync.value), fmt12(penalty),
                   fmt12(opt.bracket_lower), fmt12(opt.bracket_upper), fmt12(opt.lambda),
                   opt.converged && sync.converged ? "1" : "0"});
      ordered_json r;
      r["rho"] = sig12(rho);
      r["e_iid"] = sig12(opt.value);
      r["e_sync"] = sig12(sync.value);
      r["penalty"] = sig12(penalty);
      r["bracket_lower"] = sig12(opt.bracket_lower);
      r["bracket_upper"] = sig12(opt.bracket_upper);
      r["optimal_strategy"] = pmf_json(opt.outer_witness);
      r["worst_source_iid"] = pmf_json(opt.inner_witness);
      r["worst_source_sync"] = pmf_json(sync.inner_witness);
      r["lambda"] = sig12(opt.lambda);
      r["iterations"] = opt.iterations + sync.iterations;
      r["witness_residual"] = sig12(opt.witness_residual);
      r["converged"] = opt.converged && sync.converged;
      if (cfg.strategy_kind != ProblemConfig::StrategyKind::Optimize) {
        const Strategy s = resolve_strategy(cfg, rho);
        const ExponentReport fixed =
            iid_strategy_exponent(cfg.source, s, cfg.model, rho, cfg.solver);
        r["configured_strategy"] = pmf_json(s.pmf);
        r["configured_strategy_exponent"] = sig12(fixed.value);
      }
      per_rho.push_back(std::move(r));
    }
  } catch (const InfiniteExponent& e) {
    summary["error"] = e.what();
    write_summary(out_dir, "exponent_summary.json", summary);
    std::cerr << "exponent: " << e.what() << "\n";
    return kInfiniteMoment;
  }
  summary["per_rho"] = std::move(per_rho);
  summary["converged"] = all_converged;
  write_file(out_dir, "exponent_report.csv", csv.str());
  write_summary(out_dir, "exponent_summary.json", summary);
  std::cout << "exponent: wrote " << out_dir << "/exponent_report.csv\n";
  return all_converged ? kOk : kNonConvergence;
}

int cmd_rd(const ProblemConfig& cfg, const std::string& out_dir) {
  const RDResult rd = rate_distortion(cfg.source.pmf, cfg.model, cfg.solver);
  const MinIdentityReport ident = verify_min_identity(cfg.source.pmf, cfg.model, cfg.solver);

  Csv csv({"delta", "rate_distortion", "mismatched_min", "identity_gap", "lambda", "converged"});
  csv.add_row({fmt12(cfg.model.delta), fmt12(rd.value), fmt12(ident.mismatched_min),
               fmt12(ident.gap), fmt12(rd.lambda), rd.converged && ident.converged ? "1" : "0"});

  ordered_json summary;
  summary["command"] = "rd";
  summary["delta"] = sig12(cfg.model.delta);
  summary["rate_distortion"] = sig12(rd.value);
  summary["mismatched_min"] = sig12(ident.mismatched_min);
  summary["identity_gap"] = sig12(ident.gap);
  summary["minimizing_output_law"] = pmf_json(ident.minimizer);
  summary["lambda"] = sig12(rd.lambda);
  summary["residual"] = sig12(rd.residual);
  summary["iterations"] = rd.iterations + ident.iterations;
  summary["converged"] = rd.converged && ident.converged;
  if (cfg.strategy_kind == ProblemConfig::StrategyKind::Explicit ||
      cfg.strategy_kind == ProblemConfig::StrategyKind::Uniform) {
    const Strategy s = resolve_strategy(cfg, cfg.rho_list.front());
    const RDResult mm = mismatched_rd(cfg.source.pmf, s.pmf, cfg.model, cfg.solver);
    summary["mismatched_at_configured_strategy"] =
        mm.finite ? ordered_json(sig12(mm.value)) : ordered_json("infinite");
  }
  write_file(out_dir, "rd_report.csv", csv.str());
  write_summary(out_dir, "rd_summary.json", summary);
  std::cout << "rd: R(delta) = " << fmt12(rd.value) << ", identity gap = " << fmt12(ident.gap)
            << "\n";
  return rd.converged && ident.converged ? kOk : kNonConvergence;
}

int cmd_oracle(const ProblemConfig& cfg, const std::string& out_dir,
               const std::vector<int>& n_list) {
  const std::vector<int>& ns = n_list.empty() ? cfg.n_list : n_list;
  if (ns.empty()) {
    std::cerr << "oracle: no n_list given (config n_list or --n-list)\n";
    return kConfigError;
  }
  Csv csv({"rho", "n", "rate_v", "rate_g", "gap_v", "gap_g"});
  ordered_json summary;
  summary["command"] = "oracle";
  ordered_json per_rho = ordered_json::array();
  try {
    for (double rho : cfg.rho_list) {
      const Strategy s = resolve_strategy(cfg, rho);
      const ConvergenceTable table =
          exponent_convergence_check(cfg.source, s, cfg.model, rho, ns);
      for (const auto& row : table.rows)
        csv.add_row({fmt12(rho), std::to_string(row.n), fmt12(row.rate_v), fmt12(row.rate_g),
                     fmt12(row.gap_v), fmt12(row.gap_g)});
      ordered_json r;
      r["rho"] = sig12(rho);
      r["strategy"] = pmf_json(s.pmf);
      r["exponent"] = sig12(table.exponent);
      r["final_gap"] = sig12(table.final_gap);
      r["last_three_monotone"] = table.last_three_monotone;
      r["fitted_envelope_c"] = sig12(table.fitted_envelope_c);
      r["final_under_envelope"] = table.final_under_envelope;
      per_rho.push_back(std::move(r));
    }
  } catch (const InstanceTooLarge& e) {
    summary["error"] = e.what();
    write_summary(out_dir, "oracle_summary.json", summary);
    std::cerr << "oracle: " << e.what() << "\n";
    return kInstanceTooLarge;
  }
  summary["per_rho"] = std::move(per_rho);
  write_file(out_dir, "oracle_report.csv", csv.str());
  write_summary(out_dir, "oracle_summary.json", summary);
  std::cout << "oracle: wrote " << out_dir << "/oracle_report.csv\n";
  return kOk;
}

int cmd_simulate(const ProblemConfig& cfg, const std::string& out_dir) {
  const Strategy s = resolve_strategy(cfg, cfg.rho_list.front());
  const SimReport rep = simulate_block(cfg.source, s, cfg.model, cfg.sim);

  Csv csv({"rho", "estimate", "std_error", "exact"});
  for (const auto& row : rep.rows)
    csv.add_row({fmt12(row.rho), fmt12(row.estimate), fmt12(row.std_error), fmt12(row.exact)});

  ordered_json summary;
  summary["command"] = "simulate";
  summary["mode"] = rep.mode;
  summary["trials"] = rep.trials;
  summary["n"] = rep.n;
  summary["master_seed"] = rep.master_seed;
  summary["workers"] = rep.workers;
  summary["strategy"] = pmf_json(s.pmf);
  summary["censor_fraction"] = sig12(rep.censor_fraction);
  summary["cap_too_low_warning"] = rep.cap_too_low;
  ordered_json rows = ordered_json::array();
  for (const auto& row : rep.rows) {
    ordered_json r;
    r["rho"] = sig12(row.rho);
    r["estimate"] = sig12(row.estimate);
    r["std_error"] = sig12(row.std_error);
    if (std::isfinite(row.exact)) r["exact"] = sig12(row.exact);
    rows.push_back(std::move(r));
  }
  summary["per_rho"] = std::move(rows);
  write_file(out_dir, "simulate_report.csv", csv.str());
  write_summary(out_dir, "simulate_summary.json", summary);
  if (rep.cap_too_low)
    std::cout << "simulate: WARNING censor fraction " << fmt12(rep.censor_fraction)
              << " exceeds 1%; estimates are biased low\n";
  std::cout << "simulate: wrote " << out_dir << "/simulate_report.csv\n";
  return kOk;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Randomized guessing under a distortion budget: one-shot moments, "
               "asymptotic exponents, exact small-n oracles, and simulation"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", n_list_arg;
  bool have_seed = false, have_workers = false;
  std::uint64_t seed = 0;
  int workers = 1;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "problem config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override sim.master_seed")->each([&](const std::string&) {
      have_seed = true;
    });
    sub->add_option("--workers", workers, "override sim.workers")->each([&](const std::string&) {
      have_workers = true;
    });
    sub->add_option("--n-list", n_list_arg, "comma-separated blocklengths");
  };

  CLI::App* oneshot = app.add_subcommand("oneshot", "one-shot moments and bounds");
  CLI::App* exponent = app.add_subcommand("exponent", "asymptotic exponents and penalty");
  CLI::App* rd = app.add_subcommand("rd", "rate-distortion and the min identity");
  CLI::App* oracle = app.add_subcommand("oracle", "exact small-n convergence tables");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo validation");
  for (CLI::App* sub : {oneshot, exponent, rd, oracle, simulate}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    ProblemConfig cfg = load_config(config_path);
    if (have_seed) cfg.sim.master_seed = seed;
    if (have_workers) cfg.sim.workers = workers;
    std::vector<int> ns;
    if (!n_list_arg.empty()) {
      std::stringstream ss(n_list_arg);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) ns.push_back(std::stoi(tok));
    }
    if (oneshot->parsed()) return cmd_oneshot(cfg, out_dir);
    if (exponent->parsed()) return cmd_exponent(cfg, out_dir);
    if (rd->parsed()) return cmd_rd(cfg, out_dir);
    if (oracle->parsed()) return cmd_oracle(cfg, out_dir, ns);
    if (simulate->parsed()) return cmd_simulate(cfg, out_dir);
    return kConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ZeroBallMass& e) {
    std::cerr << e.what() << "\n";
    return kInfiniteMoment;
  } catch (const InfiniteExponent& e) {
    std::cerr << e.what() << "\n";
    return kInfiniteMoment;
  } catch (const InstanceTooLarge& e) {
    std::cerr << e.what() << "\n";
    return kInstanceTooLarge;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace gw::cli
