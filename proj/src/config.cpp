#include "gw/config.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "gw/errors.hpp"
#include "gw/exponents.hpp"
#include "gw/quantizer.hpp"

namespace gw {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

struct RationalEntry {
  double value = 0.0;
  std::int64_t num = 0, den = 1;
  bool exact = false;
};

RationalEntry parse_entry(const json& j, const std::string& path) {
  RationalEntry r;
  if (j.is_number_integer()) {
    r.num = j.get<std::int64_t>();
    r.den = 1;
    r.value = static_cast<double>(r.num);
    r.exact = true;
    return r;
  }
  if (j.is_number()) {
    r.value = j.get<double>();
    return r;
  }
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) fail(path, "expected \"a/b\" rational string");
      r.num = std::stoll(s.substr(0, slash));
      r.den = std::stoll(s.substr(slash + 1));
    } catch (const std::exception&) {
      fail(path, "cannot parse rational '" + s + "'");
    }
    if (r.den <= 0) fail(path, "rational denominator must be positive");
    if (r.num < 0) fail(path, "distortion rationals must be nonnegative");
    r.value = static_cast<double>(r.num) / static_cast<double>(r.den);
    r.exact = true;
    return r;
  }
  fail(path, "expected a number or an \"a/b\" string");
}

std::vector<double> parse_pmf(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of probabilities");
  std::vector<double> p;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
    p.push_back(j[i].get<double>());
  }
  try {
    validate_pmf(p);
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return p;
}

std::vector<std::string> parse_labels(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of labels");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (v.is_string())
      out.push_back(v.get<std::string>());
    else
      out.push_back(v.dump());
  }
  return out;
}

std::int64_t lcm64(std::int64_t a, std::int64_t b, const std::string& path) {
  const std::int64_t g = std::gcd(a, b);
  const __int128 l = static_cast<__int128>(a) / g * b;
  if (l > static_cast<__int128>(1) << 60) fail(path, "rational denominators overflow the exact mode");
  return static_cast<std::int64_t>(l);
}

}  // namespace

ProblemConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");

  ProblemConfig cfg;

  if (!root.contains("source") || !root["source"].is_object())
    throw ConfigError("source: required object with 'symbols' and 'pmf'");
  const json& src = root["source"];
  if (!src.contains("pmf")) throw ConfigError("source.pmf: required");
  cfg.source.pmf = parse_pmf(src["pmf"], "source.pmf");
  if (src.contains("symbols"))
    cfg.source.symbols = parse_labels(src["symbols"], "source.symbols");
  else
    for (std::size_t i = 0; i < cfg.source.pmf.size(); ++i)
      cfg.source.symbols.push_back(std::to_string(i));
  try {
    cfg.source.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("source: ") + e.what());
  }

  std::vector<std::string> repro = cfg.source.symbols;
  if (root.contains("repro")) repro = parse_labels(root["repro"], "repro");

  if (!root.contains("distortion") || !root["distortion"].is_object())
    throw ConfigError("distortion: required object with 'matrix' and 'delta'");
  const json& dj = root["distortion"];
  if (!dj.contains("matrix") || !dj["matrix"].is_array())
    throw ConfigError("distortion.matrix: required array of rows");
  const json& mj = dj["matrix"];
  const int nx = static_cast<int>(cfg.source.pmf.size());
  const int nxh = static_cast<int>(repro.size());
  if (static_cast<int>(mj.size()) != nx)
    throw ConfigError("distortion.matrix: expected " + std::to_string(nx) + " rows");
  Mat d(nx, nxh);
  bool all_exact = true;
  std::vector<RationalEntry> entries;
  for (int x = 0; x < nx; ++x) {
    const std::string rp = "distortion.matrix[" + std::to_string(x) + "]";
    if (!mj[x].is_array() || static_cast<int>(mj[x].size()) != nxh)
      fail(rp, "expected a row of " + std::to_string(nxh) + " entries");
    for (int xh = 0; xh < nxh; ++xh) {
      RationalEntry e = parse_entry(mj[x][xh], rp + "[" + std::to_string(xh) + "]");
      if (!(e.value >= 0.0) || !std::isfinite(e.value))
        fail(rp + "[" + std::to_string(xh) + "]", "distortion entries must be finite and >= 0");
      d(x, xh) = e.value;
      all_exact = all_exact && e.exact;
      entries.push_back(e);
    }
  }
  if (!dj.contains("delta")) throw ConfigError("distortion.delta: required");
  RationalEntry delta = parse_entry(dj["delta"], "distortion.delta");
  if (!(delta.value >= 0.0)) throw ConfigError("distortion.delta: must be >= 0");
  all_exact = all_exact && delta.exact;

  cfg.model.source_alphabet = cfg.source.symbols;
  cfg.model.repro_alphabet = repro;
  cfg.model.d = std::move(d);
  cfg.model.delta = delta.value;
  if (all_exact) {
    std::int64_t den = 1;
    for (const auto& e : entries) den = lcm64(den, e.den, "distortion.matrix");
    ExactDistortion ex;
    ex.den = den;
    ex.delta_num = delta.num;
    ex.delta_den = delta.den;
    for (const auto& e : entries) ex.num.push_back(e.num * (den / e.den));
    cfg.model.exact = std::move(ex);
  }
  try {
    cfg.model.validate();
    build_ball_index(cfg.model);  // rejects empty balls with the symbol named
  } catch (const Error& e) {
    throw ConfigError(std::string("distortion: ") + e.what());
  }

  if (root.contains("rho")) {
    const json& rj = root["rho"];
    cfg.rho_list.clear();
    if (rj.is_number()) {
      cfg.rho_list.push_back(rj.get<double>());
    } else if (rj.is_array() && !rj.empty()) {
      for (const auto& v : rj) {
        if (!v.is_number()) throw ConfigError("rho: entries must be numbers");
        cfg.rho_list.push_back(v.get<double>());
      }
    } else {
      throw ConfigError("rho: expected a positive number or nonempty array");
    }
    for (double r : cfg.rho_list)
      if (!(r > 0.0)) throw ConfigError("rho: entries must be positive");
  }

  if (root.contains("strategy")) {
    const json& sj = root["strategy"];
    if (!sj.is_object() || !sj.contains("kind"))
      throw ConfigError("strategy: expected object with 'kind'");
    const std::string kind = sj["kind"].get<std::string>();
    if (kind == "explicit") {
      cfg.strategy_kind = ProblemConfig::StrategyKind::Explicit;
      if (!sj.contains("pmf")) throw ConfigError("strategy.pmf: required for kind=explicit");
      cfg.strategy_pmf = parse_pmf(sj["pmf"], "strategy.pmf");
      if (static_cast<int>(cfg.strategy_pmf.size()) != nxh)
        throw ConfigError("strategy.pmf: length must match the reproduction alphabet");
    } else if (kind == "tilted") {
      cfg.strategy_kind = ProblemConfig::StrategyKind::Tilted;
    } else if (kind == "uniform") {
      cfg.strategy_kind = ProblemConfig::StrategyKind::Uniform;
    } else if (kind == "optimize") {
      cfg.strategy_kind = ProblemConfig::StrategyKind::Optimize;
    } else {
      throw ConfigError("strategy.kind: expected explicit|tilted|uniform|optimize");
    }
  }

  if (root.contains("solver")) {
    const json& sj = root["solver"];
    if (!sj.is_object()) throw ConfigError("solver: expected an object");
    if (sj.contains("value_tol")) cfg.solver.value_tol = sj["value_tol"].get<double>();
    if (sj.contains("stall_iters")) cfg.solver.stall_iters = sj["stall_iters"].get<int>();
    if (sj.contains("max_iters")) cfg.solver.max_iters = sj["max_iters"].get<long>();
    if (sj.contains("feasibility_tol"))
      cfg.solver.feasibility_tol = sj["feasibility_tol"].get<double>();
    if (sj.contains("lambda_cap_scale"))
      cfg.solver.lambda_cap_scale = sj["lambda_cap_scale"].get<double>();
    if (!(cfg.solver.value_tol > 0.0) || cfg.solver.max_iters < 1 || cfg.solver.stall_iters < 1)
      throw ConfigError("solver: tolerances and iteration caps must be positive");
  }

  cfg.sim.rho_list = cfg.rho_list;
  if (root.contains("sim")) {
    const json& sj = root["sim"];
    if (!sj.is_object()) throw ConfigError("sim: expected an object");
    if (sj.contains("master_seed")) cfg.sim.master_seed = sj["master_seed"].get<std::uint64_t>();
    if (sj.contains("trials")) cfg.sim.trials = sj["trials"].get<long>();
    if (sj.contains("n")) cfg.sim.n = sj["n"].get<int>();
    if (sj.contains("guess_cap")) cfg.sim.guess_cap = sj["guess_cap"].get<std::uint64_t>();
    if (sj.contains("workers")) cfg.sim.workers = sj["workers"].get<int>();
    if (sj.contains("mode")) {
      const std::string m = sj["mode"].get<std::string>();
      if (m == "analytic")
        cfg.sim.mode = SimConfig::Mode::Analytic;
      else if (m == "literal")
        cfg.sim.mode = SimConfig::Mode::Literal;
      else
        throw ConfigError("sim.mode: expected analytic|literal");
    }
    try {
      cfg.sim.validate();
    } catch (const Error& e) {
      throw ConfigError(std::string("sim: ") + e.what());
    }
  }

  if (root.contains("n_list")) {
    const json& nj = root["n_list"];
    if (!nj.is_array() || nj.empty()) throw ConfigError("n_list: expected a nonempty array");
    for (const auto& v : nj) {
      const int n = v.get<int>();
      if (n < 1) throw ConfigError("n_list: entries must be >= 1");
      cfg.n_list.push_back(n);
    }
  }
  return cfg;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Strategy resolve_strategy(const ProblemConfig& cfg, double rho) {
  switch (cfg.strategy_kind) {
    case ProblemConfig::StrategyKind::Explicit:
      return Strategy{cfg.strategy_pmf};
    case ProblemConfig::StrategyKind::Uniform:
      return Strategy{std::vector<double>(cfg.model.nxh(), 1.0 / cfg.model.nxh())};
    case ProblemConfig::StrategyKind::Tilted: {
      const BallIndex balls = build_ball_index(cfg.model);
      const Quantizer q = greedy_quantizer(cfg.source, balls);
      return tilted_strategy(pushforward(cfg.source, q, cfg.model.nxh()), rho);
    }
    case ProblemConfig::StrategyKind::Optimize: {
      const ExponentReport rep = optimal_iid_exponent(cfg.source, cfg.model, rho, cfg.solver);
      return Strategy{rep.outer_witness};
    }
  }
  throw ConfigError("unknown strategy kind");
}

}  // namespace gw
