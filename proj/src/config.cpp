// SPDX-License-Identifier: Apache-2.0
#include "muonlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <type_traits>

#include "muonlab/csv.hpp"
#include "muonlab/error.hpp"

namespace muonlab {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

struct Ctx {
  std::string key;
  std::size_t line = 0;
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "config line " << line << ", key '" << key << "': " << what;
    throw Error(ErrorKind::Config, os.str());
  }
};

double parse_real(const Ctx& c, const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || p != end || !std::isfinite(v)) c.fail("not a finite number: '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const Ctx& c, const std::string& s) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || p != end) c.fail("not a nonnegative integer: '" + s + "'");
  return v;
}

std::size_t parse_size(const Ctx& c, const std::string& s) { return static_cast<std::size_t>(parse_u64(c, s)); }

template <class T, class F>
std::vector<T> parse_list(const Ctx& c, const std::string& v, F one) {
  std::vector<T> out;
  for (const std::string& item : split_list(v)) out.push_back(one(c, item));
  if (out.empty()) c.fail("empty list");
  return out;
}

void check(const Ctx& c, bool ok, const std::string& what) {
  if (!ok) c.fail(what);
}

Algorithm algorithm_from(const Ctx& c, const std::string& s) {
  if (s == "muon") return Algorithm::Muon;
  if (s == "gd") return Algorithm::GD;
  if (s == "signgd") return Algorithm::SignGD;
  if (s == "scaledgd") return Algorithm::ScaledGD;
  c.fail("unknown algorithm '" + s + "' (muon|gd|signgd|scaledgd)");
}

const std::set<std::string> kSuites = {"msign", "oracle", "lemmas", "lowerbounds", "gradients", "montecarlo", "all"};

using Setter = std::function<void(ExperimentConfig&, const Ctx&, const std::string&)>;

struct KeyDoc {
  const char* key;
  const char* doc;
  Setter set;
};

const std::vector<KeyDoc>& keys() {
  static const std::vector<KeyDoc> table = {
      {"kind", "mf_sweep | icl_sweep | rank_sweep | lower_bound | precond_viz | verify",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         if (v == "mf_sweep") c.kind = ExperimentKind::MfSweep;
         else if (v == "icl_sweep") c.kind = ExperimentKind::IclSweep;
         else if (v == "rank_sweep") c.kind = ExperimentKind::RankSweep;
         else if (v == "lower_bound") c.kind = ExperimentKind::LowerBound;
         else if (v == "precond_viz") c.kind = ExperimentKind::PrecondViz;
         else if (v == "verify") c.kind = ExperimentKind::Verify;
         else x.fail("unknown experiment kind '" + v + "'");
       }},
      {"d", "ambient dimension (default 100)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.d = parse_size(x, v);
         check(x, c.d >= 1 && c.d <= 2048, "d must lie in [1, 2048]");
       }},
      {"r", "target rank (default 2)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.r = parse_size(x, v);
         check(x, c.r >= 1, "r must be >= 1");
       }},
      {"k", "search rank(s), comma-separated (default 2)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.k = parse_list<std::size_t>(x, v, parse_size);
         for (std::size_t k : c.k) check(x, k >= 1, "k must be >= 1");
       }},
      {"kappa", "condition numbers, comma-separated (default 1,5,25,125,625)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.kappa = parse_list<double>(x, v, parse_real);
         for (double k : c.kappa) check(x, k >= 1.0, "kappa must be >= 1");
       }},
      {"algorithms", "muon,gd,signgd,scaledgd (default all four)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.algorithms = parse_list<Algorithm>(x, v, algorithm_from);
       }},
      {"schedule", "exponential | plateau | constant (default plateau)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         if (v == "exponential") c.schedule = ScheduleKind::Exponential;
         else if (v == "plateau") c.schedule = ScheduleKind::Plateau;
         else if (v == "constant") c.schedule = ScheduleKind::Constant;
         else x.fail("unknown schedule '" + v + "'");
       }},
      {"rho", "exponential decay rate in [0.5, 1) (default 0.5)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.rho = parse_real(x, v);
         check(x, c.rho >= 0.5 && c.rho < 1.0, "rho must lie in [1/2, 1)");
       }},
      {"eta0", "initial step size for every algorithm (default per algorithm)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.eta0 = parse_real(x, v);
         check(x, *c.eta0 > 0.0, "eta0 must be positive");
       }},
      {"eta0_muon", "initial step size for muon", nullptr},
      {"eta0_gd", "initial step size for gd", nullptr},
      {"eta0_signgd", "initial step size for signgd", nullptr},
      {"eta0_scaledgd", "initial step size for scaledgd", nullptr},
      {"prefactor_mode", "fixed | per_iteration (default fixed)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         if (v == "fixed") c.prefactor_mode = PrefactorMode::FixedOnce;
         else if (v == "per_iteration") c.prefactor_mode = PrefactorMode::PerIteration;
         else x.fail("unknown prefactor mode '" + v + "'");
       }},
      {"prefactor_min", "lower end of the prefactor draw (default 1)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.prefactor_min = parse_real(x, v);
         check(x, c.prefactor_min > 0.0, "prefactor_min must be positive");
       }},
      {"prefactor_max", "upper end of the prefactor draw (default 2)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.prefactor_max = parse_real(x, v);
         check(x, c.prefactor_max > 0.0, "prefactor_max must be positive");
       }},
      {"decay", "plateau decay factor in (0, 1) (default 0.3)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.decay = parse_real(x, v);
         check(x, c.decay > 0.0 && c.decay < 1.0, "decay must lie in (0, 1)");
       }},
      {"patience", "plateau patience in iterations (default 50)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         const std::size_t p = parse_size(x, v);
         check(x, p >= 1 && p <= 1000000, "patience must lie in [1, 1e6]");
         c.patience = static_cast<int>(p);
       }},
      {"plateau_threshold", "relative loss improvement that resets the plateau counter (default 1e-4)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.plateau_threshold = parse_real(x, v);
         check(x, c.plateau_threshold >= 0.0 && c.plateau_threshold < 1.0, "plateau_threshold must lie in [0, 1)");
       }},
      {"lambda_max", "largest target eigenvalue for MF (default 1)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.lambda_max = parse_real(x, v);
         check(x, c.lambda_max > 0.0, "lambda_max must be positive");
       }},
      {"sigma_min", "smallest eigenvalue of S for ICL (default 1)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.sigma_min = parse_real(x, v);
         check(x, c.sigma_min > 0.0, "sigma_min must be positive");
       }},
      {"alpha", "MF initialization scale, U0 = alpha * Haar (default 0.1)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.alpha = parse_real(x, v);
         check(x, c.alpha > 0.0, "alpha must be positive");
       }},
      {"T", "iteration budget (default 5000)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.T = parse_size(x, v);
         check(x, c.T >= 1 && c.T <= 10000000, "T must lie in [1, 1e7]");
       }},
      {"epsilon", "first-hit thresholds on spectral_error (default 1e-6,1e-10)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.epsilon = parse_list<double>(x, v, parse_real);
         for (double e : c.epsilon) check(x, e > 0.0, "epsilon must be positive");
       }},
      {"stop_error", "early stop once spectral_error <= this; 0 disables (default 1e-12)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.stop_error = parse_real(x, v);
         check(x, c.stop_error >= 0.0, "stop_error must be >= 0");
       }},
      {"seed", "base seed (default 42)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) { c.seed = parse_u64(x, v); }},
      {"replicates", "independent replicates per cell (default 1)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.replicates = parse_size(x, v);
         check(x, c.replicates >= 1 && c.replicates <= 10000, "replicates must lie in [1, 10000]");
       }},
      {"out", "output directory (default out)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         check(x, !v.empty(), "out must be nonempty");
         c.out = v;
       }},
      {"mu", "Muon momentum in [0, 1) (default 0)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.mu = parse_real(x, v);
         check(x, c.mu >= 0.0 && c.mu < 1.0, "mu must lie in [0, 1)");
       }},
      {"msign_backend", "exact | newton_schulz (default exact)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         if (v == "exact") c.msign_backend = MsignBackend::Exact;
         else if (v == "newton_schulz") c.msign_backend = MsignBackend::NewtonSchulz;
         else x.fail("unknown msign backend '" + v + "'");
       }},
      {"ns_max_iters", "Newton-Schulz iteration cap (default 64)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         const std::size_t n = parse_size(x, v);
         check(x, n >= 1 && n <= 10000, "ns_max_iters must lie in [1, 10000]");
         c.ns.max_iters = static_cast<int>(n);
       }},
      {"ns_orth_tol", "Newton-Schulz orthogonality tolerance (default 1e-8)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.ns.orth_tol = parse_real(x, v);
         check(x, c.ns.orth_tol > 0.0, "ns_orth_tol must be positive");
       }},
      {"steps", "precond_viz report steps (default 0,500,1000)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.steps = parse_list<std::size_t>(x, v, parse_size);
       }},
      {"suite", "verify suite: msign | oracle | lemmas | lowerbounds | gradients | montecarlo | all",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         check(x, kSuites.count(v) == 1, "unknown suite '" + v + "'");
         c.suite = v;
       }},
      {"family", "lower_bound family: quadratic | mf | icl (default quadratic)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         if (v == "quadratic") c.family = LowerBoundFamily::Quadratic;
         else if (v == "mf") c.family = LowerBoundFamily::Mf;
         else if (v == "icl") c.family = LowerBoundFamily::Icl;
         else x.fail("unknown family '" + v + "'");
       }},
      {"r0", "lower_bound MF radius (default 1/16)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.r0 = parse_real(x, v);
         check(x, c.r0 > 0.0, "r0 must be positive");
       }},
      {"lb_rho", "lower_bound schedule decay eta_t = eta0 lb_rho^t (default 0.98)",
       [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
         c.lb_rho = parse_real(x, v);
         check(x, c.lb_rho > 0.0 && c.lb_rho <= 1.0, "lb_rho must lie in (0, 1]");
       }},
  };
  return table;
}

}  // namespace

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::MfSweep: return "mf_sweep";
    case ExperimentKind::IclSweep: return "icl_sweep";
    case ExperimentKind::RankSweep: return "rank_sweep";
    case ExperimentKind::LowerBound: return "lower_bound";
    case ExperimentKind::PrecondViz: return "precond_viz";
    case ExperimentKind::Verify: return "verify";
  }
  return "?";
}

const char* to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::Exponential: return "exponential";
    case ScheduleKind::Plateau: return "plateau";
    case ScheduleKind::Constant: return "constant";
  }
  return "?";
}

const char* to_string(LowerBoundFamily f) {
  switch (f) {
    case LowerBoundFamily::Quadratic: return "quadratic";
    case LowerBoundFamily::Mf: return "mf";
    case LowerBoundFamily::Icl: return "icl";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  Ctx c{"algorithms", 0};
  return algorithm_from(c, name);
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    Ctx ctx{trim(line.substr(0, eq)), line_no};
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << "config line " << line_no << ": expected 'key = value', got '" << line << "'";
      throw Error(ErrorKind::Config, os.str());
    }
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(ctx.key).second) ctx.fail("duplicate key");
    if (value.empty()) ctx.fail("missing value");
    if (ctx.key.rfind("eta0_", 0) == 0) {
      const Algorithm a = algorithm_from(ctx, ctx.key.substr(5));
      const double v = parse_real(ctx, value);
      check(ctx, v > 0.0, "step size must be positive");
      cfg.eta0_per_algo[a] = v;
      continue;
    }
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const KeyDoc& k) { return ctx.key == k.key && k.set != nullptr; });
    if (it == table.end()) ctx.fail("unknown key");
    it->set(cfg, ctx, value);
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::Config, "config: " + what); };
  const bool mf = cfg.kind == ExperimentKind::MfSweep || cfg.kind == ExperimentKind::RankSweep ||
                  cfg.kind == ExperimentKind::PrecondViz;
  if (mf) {
    if (cfg.r > cfg.d) fail("r must not exceed d");
    for (std::size_t k : cfg.k) {
      if (k < cfg.r || k > cfg.d) fail("each k must satisfy r <= k <= d");
    }
  }
  if (cfg.kind == ExperimentKind::IclSweep) {
    for (Algorithm a : cfg.algorithms)
      if (a == Algorithm::ScaledGD) fail("scaledgd is only defined for matrix factorization");
  }
  if (cfg.prefactor_min > cfg.prefactor_max) fail("prefactor_min must not exceed prefactor_max");
  if (cfg.kind == ExperimentKind::LowerBound) {
    for (double k : cfg.kappa) {
      if (cfg.family == LowerBoundFamily::Icl && k < 2.0) fail("lower_bound icl family needs kappa >= 2");
    }
  }
}

double default_eta0(const ExperimentConfig& cfg, Algorithm a, double kappa_value) {
  if (const auto it = cfg.eta0_per_algo.find(a); it != cfg.eta0_per_algo.end()) return it->second;
  if (cfg.eta0) return *cfg.eta0;
  if (cfg.kind == ExperimentKind::IclSweep) {
    const double s_min = cfg.sigma_min;
    switch (a) {
      case Algorithm::Muon: return 1.0 / s_min;
      // 1 / lambda_max(S)^3 with lambda_max(S)^3 = kappa_eff sigma_min^3.
      case Algorithm::GD: return 1.0 / (kappa_value * s_min * s_min * s_min);
      case Algorithm::SignGD: return 0.1 / s_min;
      case Algorithm::ScaledGD: break;
    }
    throw Error(ErrorKind::Config, "config: scaledgd is only defined for matrix factorization");
  }
  switch (a) {
    case Algorithm::Muon: return std::sqrt(cfg.lambda_max);
    case Algorithm::GD: return 0.25 / cfg.lambda_max;
    case Algorithm::SignGD: return 0.01;
    case Algorithm::ScaledGD: return 0.5;
  }
  return 1.0;
}

std::string config_key_reference() {
  std::ostringstream os;
  for (const KeyDoc& k : keys()) os << "  " << k.key << ": " << k.doc << "\n";
  return os.str();
}

std::string render_config(const ExperimentConfig& c) {
  std::ostringstream os;
  auto list = [&](const auto& v) {
    std::ostringstream l;
    for (std::size_t i = 0; i < v.size(); ++i) {
      l << (i ? "," : "");
      if constexpr (std::is_floating_point_v<std::decay_t<decltype(v[i])>>) l << format_double(v[i]);
      else l << v[i];
    }
    return l.str();
  };
  std::vector<std::string> algos;
  for (Algorithm a : c.algorithms) algos.emplace_back(to_string(a));
  os << "kind = " << to_string(c.kind) << "\n"
     << "d = " << c.d << "\nr = " << c.r << "\nk = " << list(c.k) << "\nkappa = " << list(c.kappa) << "\n"
     << "algorithms = " << list(algos) << "\nschedule = " << to_string(c.schedule) << "\nrho = " << format_double(c.rho) << "\n";
  for (Algorithm a : c.algorithms) {
    if (c.kind == ExperimentKind::IclSweep && a == Algorithm::ScaledGD) continue;
    const auto it = c.eta0_per_algo.find(a);
    if (it != c.eta0_per_algo.end()) os << "eta0_" << to_string(a) << " = " << format_double(it->second) << "\n";
    else if (c.eta0) os << "eta0_" << to_string(a) << " = " << format_double(*c.eta0) << "\n";
  }
  os << "prefactor_mode = " << (c.prefactor_mode == PrefactorMode::FixedOnce ? "fixed" : "per_iteration") << "\n"
     << "prefactor_min = " << format_double(c.prefactor_min) << "\nprefactor_max = " << format_double(c.prefactor_max) << "\n"
     << "decay = " << format_double(c.decay) << "\npatience = " << c.patience
     << "\nplateau_threshold = " << format_double(c.plateau_threshold) << "\n"
     << "lambda_max = " << format_double(c.lambda_max) << "\nsigma_min = " << format_double(c.sigma_min) << "\nalpha = " << format_double(c.alpha) << "\n"
     << "T = " << c.T << "\nepsilon = " << list(c.epsilon) << "\nstop_error = " << format_double(c.stop_error) << "\n"
     << "seed = " << c.seed << "\nreplicates = " << c.replicates << "\nout = " << c.out << "\n"
     << "mu = " << format_double(c.mu) << "\nmsign_backend = " << (c.msign_backend == MsignBackend::Exact ? "exact" : "newton_schulz")
     << "\nns_max_iters = " << c.ns.max_iters << "\nns_orth_tol = " << format_double(c.ns.orth_tol) << "\n"
     << "steps = " << list(c.steps) << "\nsuite = " << c.suite << "\nfamily = " << to_string(c.family) << "\n"
     << "r0 = " << format_double(c.r0) << "\nlb_rho = " << format_double(c.lb_rho) << "\n";
  return os.str();
}

}  // namespace muonlab
