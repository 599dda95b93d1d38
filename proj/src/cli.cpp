#include "sgflow/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "sgflow/experiments.hpp"
#include "sgflow/mp.hpp"
#include "sgflow/result_io.hpp"
#include "sgflow/rng.hpp"
#include "sgflow/types.hpp"
#include "sgflow/weak_features.hpp"

namespace sgflow::cli {

namespace {

const std::map<std::string, std::vector<std::string>> kConfigSchema = {
    {"mp_asymptotics",
     {"alpha", "psi", "mu", "gamma_prime", "norm_beta_sq", "delta_sq", "nodes"}},
    {"weak_features", {"n", "d", "p", "gamma", "batch_size"}},
    {"experiments",
     {"t_grid", "alpha_grid", "subsets", "sgd_runs", "replicates", "quad_panels",
      "t_infinity", "scenario", "sde_steps", "mc_paths", "name"}},
    {"cli", {"output_dir", "seed", "threads", "verbosity"}},
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']') {
        throw ValidationError("config line " + std::to_string(lineno) +
                              ": unterminated section header");
      }
      section = trim(stripped.substr(1, stripped.size() - 2));
      if (kConfigSchema.find(section) == kConfigSchema.end()) {
        throw ValidationError("config: unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(lineno) +
                            ": expected key = value");
    }
    if (section.empty()) {
      throw ValidationError("config line " + std::to_string(lineno) +
                            ": key outside any section");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const auto& allowed = kConfigSchema.at(section);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError("config: unknown key '" + key + "' in section [" +
                            section + "]");
    }
    out[section + "." + key] = trim(stripped.substr(eq + 1));
  }
  return out;
}

std::string serialize_config(const std::map<std::string, std::string>& kv) {
  // Group by section; std::map ordering makes the output canonical.
  std::string out;
  std::string current_section;
  for (const auto& [key, value] : kv) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      throw ValidationError("serialize_config: key '" + key + "' lacks a section");
    }
    const std::string section = key.substr(0, dot);
    if (section != current_section) {
      if (!out.empty()) out += '\n';
      out += "[" + section + "]\n";
      current_section = section;
    }
    out += key.substr(dot + 1) + " = " + value + "\n";
  }
  return out;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

GridSpec parse_grid(const std::string& spec) {
  GridSpec grid;
  if (spec == "inf") {
    grid.is_infinite = true;
    return grid;
  }
  std::vector<std::string> parts;
  std::string token;
  std::istringstream in(spec);
  while (std::getline(in, token, ':')) parts.push_back(token);
  if (parts.size() < 3 || parts.size() > 4) {
    throw ValidationError("malformed grid spec '" + spec +
                          "' (want min:max:points[:log|:lin] or inf)");
  }
  double lo = 0.0, hi = 0.0;
  int points = 0;
  try {
    lo = std::stod(parts[0]);
    hi = std::stod(parts[1]);
    points = std::stoi(parts[2]);
  } catch (const std::exception&) {
    throw ValidationError("malformed grid spec '" + spec + "'");
  }
  if (parts.size() == 4) {
    if (parts[3] == "log") {
      grid.log_spaced = true;
    } else if (parts[3] == "lin") {
      grid.log_spaced = false;
    } else {
      throw ValidationError("grid spacing must be 'log' or 'lin', got '" + parts[3] + "'");
    }
  }
  if (points < 1 || hi < lo) throw ValidationError("malformed grid spec '" + spec + "'");
  grid.values = grid.log_spaced ? experiments::log_grid(lo, hi, points)
                                : experiments::linear_grid(lo, hi, points);
  return grid;
}

namespace {

struct CommonSettings {
  std::string config_path;
  std::string output_dir;
  std::string name;
  std::uint64_t seed = 12345;
  int threads = 0;
  int verbosity = 0;

  double alpha = 0.5;
  double psi = 2.5;
  double mu = 0.5;
  double gamma_prime = 1.0;
  double norm_beta_sq = 1.0;
  double delta_sq = 2.0;
  int nodes = 400;

  int n = 0;
  int d = 200;
  int p = 0;
  double gamma = 0.0;  // 0 means derive gamma_prime / d
  int batch_size = 1;

  std::string t_grid_spec;  // resolved per subcommand
  std::string alpha_grid_spec;
  int subsets = 300;
  int sgd_runs = 1;
  int replicates = 100;
  int quad_panels = 64;
  double t_infinity = 50.0;
  std::string scenario = "constant";
  int sde_steps = 2000;
  int mc_paths = 4000;
  long iters = 10000;
  long record_every = 100;
};

std::string resolve_t_spec(const CommonSettings& s, const char* fallback) {
  return s.t_grid_spec.empty() ? fallback : s.t_grid_spec;
}

std::string default_output_dir() {
  const char* env = std::getenv(kOutputDirEnv);
  return env && *env ? env : "results";
}

void apply_config(CommonSettings& s, const std::map<std::string, std::string>& kv) {
  const auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  const auto as_double = [](const std::string& v, const char* key) {
    try {
      return std::stod(v);
    } catch (const std::exception&) {
      throw ValidationError(std::string("config: bad number for ") + key);
    }
  };
  const auto as_int = [](const std::string& v, const char* key) {
    try {
      return std::stoi(v);
    } catch (const std::exception&) {
      throw ValidationError(std::string("config: bad integer for ") + key);
    }
  };
  if (auto* v = get("mp_asymptotics.alpha")) s.alpha = as_double(*v, "alpha");
  if (auto* v = get("mp_asymptotics.psi")) s.psi = as_double(*v, "psi");
  if (auto* v = get("mp_asymptotics.mu")) s.mu = as_double(*v, "mu");
  if (auto* v = get("mp_asymptotics.gamma_prime")) s.gamma_prime = as_double(*v, "gamma_prime");
  if (auto* v = get("mp_asymptotics.norm_beta_sq")) s.norm_beta_sq = as_double(*v, "norm_beta_sq");
  if (auto* v = get("mp_asymptotics.delta_sq")) s.delta_sq = as_double(*v, "delta_sq");
  if (auto* v = get("mp_asymptotics.nodes")) s.nodes = as_int(*v, "nodes");
  if (auto* v = get("weak_features.n")) s.n = as_int(*v, "n");
  if (auto* v = get("weak_features.d")) s.d = as_int(*v, "d");
  if (auto* v = get("weak_features.p")) s.p = as_int(*v, "p");
  if (auto* v = get("weak_features.gamma")) s.gamma = as_double(*v, "gamma");
  if (auto* v = get("weak_features.batch_size")) s.batch_size = as_int(*v, "batch_size");
  if (auto* v = get("experiments.t_grid")) s.t_grid_spec = *v;
  if (auto* v = get("experiments.alpha_grid")) s.alpha_grid_spec = *v;
  if (auto* v = get("experiments.subsets")) s.subsets = as_int(*v, "subsets");
  if (auto* v = get("experiments.sgd_runs")) s.sgd_runs = as_int(*v, "sgd_runs");
  if (auto* v = get("experiments.replicates")) s.replicates = as_int(*v, "replicates");
  if (auto* v = get("experiments.quad_panels")) s.quad_panels = as_int(*v, "quad_panels");
  if (auto* v = get("experiments.t_infinity")) s.t_infinity = as_double(*v, "t_infinity");
  if (auto* v = get("experiments.scenario")) s.scenario = *v;
  if (auto* v = get("experiments.sde_steps")) s.sde_steps = as_int(*v, "sde_steps");
  if (auto* v = get("experiments.mc_paths")) s.mc_paths = as_int(*v, "mc_paths");
  if (auto* v = get("experiments.name")) s.name = *v;
  if (auto* v = get("cli.output_dir")) s.output_dir = *v;
  if (auto* v = get("cli.seed")) s.seed = std::stoull(*v);
  if (auto* v = get("cli.threads")) s.threads = as_int(*v, "threads");
  if (auto* v = get("cli.verbosity")) s.verbosity = as_int(*v, "verbosity");
}

mp::AsymptoticParams asym_from(const CommonSettings& s) {
  mp::AsymptoticParams a;
  a.alpha = s.alpha;
  a.psi = s.psi;
  a.mu = s.mu;
  a.gamma_prime = s.gamma_prime;
  a.norm_beta_sq = s.norm_beta_sq;
  a.delta_sq = s.delta_sq;
  return a;
}

experiments::ExperimentConfig experiment_from(const CommonSettings& s,
                                              experiments::Kind kind) {
  experiments::ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.asym = asym_from(s);
  cfg.d = s.d;
  cfg.subsets = s.subsets;
  cfg.sgd_runs = s.sgd_runs;
  cfg.replicates = s.replicates;
  cfg.quad_panels = s.quad_panels;
  cfg.mp_nodes = s.nodes;
  cfg.t_infinity = s.t_infinity;
  cfg.sde_steps = s.sde_steps;
  cfg.mc_paths = s.mc_paths;
  cfg.seed = s.seed;
  cfg.threads = s.threads;
  cfg.scenario = s.scenario;
  cfg.name = s.name;
  return cfg;
}

void report_files(const CommonSettings& s, const io::ResultFiles& files) {
  if (s.verbosity >= 0) {
    std::cout << "wrote " << files.csv_path << "\n";
    std::cout << "wrote " << files.meta_path << "\n";
  }
}

nlohmann::json table_metadata(const CommonSettings& s, const std::string& command) {
  nlohmann::json meta;
  meta["command"] = command;
  meta["seed"] = s.seed;
  meta["library"] = "sgflow";
  meta["version"] = "0.1.0";
  nlohmann::json cfg;
  cfg["alpha"] = s.alpha;
  cfg["psi"] = s.psi;
  cfg["mu"] = s.mu;
  cfg["gamma_prime"] = s.gamma_prime;
  cfg["norm_beta_sq"] = s.norm_beta_sq;
  cfg["delta_sq"] = s.delta_sq;
  cfg["nodes"] = s.nodes;
  cfg["n"] = s.n;
  cfg["d"] = s.d;
  cfg["p"] = s.p;
  cfg["gamma"] = s.gamma;
  cfg["t_grid"] = s.t_grid_spec;
  cfg["replicates"] = s.replicates;
  cfg["quad_panels"] = s.quad_panels;
  cfg["threads"] = s.threads;
  meta["config"] = cfg;
  return meta;
}

int run_theory(const CommonSettings& s) {
  const GridSpec grid = parse_grid(resolve_t_spec(s, "0.01:100:9:log"));
  const mp::AsymptoticParams asym = asym_from(s);
  io::Table table;
  table.columns = {"t", "gf_risk", "sgf_correction", "sgf_risk", "theory_converged"};
  weakfeat::RiskCurve curve;
  curve.provenance = weakfeat::CurveProvenance::kAsymptotic;
  if (grid.is_infinite) {
    const double gf = mp::gf_risk_limit(asym);
    const double corr = mp::sgf_correction_limit(asym);
    curve.add(std::numeric_limits<double>::infinity(), gf, corr);
  } else {
    for (double t : grid.values) {
      const double gf = mp::gf_risk_asymptotic(asym, t, s.nodes);
      const double gf2 = mp::gf_risk_asymptotic(asym, t, 2 * s.nodes);
      const double corr = mp::sgf_correction_asymptotic(asym, t, s.nodes);
      const double corr2 = mp::sgf_correction_asymptotic(asym, t, 2 * s.nodes);
      const bool ok = std::abs(gf2 - gf) <= 1e-6 * std::max(1.0, std::abs(gf2)) &&
                      std::abs(corr2 - corr) <= 1e-6 * std::max(1.0, std::abs(corr2));
      curve.add(t, gf2, corr2);
      if (!ok) curve.points.back().correction_stderr = std::abs(corr2 - corr);
    }
  }
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& pt = curve.points[i];
    const bool converged = grid.is_infinite || pt.correction_stderr == 0.0;
    table.add_row({pt.t, pt.gf_risk, pt.sgf_correction, pt.sgf_risk,
                   static_cast<long long>(converged ? 1 : 0)});
    std::cout << "t=" << io::format_double(pt.t) << " gf_risk=" << pt.gf_risk
              << " sgf_correction=" << pt.sgf_correction << " sgf_risk=" << pt.sgf_risk
              << "\n";
  }
  const auto files = io::write_result(s.output_dir, s.name.empty() ? "theory" : s.name,
                                      table, table_metadata(s, "theory"));
  report_files(s, files);
  return 0;
}

int run_finite(const CommonSettings& s) {
  const GridSpec grid = parse_grid(resolve_t_spec(s, "0.01:100:9:log"));
  if (grid.is_infinite) {
    throw ValidationError("finite: an explicit time grid is required (not 'inf')");
  }
  weakfeat::ModelParams model;
  model.n = s.n > 0 ? s.n : static_cast<int>(std::lround(s.d / s.psi));
  model.d = s.d;
  model.p = s.p > 0 ? s.p : static_cast<int>(std::lround(s.alpha * model.n));
  model.mu = s.mu;
  model.gamma = s.gamma > 0.0 ? s.gamma : s.gamma_prime / s.d;
  model.norm_beta = std::sqrt(s.norm_beta_sq);
  model.delta_sq = s.delta_sq;
  model.validate();

  // Interpolation-threshold guard: near p = n the smallest squared singular
  // value of X_A/sqrt(n) can be arbitrarily close to zero and the
  // inverse-spectrum term in the risk grows without bound.
  {
    const auto sv = weakfeat::sample_singular_values(model.n, model.p, 1, s.seed);
    const double min_sq = sv.front().minCoeff() * sv.front().minCoeff() / model.n;
    if (min_sq < 1e-10) {
      std::cerr << "warning: smallest squared singular value / n = "
                << io::format_double(min_sq)
                << "; the inverse-spectrum risk term may be extremely large\n";
    }
  }

  const auto gf = weakfeat::expected_gf_risk_finite_grid(model, grid.values,
                                                         s.replicates, s.seed,
                                                         s.threads);
  const auto corr = weakfeat::expected_sgf_correction_finite_grid(
      model, grid.values, s.replicates, s.quad_panels, s.seed, s.threads);
  const auto train = weakfeat::expected_train_error_finite_grid(
      model, grid.values, s.replicates, s.seed, s.threads);

  io::Table table;
  table.columns = {"t",        "gf_risk",     "gf_stderr",   "sgf_correction",
                   "sgf_stderr", "sgf_risk",  "train_error", "train_stderr"};
  weakfeat::RiskCurve curve;
  curve.provenance = weakfeat::CurveProvenance::kFiniteSizeMc;
  curve.replicates = s.replicates;
  curve.seed = s.seed;
  for (std::size_t j = 0; j < grid.values.size(); ++j) {
    curve.add(grid.values[j], gf[j].value, corr[j].value, gf[j].stderr_,
              corr[j].stderr_, train[j].value);
    table.add_row({grid.values[j], gf[j].value, gf[j].stderr_, corr[j].value,
                   corr[j].stderr_, gf[j].value + corr[j].value, train[j].value,
                   train[j].stderr_});
  }
  auto meta = table_metadata(s, "finite");
  meta["config"]["n"] = model.n;
  meta["config"]["p"] = model.p;
  meta["config"]["gamma"] = model.gamma;
  const auto files = io::write_result(s.output_dir, s.name.empty() ? "finite" : s.name,
                                      table, meta);
  report_files(s, files);
  return 0;
}

int run_simulate(const CommonSettings& s) {
  weakfeat::ModelParams model;
  model.n = s.n > 0 ? s.n : static_cast<int>(std::lround(s.d / s.psi));
  model.d = s.d;
  model.p = s.p > 0 ? s.p : static_cast<int>(std::lround(s.alpha * model.n));
  model.mu = s.mu;
  model.gamma = s.gamma > 0.0 ? s.gamma : s.gamma_prime / s.d;
  model.batch_size = s.batch_size;
  model.validate();

  std::vector<long> marks;
  for (long v = s.record_every; v <= s.iters; v += s.record_every) marks.push_back(v);
  if (marks.empty() || marks.back() != s.iters) marks.push_back(s.iters);

  Matrix gd_risks(s.subsets, static_cast<int>(marks.size()));
  Matrix sgd_risks(s.subsets, static_cast<int>(marks.size()));
  weakfeat::ModelParams shared = model;
  {
    Rng rng(derive_stream_seed(s.seed, 0));
    Vector beta(model.d), beta0(model.d);
    for (int i = 0; i < model.d; ++i) beta(i) = rng.gaussian();
    for (int i = 0; i < model.d; ++i) beta0(i) = rng.gaussian();
    shared.beta = beta * (model.norm_beta / beta.norm());
    shared.beta0 = beta0 / beta0.norm();
  }
  for (int sub = 0; sub < s.subsets; ++sub) {
    const auto inst = weakfeat::generate_instance(
        shared, derive_stream_seed(s.seed, 2 * sub + 1));
    const Vector beta0_A = inst.subvector(inst.beta0);
    const auto gd = weakfeat::risks_at_iterations(inst, beta0_A, model.gamma,
                                                  weakfeat::DescentMode::kGd, marks, 0);
    const auto sgd = weakfeat::risks_at_iterations(
        inst, beta0_A, model.gamma, weakfeat::DescentMode::kSgd, marks,
        derive_stream_seed(s.seed, 2 * sub + 2));
    for (std::size_t j = 0; j < marks.size(); ++j) {
      gd_risks(sub, static_cast<int>(j)) = gd[j];
      sgd_risks(sub, static_cast<int>(j)) = sgd[j];
    }
  }

  io::Table table;
  table.columns = {"t",       "iterations", "gd_mean",  "gd_stderr",
                   "sgd_mean", "sgd_stderr", "diff_mean", "diff_stderr"};
  for (std::size_t j = 0; j < marks.size(); ++j) {
    const auto gd_col = gd_risks.col(static_cast<int>(j));
    const auto sgd_col = sgd_risks.col(static_cast<int>(j));
    const auto diff = (sgd_col - gd_col).eval();
    const double gd_mean = gd_col.mean();
    const double sgd_mean = sgd_col.mean();
    const double diff_mean = diff.mean();
    const auto se = [&](const auto& col, double mean) {
      return std::sqrt((col.array() - mean).square().sum() / (s.subsets - 1) /
                       s.subsets);
    };
    table.add_row({marks[j] * model.gamma, static_cast<long long>(marks[j]), gd_mean,
                   se(gd_col, gd_mean), sgd_mean, se(sgd_col, sgd_mean), diff_mean,
                   se(diff, diff_mean)});
  }
  auto meta = table_metadata(s, "simulate");
  meta["config"]["n"] = model.n;
  meta["config"]["p"] = model.p;
  meta["config"]["gamma"] = model.gamma;
  meta["config"]["subsets"] = s.subsets;
  meta["config"]["iters"] = s.iters;
  meta["config"]["record_every"] = s.record_every;
  const auto files = io::write_result(
      s.output_dir, s.name.empty() ? "simulate" : s.name, table, meta);
  report_files(s, files);
  return 0;
}

int run_mp_table(const CommonSettings& s, const std::vector<double>& alphas) {
  io::Table table;
  table.columns = {"alpha", "mass", "mean", "inv_moment", "converged"};
  std::cout << "alpha        mass         mean         inv_moment\n";
  for (double alpha : alphas) {
    const auto mass = mp::mp_integral_auto(alpha, [](double) { return 1.0; });
    const auto mean = mp::mp_integral_auto(alpha, [](double sigma) { return sigma; });
    const auto inv = mp::mp_integral_auto(alpha, [](double sigma) { return 1.0 / sigma; });
    const bool converged = mass.converged && mean.converged && inv.converged;
    table.add_row({alpha, mass.value, mean.value, inv.value,
                   static_cast<long long>(converged ? 1 : 0)});
    std::cout << io::format_double(alpha) << "  " << mass.value << "  " << mean.value
              << "  " << inv.value << "\n";
  }
  const auto files = io::write_result(s.output_dir, s.name.empty() ? "mp" : s.name,
                                      table, table_metadata(s, "mp"));
  report_files(s, files);
  return 0;
}

int run_experiment_command(const CommonSettings& s, experiments::Kind kind,
                           const GridSpec& t_grid, const GridSpec& alpha_grid) {
  if (t_grid.is_infinite) {
    throw ValidationError("this subcommand needs a finite time grid, not 'inf'");
  }
  experiments::ExperimentConfig cfg = experiment_from(s, kind);
  if (!t_grid.values.empty()) cfg.t_grid = t_grid.values;
  if (!alpha_grid.values.empty()) cfg.alpha_grid = alpha_grid.values;
  if (kind == experiments::Kind::kTimeSweep || kind == experiments::Kind::kSdeValidation) {
    cfg.alpha_grid = {s.alpha};
  }
  const auto result = experiments::run(cfg);
  const auto files = experiments::write_result(result, s.output_dir);

  if (kind == experiments::Kind::kSdeValidation && cfg.scenario != "weakfeatures") {
    // Agreement summary between the exact law and the engine columns.
    double max_mean_err = 0.0, max_var_err = 0.0;
    for (const auto& row : result.table.rows) {
      const double mean_exact = std::get<double>(row[1]);
      const double mean_engine = std::get<double>(row[2]);
      const double var_exact = std::get<double>(row[3]);
      const double var_engine = std::get<double>(row[4]);
      max_mean_err = std::max(max_mean_err,
                              std::abs(mean_engine - mean_exact) /
                                  std::max(std::abs(mean_exact), 1e-12));
      max_var_err = std::max(max_var_err, std::abs(var_engine - var_exact) /
                                              std::max(std::abs(var_exact), 1e-12));
    }
    std::cout << (max_mean_err <= 1e-5 ? "PASS" : "FAIL")
              << " mean: engine vs exact, max rel err "
              << io::format_double(max_mean_err) << "\n";
    std::cout << (max_var_err <= 1e-5 ? "PASS" : "FAIL")
              << " variance: engine vs exact, max rel err "
              << io::format_double(max_var_err) << "\n";
    if (max_mean_err > 1e-5 || max_var_err > 1e-5) return 2;
  }
  report_files(s, files);
  return 0;
}

int dispatch_impl(const std::vector<std::string>& args) {
  CLI::App app{"stochastic-vs-deterministic gradient flow risk toolkit"};
  app.require_subcommand(1);

  CommonSettings s;
  s.output_dir = default_output_dir();
  // Config file values are applied before flag parsing, so flags win.
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      apply_config(s, parse_config_file(args[i + 1]));
    } else if (args[i].rfind("--config=", 0) == 0) {
      apply_config(s, parse_config_file(args[i].substr(9)));
    }
  }

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", s.config_path, "config file (flags override it)");
    cmd->add_option("--out", s.output_dir, "output directory");
    cmd->add_option("--name", s.name, "output base name");
    cmd->add_option("--seed", s.seed, "master seed (echoed in metadata)");
    cmd->add_option("--threads", s.threads, "worker threads, 0 = auto");
    cmd->add_option("-v,--verbosity", s.verbosity, "verbosity level");
  };
  const auto add_asym = [&](CLI::App* cmd) {
    cmd->add_option("--alpha", s.alpha, "p/n aspect ratio");
    cmd->add_option("--psi", s.psi, "d/n aspect ratio");
    cmd->add_option("--mu", s.mu, "label noise strength");
    cmd->add_option("--gamma-prime", s.gamma_prime, "rescaled learning rate");
    cmd->add_option("--norm-beta-sq", s.norm_beta_sq, "|beta|^2 convention");
    cmd->add_option("--delta-sq", s.delta_sq, "|beta - beta0|^2 convention");
    cmd->add_option("--nodes", s.nodes, "MP quadrature nodes");
  };
  const auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("--n", s.n, "samples (default d/psi)");
    cmd->add_option("--d", s.d, "ambient dimension");
    cmd->add_option("--p", s.p, "trained coordinates (default alpha*n)");
    cmd->add_option("--gamma", s.gamma, "raw learning rate (default gamma'/d)");
  };

  auto* theory = app.add_subcommand("theory", "asymptotic GF/SGF risk curves");
  add_common(theory);
  add_asym(theory);
  theory->add_option("--t-grid", s.t_grid_spec, "min:max:points[:log|:lin] or inf");

  auto* finite = app.add_subcommand("finite", "finite-size expected risk formulas");
  add_common(finite);
  add_asym(finite);
  add_model(finite);
  finite->add_option("--t-grid", s.t_grid_spec, "time grid");
  finite->add_option("--replicates", s.replicates, "Monte Carlo spectrum draws");
  finite->add_option("--quad-panels", s.quad_panels, "tau-quadrature panels");

  auto* simulate = app.add_subcommand("simulate", "discrete SGD/GD risk trajectories");
  add_common(simulate);
  add_asym(simulate);
  add_model(simulate);
  simulate->add_option("--subsets", s.subsets, "independent subset instances");
  simulate->add_option("--iters", s.iters, "iterations per run");
  simulate->add_option("--record-every", s.record_every, "recording cadence");
  simulate->add_option("--batch-size", s.batch_size, "SGD minibatch size");

  auto* compare = app.add_subcommand("compare", "theory vs simulation time sweep");
  add_common(compare);
  add_asym(compare);
  compare->add_option("--d", s.d, "simulation scale");
  compare->add_option("--t-grid", s.t_grid_spec, "time grid");
  compare->add_option("--subsets", s.subsets, "subset instances");
  compare->add_option("--sgd-runs", s.sgd_runs, "SGD streams per subset");
  compare->add_option("--replicates", s.replicates, "finite-size replicates");
  compare->add_option("--quad-panels", s.quad_panels, "tau-quadrature panels");

  auto* phase = app.add_subcommand("phase", "infinite-time sweep over alpha");
  add_common(phase);
  add_asym(phase);
  std::string alpha_grid_flag;
  phase->add_option("--d", s.d, "simulation scale");
  phase->add_option("--alpha-grid", alpha_grid_flag, "min:max:points[:log|:lin]");
  phase->add_option("--subsets", s.subsets, "subset instances");
  phase->add_option("--sgd-runs", s.sgd_runs, "SGD streams per subset");
  phase->add_option("--t-infinity", s.t_infinity, "operational infinite time");

  auto* heatmap = app.add_subcommand("heatmap", "correction over the (t, alpha) plane");
  add_common(heatmap);
  add_asym(heatmap);
  heatmap->add_option("--t-grid", s.t_grid_spec, "time grid");
  heatmap->add_option("--alpha-grid", alpha_grid_flag, "alpha grid");

  auto* validate = app.add_subcommand("validate-sde", "engine vs exact law vs sampling");
  add_common(validate);
  validate->add_option("--scenario", s.scenario,
                       "constant|pinning|timevar|weakfeatures");
  validate->add_option("--t-grid", s.t_grid_spec, "time grid");
  validate->add_option("--steps", s.sde_steps, "engine grid steps");
  validate->add_option("--paths", s.mc_paths, "Euler-Maruyama replicates");
  validate->add_option("--mu", s.mu, "label noise (weakfeatures scenario)");

  auto* mp_cmd = app.add_subcommand("mp", "spectral measure identity table");
  add_common(mp_cmd);
  std::vector<double> mp_alphas;
  mp_cmd->add_option("--alpha", mp_alphas, "alpha values")->expected(-1);

  std::vector<const char*> argv;
  argv.push_back("sgflow");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (theory->parsed()) return run_theory(s);
  if (finite->parsed()) return run_finite(s);
  if (simulate->parsed()) return run_simulate(s);
  if (compare->parsed()) {
    return run_experiment_command(s, experiments::Kind::kTimeSweep,
                                  parse_grid(resolve_t_spec(s, "0.01:100:9:log")),
                                  GridSpec{});
  }
  if (phase->parsed()) {
    GridSpec alpha_grid;
    if (!alpha_grid_flag.empty()) {
      alpha_grid = parse_grid(alpha_grid_flag);
    } else if (!s.alpha_grid_spec.empty()) {
      alpha_grid = parse_grid(s.alpha_grid_spec);
    } else {
      alpha_grid.values = {0.2, 0.35, 0.5, 0.65, 0.8, 1.2, 1.5, 1.8};
    }
    GridSpec t_grid;
    t_grid.values = {s.t_infinity};
    return run_experiment_command(s, experiments::Kind::kPhaseSweep, t_grid, alpha_grid);
  }
  if (heatmap->parsed()) {
    GridSpec alpha_grid;
    if (!alpha_grid_flag.empty()) {
      alpha_grid = parse_grid(alpha_grid_flag);
    } else if (!s.alpha_grid_spec.empty()) {
      alpha_grid = parse_grid(s.alpha_grid_spec);
    } else {
      alpha_grid = parse_grid("0.1:2.4:24:lin");
    }
    return run_experiment_command(s, experiments::Kind::kHeatmap,
                                  parse_grid(resolve_t_spec(s, "0.05:50:20:log")),
                                  alpha_grid);
  }
  if (validate->parsed()) {
    GridSpec t_grid = parse_grid(resolve_t_spec(s, "0.02:2:10:log"));
    return run_experiment_command(s, experiments::Kind::kSdeValidation, t_grid,
                                  GridSpec{});
  }
  if (mp_cmd->parsed()) {
    if (mp_alphas.empty()) throw ValidationError("mp: give at least one --alpha");
    return run_mp_table(s, mp_alphas);
  }
  return 1;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  try {
    return dispatch_impl(args);
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args);
}

}  // namespace sgflow::cli
