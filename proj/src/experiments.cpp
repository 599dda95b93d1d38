#include "sgflow/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "sgflow/parallel.hpp"
#include "sgflow/rng.hpp"
#include "sgflow/sde.hpp"

namespace sgflow::experiments {

namespace {

constexpr const char* kVersion = "0.1.0";

using io::Cell;

double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-15});
}

/// Theory value plus a flag that doubling the quadrature nodes moves it by
/// less than 1e-6 relative.
struct FlaggedValue {
  double value = 0.0;
  bool converged = false;
};

template <typename F>
FlaggedValue converged_theory(F&& eval, int nodes) {
  FlaggedValue out;
  const double coarse = eval(nodes);
  out.value = eval(2 * nodes);
  out.converged = relative_gap(coarse, out.value) < 1e-6;
  return out;
}

}  // namespace

std::string kind_name(Kind kind) {
  switch (kind) {
    case Kind::kPhaseSweep: return "phase_sweep";
    case Kind::kTimeSweep: return "time_sweep";
    case Kind::kHeatmap: return "heatmap";
    case Kind::kGfCurves: return "gf_curves";
    case Kind::kSdeValidation: return "sde_validation";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  asym.validate();
  if (kind != Kind::kSdeValidation) {
    if (alpha_grid.empty()) throw ValidationError("experiment: empty alpha grid");
    if (!std::is_sorted(alpha_grid.begin(), alpha_grid.end())) {
      throw ValidationError("experiment: alpha grid must be ascending");
    }
    for (double a : alpha_grid) {
      if (!(a > 0.0)) throw ValidationError("experiment: alpha must be positive");
      if (a > asym.psi) throw ValidationError("experiment: alpha exceeds psi");
    }
    if (d < 2) throw ValidationError("experiment: d must be >= 2");
  }
  if (t_grid.empty()) throw ValidationError("experiment: empty time grid");
  if (!std::is_sorted(t_grid.begin(), t_grid.end())) {
    throw ValidationError("experiment: time grid must be ascending");
  }
  if (subsets < 2) throw ValidationError("experiment: subsets must be >= 2");
  if (replicates < 2) throw ValidationError("experiment: replicates must be >= 2");
  if (quad_panels < 1 || mp_nodes < 16) throw ValidationError("experiment: bad quadrature");
  if (kind == Kind::kSdeValidation && scenario != "constant" && scenario != "pinning" &&
      scenario != "timevar" && scenario != "weakfeatures") {
    throw ValidationError("experiment: unknown scenario '" + scenario + "'");
  }
}

int ExperimentConfig::samples() const {
  return std::max(1, static_cast<int>(std::lround(d / asym.psi)));
}

int ExperimentConfig::features_for(double alpha) const {
  const int p = static_cast<int>(std::lround(alpha * samples()));
  return std::clamp(p, 1, d);
}

nlohmann::json ExperimentConfig::echo() const {
  nlohmann::json j;
  j["kind"] = kind_name(kind);
  j["psi"] = asym.psi;
  j["mu"] = asym.mu;
  j["gamma_prime"] = asym.gamma_prime;
  j["norm_beta_sq"] = asym.norm_beta_sq;
  j["delta_sq"] = asym.delta_sq;
  j["d"] = d;
  j["n"] = samples();
  j["gamma"] = gamma();
  j["alpha_grid"] = alpha_grid;
  j["t_grid"] = t_grid;
  j["subsets"] = subsets;
  j["sgd_runs"] = sgd_runs;
  j["replicates"] = replicates;
  j["quad_panels"] = quad_panels;
  j["mp_nodes"] = mp_nodes;
  j["t_infinity"] = t_infinity;
  j["sde_steps"] = sde_steps;
  j["mc_paths"] = mc_paths;
  j["seed"] = seed;
  j["threads"] = threads;
  j["scenario"] = scenario;
  return j;
}

std::string ExperimentConfig::output_name() const {
  return name.empty() ? kind_name(kind) : name;
}

namespace {

nlohmann::json base_metadata(const ExperimentConfig& cfg) {
  nlohmann::json meta;
  meta["config"] = cfg.echo();
  meta["library"] = "sgflow";
  meta["version"] = kVersion;
  return meta;
}

using Clock = std::chrono::steady_clock;

void stamp_wall_time(ExperimentResult& result, Clock::time_point start) {
  result.metadata["wall_time_s"] =
      std::chrono::duration<double>(Clock::now() - start).count();
}

weakfeat::ModelParams model_for(const ExperimentConfig& cfg, double alpha) {
  weakfeat::ModelParams model;
  model.n = cfg.samples();
  model.d = cfg.d;
  model.p = cfg.features_for(alpha);
  model.mu = cfg.asym.mu;
  model.gamma = cfg.gamma();
  model.norm_beta = std::sqrt(cfg.asym.norm_beta_sq);
  model.delta_sq = cfg.asym.delta_sq;
  return model;
}

mp::AsymptoticParams asym_at(const ExperimentConfig& cfg, double alpha) {
  mp::AsymptoticParams a = cfg.asym;
  a.alpha = alpha;
  return a;
}

}  // namespace

ExperimentResult run_phase_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto started = Clock::now();
  ExperimentResult result;
  result.name = cfg.output_name();
  result.table.columns = {"alpha",    "n",        "p",           "theory_limit",
                          "sim_mean", "sim_stderr", "delta_sq_draw", "theory_converged"};
  result.metadata = base_metadata(cfg);

  for (std::size_t a = 0; a < cfg.alpha_grid.size(); ++a) {
    const double alpha = cfg.alpha_grid[a];
    const auto model = model_for(cfg, alpha);
    const auto curve = weakfeat::sgd_minus_gd_expectation(
        model, {cfg.t_infinity}, cfg.subsets, cfg.sgd_runs,
        derive_stream_seed(cfg.seed, a), cfg.threads);

    mp::AsymptoticParams asym = asym_at(cfg, alpha);
    asym.norm_beta_sq = curve.measured_norm_beta_sq;
    asym.delta_sq = curve.measured_delta_sq;
    const double theory = mp::sgf_correction_limit(asym);

    result.table.add_row({alpha, static_cast<long long>(model.n),
                          static_cast<long long>(model.p), theory,
                          curve.mean_diff.front(), curve.stderr_.front(),
                          curve.measured_delta_sq, static_cast<long long>(1)});
  }
  stamp_wall_time(result, started);
  return result;
}

ExperimentResult run_time_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const double alpha = cfg.alpha_grid.front();
  const auto model = model_for(cfg, alpha);

  const auto started = Clock::now();
  ExperimentResult result;
  result.name = cfg.output_name();
  result.table.columns = {"t",
                          "iterations",
                          "asymptotic_correction",
                          "finite_correction",
                          "finite_stderr",
                          "sim_diff",
                          "sim_stderr",
                          "intermediate_regime",
                          "theory_converged"};
  result.metadata = base_metadata(cfg);

  const auto curve = weakfeat::sgd_minus_gd_expectation(
      model, cfg.t_grid, cfg.subsets, cfg.sgd_runs, derive_stream_seed(cfg.seed, 0),
      cfg.threads);

  mp::AsymptoticParams asym = asym_at(cfg, alpha);
  asym.norm_beta_sq = curve.measured_norm_beta_sq;
  asym.delta_sq = curve.measured_delta_sq;
  weakfeat::ModelParams finite_model = model;
  finite_model.delta_sq = curve.measured_delta_sq;

  const auto finite = weakfeat::expected_sgf_correction_finite_grid(
      finite_model, curve.times, cfg.replicates, cfg.quad_panels,
      derive_stream_seed(cfg.seed, 1), cfg.threads);

  weakfeat::RiskCurve records;
  records.provenance = weakfeat::CurveProvenance::kAsymptotic;
  for (std::size_t j = 0; j < curve.times.size(); ++j) {
    const double t = curve.times[j];
    const auto theory = converged_theory(
        [&](int nodes) { return mp::sgf_correction_asymptotic(asym, t, nodes); },
        cfg.mp_nodes);
    const auto gf = converged_theory(
        [&](int nodes) { return mp::gf_risk_asymptotic(asym, t, nodes); },
        cfg.mp_nodes);
    records.add(t, gf.value, theory.value);
    const bool intermediate = t >= 1.0 && t <= 10.0;
    result.table.add_row({t, static_cast<long long>(curve.iterations[j]), theory.value,
                          finite[j].value, finite[j].stderr_, curve.mean_diff[j],
                          curve.stderr_[j], static_cast<long long>(intermediate ? 1 : 0),
                          static_cast<long long>(theory.converged && gf.converged ? 1 : 0)});
  }
  result.metadata["delta_sq_draw"] = curve.measured_delta_sq;
  stamp_wall_time(result, started);
  return result;
}

ExperimentResult run_heatmap(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto started = Clock::now();
  ExperimentResult result;
  result.name = cfg.output_name();
  result.table.columns = {"t", "alpha", "value"};
  result.metadata = base_metadata(cfg);

  // Long form sorted by (t, alpha); grids are validated ascending.
  for (double t : cfg.t_grid) {
    for (double alpha : cfg.alpha_grid) {
      const double value = mp::sgf_correction_asymptotic(asym_at(cfg, alpha), t,
                                                         cfg.mp_nodes);
      result.table.add_row({t, alpha, value});
    }
  }
  stamp_wall_time(result, started);
  return result;
}

ExperimentResult run_gf_curves(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto started = Clock::now();
  ExperimentResult result;
  result.name = cfg.output_name();
  result.table.columns = {"alpha",         "t",          "gf_risk_theory",
                          "train_theory",  "train_stderr", "gd_sim_risk",
                          "gd_sim_stderr", "theory_converged"};
  result.metadata = base_metadata(cfg);

  for (std::size_t a = 0; a < cfg.alpha_grid.size(); ++a) {
    const double alpha = cfg.alpha_grid[a];
    const auto model = model_for(cfg, alpha);
    const mp::AsymptoticParams asym = asym_at(cfg, alpha);

    // GD simulation, averaged over fresh subset instances.
    std::vector<long> marks(cfg.t_grid.size());
    std::vector<double> times(cfg.t_grid.size());
    for (std::size_t j = 0; j < cfg.t_grid.size(); ++j) {
      marks[j] = std::max<long>(1, std::lround(cfg.t_grid[j] / model.gamma));
      times[j] = marks[j] * model.gamma;
    }
    weakfeat::ModelParams shared = model;
    {
      Rng rng(derive_stream_seed(cfg.seed, 4 * a));
      Vector beta(model.d), beta0(model.d);
      for (int i = 0; i < model.d; ++i) beta(i) = rng.gaussian();
      for (int i = 0; i < model.d; ++i) beta0(i) = rng.gaussian();
      shared.beta = beta * (model.norm_beta / beta.norm());
      shared.beta0 = beta0 / beta0.norm();
      shared.delta_sq = (*shared.beta - *shared.beta0).squaredNorm();
    }
    Matrix risks(cfg.subsets, static_cast<int>(marks.size()));
    parallel_for(static_cast<std::size_t>(cfg.subsets), cfg.threads, [&](std::size_t s) {
      const auto inst = weakfeat::generate_instance(
          shared, derive_stream_seed(cfg.seed, 4 * a + 1 + 4 * s));
      const auto r = weakfeat::risks_at_iterations(inst, inst.subvector(inst.beta0),
                                                   model.gamma,
                                                   weakfeat::DescentMode::kGd, marks, 0);
      for (std::size_t j = 0; j < r.size(); ++j) {
        risks(static_cast<int>(s), static_cast<int>(j)) = r[j];
      }
    });

    const auto train = weakfeat::expected_train_error_finite_grid(
        shared, times, cfg.replicates, derive_stream_seed(cfg.seed, 4 * a + 2),
        cfg.threads);

    for (std::size_t j = 0; j < times.size(); ++j) {
      mp::AsymptoticParams asym_draw = asym;
      asym_draw.delta_sq = shared.delta_sq;
      asym_draw.norm_beta_sq = shared.beta->squaredNorm();
      const auto theory = converged_theory(
          [&](int nodes) { return mp::gf_risk_asymptotic(asym_draw, times[j], nodes); },
          cfg.mp_nodes);
      const auto col = risks.col(static_cast<int>(j));
      const double mean = col.mean();
      const double se =
          std::sqrt((col.array() - mean).square().sum() / (cfg.subsets - 1) / cfg.subsets);
      result.table.add_row({alpha, times[j], theory.value, train[j].value,
                            train[j].stderr_, mean, se,
                            static_cast<long long>(theory.converged ? 1 : 0)});
    }
  }
  stamp_wall_time(result, started);
  return result;
}

namespace {

sde::LinearSde1d named_linear_scenario(const std::string& scenario, double gamma) {
  sde::LinearSde1d sde;
  sde.gamma = gamma;
  sde.t0 = 0.0;
  sde.w0 = 0.0;
  sde.y = 1.0;
  if (scenario == "constant") {
    sde.h = [](double) { return 1.0; };
    sde.sigma = [](double) { return 1.0; };
  } else if (scenario == "pinning") {
    sde.h = [](double) { return 1.0; };
    sde.sigma = [](double s) { return std::exp(-s); };
  } else if (scenario == "timevar") {
    sde.h = [](double s) { return 1.0 + 0.5 * s; };
    sde.sigma = [](double s) { return 1.0 / (1.0 + s); };
  } else {
    throw ValidationError("unknown linear scenario '" + scenario + "'");
  }
  return sde;
}

ExperimentResult validate_linear_scenario(const ExperimentConfig& cfg) {
  const double gamma = 0.01;
  const auto lin = named_linear_scenario(cfg.scenario, gamma);
  const auto system = sde::linear_sde_system(lin);

  const double t_end = cfg.t_grid.back();
  const auto traj = sde::solve_ode(system, Vector::Constant(1, lin.w0), lin.t0, t_end,
                                   cfg.sde_steps);
  // Engine times snap to the trajectory grid.
  std::vector<double> times;
  for (double t : cfg.t_grid) {
    times.push_back(traj.grid[static_cast<std::size_t>(traj.index_of(t, false))]);
  }
  const auto covs = sde::fluctuation_covariance_profile(system, traj, times, gamma);

  // Euler-Maruyama uses its own step so every requested time is a multiple.
  const int per_unit = 500;
  const double dtau = 1.0 / per_unit;
  const int n_steps = static_cast<int>(std::lround(t_end * per_unit));
  const auto ensemble = sde::sample_paths(system, Vector::Constant(1, lin.w0), gamma,
                                          dtau, n_steps, cfg.mc_paths, cfg.seed, false,
                                          lin.t0, cfg.threads);

  const auto started = Clock::now();
  ExperimentResult result;
  result.name = cfg.output_name();
  result.table.columns = {"t",         "mean_exact", "mean_engine", "var_exact",
                          "var_engine", "mean_mc",   "mean_mc_se",  "var_mc",
                          "var_mc_se"};
  result.metadata = base_metadata(cfg);

  for (std::size_t j = 0; j < times.size(); ++j) {
    const double t = times[j];
    const auto exact = sde::linear_sde_exact(lin, t);
    const double mean_engine = traj.states[static_cast<std::size_t>(
        traj.index_of(t, false))](0);
    const double var_engine = covs[j].cov_w()(0, 0);

    const double t_mc = std::lround(t * per_unit) * dtau;
    const int k = ensemble.index_of(t_mc);
    double sum = 0.0, sum_sq = 0.0;
    for (int r = 0; r < ensemble.replicates; ++r) {
      const double w = ensemble.paths[r](k, 0);
      sum += w;
      sum_sq += w * w;
    }
    const int nrep = ensemble.replicates;
    const double mean_mc = sum / nrep;
    const double var_mc = (sum_sq - nrep * mean_mc * mean_mc) / (nrep - 1);
    const double mean_se = std::sqrt(var_mc / nrep);
    const double var_se = var_mc * std::sqrt(2.0 / (nrep - 1));
    result.table.add_row({t, exact.mean, mean_engine, exact.variance, var_engine,
                          mean_mc, mean_se, var_mc, var_se});
  }
  stamp_wall_time(result, started);
  return result;
}

ExperimentResult validate_weakfeatures_scenario(const ExperimentConfig& cfg) {
  weakfeat::ModelParams model;
  model.n = 4;
  model.d = 6;
  model.p = 3;
  model.mu = cfg.asym.mu;
  model.gamma = 1e-3;
  const auto inst = weakfeat::generate_instance(model, derive_stream_seed(cfg.seed, 7));
  const Vector beta0_A = inst.subvector(inst.beta0);
  const auto system = weakfeat::sgf_system(inst);

  const double t_end = cfg.t_grid.back();
  const auto traj = sde::solve_ode(system, beta0_A, 0.0, t_end, cfg.sde_steps);
  std::vector<double> times;
  for (double t : cfg.t_grid) {
    times.push_back(traj.grid[static_cast<std::size_t>(traj.index_of(t, false))]);
  }
  const auto covs = sde::fluctuation_covariance_profile(system, traj, times, model.gamma);

  const int per_unit = 500;
  const double dtau = 1.0 / per_unit;
  const int n_steps = static_cast<int>(std::lround(t_end * per_unit));
  const auto ensemble = sde::sample_paths(system, beta0_A, model.gamma, dtau, n_steps,
                                          cfg.mc_paths, cfg.seed, false, 0.0,
                                          cfg.threads);

  const auto started = Clock::now();
  ExperimentResult result;
  result.name = cfg.output_name();
  result.table.columns = {"t", "trace_quadrature", "trace_engine", "trace_mc",
                          "trace_mc_se"};
  result.metadata = base_metadata(cfg);

  for (std::size_t j = 0; j < times.size(); ++j) {
    const double t = times[j];
    const double quad = weakfeat::instance_covariance_trace(inst, beta0_A, t,
                                                            cfg.quad_panels);
    const double engine = covs[j].cov_z.trace();
    const double t_mc = std::lround(t * per_unit) * dtau;
    const auto stats = sde::empirical_fluctuation_stats(ensemble, traj, model.gamma,
                                                        t_mc);
    const double trace_mc = stats.sample_cov.trace();
    const double trace_se = stats.cov_se.diagonal().sum();
    result.table.add_row({t, quad, engine, trace_mc, trace_se});
  }
  stamp_wall_time(result, started);
  return result;
}

}  // namespace

ExperimentResult run_sde_validation(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.scenario == "weakfeatures") return validate_weakfeatures_scenario(cfg);
  return validate_linear_scenario(cfg);
}

ExperimentResult run(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case Kind::kPhaseSweep: return run_phase_sweep(cfg);
    case Kind::kTimeSweep: return run_time_sweep(cfg);
    case Kind::kHeatmap: return run_heatmap(cfg);
    case Kind::kGfCurves: return run_gf_curves(cfg);
    case Kind::kSdeValidation: return run_sde_validation(cfg);
  }
  throw ValidationError("unknown experiment kind");
}

io::ResultFiles write_result(const ExperimentResult& result, const std::string& dir) {
  return io::write_result(dir, result.name, result.table, result.metadata);
}

std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 1 || hi < lo) throw ValidationError("bad grid spec");
  std::vector<double> grid(points);
  if (points == 1) {
    grid[0] = lo;
    return grid;
  }
  for (int i = 0; i < points; ++i) grid[i] = lo + (hi - lo) * i / (points - 1);
  grid.back() = hi;
  return grid;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || hi < lo || points < 1) throw ValidationError("bad log grid spec");
  std::vector<double> grid(points);
  if (points == 1) {
    grid[0] = lo;
    return grid;
  }
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  for (int i = 0; i < points; ++i) {
    grid[i] = std::exp(log_lo + (log_hi - log_lo) * i / (points - 1));
  }
  grid.front() = lo;  // exact endpoints
  grid.back() = hi;
  return grid;
}

}  // namespace sgflow::experiments
