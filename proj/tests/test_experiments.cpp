// Experiment runners: table shapes, theory behavior, and reproducibility.
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sgflow/experiments.hpp"

using namespace sgflow;
using namespace sgflow::experiments;
namespace fs = std::filesystem;

namespace {

double cell(const io::Table& table, std::size_t row, const std::string& column) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (table.columns[c] == column) {
      const auto& v = table.rows[row][c];
      if (std::holds_alternative<double>(v)) return std::get<double>(v);
      return static_cast<double>(std::get<long long>(v));
    }
  }
  throw std::runtime_error("no column " + column);
}

}  // namespace

TEST_CASE("grids: spacing helpers") {
  const auto lin = linear_grid(0.0, 1.0, 5);
  CHECK(lin.size() == 5);
  CHECK(lin[1] == doctest::Approx(0.25));
  const auto log = log_grid(0.01, 100.0, 5);
  CHECK(log.front() == doctest::Approx(0.01));
  CHECK(log.back() == doctest::Approx(100.0));
  CHECK(log[2] == doctest::Approx(1.0));
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 4), ValidationError);
  CHECK_THROWS_AS(linear_grid(1.0, 0.0, 4), ValidationError);
}

TEST_CASE("heatmap: zero row at t -> 0, zero column above threshold at large t") {
  ExperimentConfig cfg;
  cfg.kind = Kind::kHeatmap;
  cfg.t_grid = {0.0, 0.5, 5.0, 1000.0};
  cfg.alpha_grid = {0.3, 0.6, 0.9, 1.2, 1.5, 1.9};
  cfg.mp_nodes = 200;
  const auto result = run_heatmap(cfg);
  REQUIRE(result.table.rows.size() == cfg.t_grid.size() * cfg.alpha_grid.size());

  const std::size_t na = cfg.alpha_grid.size();
  for (std::size_t a = 0; a < na; ++a) {
    CHECK(cell(result.table, a, "value") == 0.0);  // t = 0 row
  }
  // Deep-time row: above the threshold the correction has decayed away (the
  // rate is twice the lower support edge, so alpha near 1 needs long times);
  // below the threshold it persists.
  const std::size_t last = 3 * na;
  for (std::size_t a = 0; a < na; ++a) {
    const double alpha = cfg.alpha_grid[a];
    const double v = cell(result.table, last + a, "value");
    if (alpha >= 1.0) {
      CHECK(v < 1e-9);
    } else if (alpha >= 0.5) {
      CHECK(v > 1e-4);
    }
  }

  // The ridge moves toward smaller alpha as t grows.
  const auto argmax_alpha = [&](std::size_t t_index) {
    double best = -1.0;
    std::size_t best_a = 0;
    for (std::size_t a = 0; a < na; ++a) {
      const double v = cell(result.table, t_index * na + a, "value");
      if (v > best) {
        best = v;
        best_a = a;
      }
    }
    return cfg.alpha_grid[best_a];
  };
  CHECK(argmax_alpha(1) > argmax_alpha(3));
}

TEST_CASE("gf curves: double descent shape and an early-stopping minimum") {
  ExperimentConfig cfg;
  cfg.kind = Kind::kGfCurves;
  cfg.d = 60;
  cfg.alpha_grid = {0.5, 0.95, 1.6};
  cfg.t_grid = {0.3, 1.0, 3.0, 10.0, 60.0};
  cfg.subsets = 24;
  cfg.replicates = 24;
  cfg.mp_nodes = 200;
  cfg.seed = 99;
  const auto result = run_gf_curves(cfg);
  const std::size_t nt = cfg.t_grid.size();
  REQUIRE(result.table.rows.size() == cfg.alpha_grid.size() * nt);

  // At the largest t the theory risk peaks near the interpolation threshold.
  const double risk_mid = cell(result.table, 0 * nt + (nt - 1), "gf_risk_theory");
  const double risk_peak = cell(result.table, 1 * nt + (nt - 1), "gf_risk_theory");
  const double risk_over = cell(result.table, 2 * nt + (nt - 1), "gf_risk_theory");
  CHECK(risk_peak > risk_mid);
  CHECK(risk_peak > risk_over);

  // Early stopping: near the threshold some interior time beats the end.
  double min_risk = 1e300;
  for (std::size_t j = 0; j + 1 < nt; ++j) {
    min_risk = std::min(min_risk, cell(result.table, nt + j, "gf_risk_theory"));
  }
  CHECK(min_risk < risk_peak);

  // GD simulation tracks the theory away from the threshold.
  for (std::size_t a : {std::size_t{0}, std::size_t{2}}) {
    for (std::size_t j = 0; j < nt; ++j) {
      const double theory = cell(result.table, a * nt + j, "gf_risk_theory");
      const double sim = cell(result.table, a * nt + j, "gd_sim_risk");
      const double se = cell(result.table, a * nt + j, "gd_sim_stderr");
      CHECK(std::abs(sim - theory) < std::max(3.0 * se, 0.12 * theory));
    }
  }
  // Train error column is present and nonincreasing in t for fixed alpha.
  for (std::size_t j = 0; j + 1 < nt; ++j) {
    CHECK(cell(result.table, j, "train_theory") >=
          cell(result.table, j + 1, "train_theory") - 3.0 * cell(result.table, j, "train_stderr") - 1e-9);
  }
}

TEST_CASE("sde validation: constant scenario ties all three routes together") {
  ExperimentConfig cfg;
  cfg.kind = Kind::kSdeValidation;
  cfg.scenario = "constant";
  cfg.t_grid = {0.1, 0.5, 1.0, 2.0};
  cfg.sde_steps = 2000;
  cfg.mc_paths = 2000;
  cfg.seed = 31;
  const auto result = run_sde_validation(cfg);
  REQUIRE(result.table.rows.size() == 4);
  for (std::size_t j = 0; j < 4; ++j) {
    const double mean_exact = cell(result.table, j, "mean_exact");
    const double var_exact = cell(result.table, j, "var_exact");
    CHECK(std::abs(cell(result.table, j, "mean_engine") - mean_exact) <=
          1e-5 * std::max(1.0, std::abs(mean_exact)));
    CHECK(std::abs(cell(result.table, j, "var_engine") - var_exact) <=
          1e-5 * var_exact);
    CHECK(std::abs(cell(result.table, j, "mean_mc") - mean_exact) <=
          3.5 * cell(result.table, j, "mean_mc_se"));
    CHECK(std::abs(cell(result.table, j, "var_mc") - var_exact) <=
          3.5 * cell(result.table, j, "var_mc_se"));
  }
}

TEST_CASE("sde validation: weak-features scenario cross-checks the trace") {
  ExperimentConfig cfg;
  cfg.kind = Kind::kSdeValidation;
  cfg.scenario = "weakfeatures";
  cfg.t_grid = {0.5, 1.0, 2.0};
  cfg.sde_steps = 4000;
  cfg.mc_paths = 2500;
  cfg.seed = 32;
  const auto result = run_sde_validation(cfg);
  for (std::size_t j = 0; j < 3; ++j) {
    const double quad = cell(result.table, j, "trace_quadrature");
    const double engine = cell(result.table, j, "trace_engine");
    const double mc = cell(result.table, j, "trace_mc");
    const double se = cell(result.table, j, "trace_mc_se");
    CHECK(std::abs(quad - engine) <= 1e-4 * quad);
    CHECK(std::abs(mc - engine) <= 4.0 * se);
  }
}

TEST_CASE("time sweep: decomposition, regime flag, and finite-size column") {
  ExperimentConfig cfg;
  cfg.kind = Kind::kTimeSweep;
  cfg.d = 50;
  cfg.alpha_grid = {0.5};
  cfg.t_grid = {0.05, 0.5, 5.0};
  cfg.subsets = 16;
  cfg.replicates = 16;
  cfg.mp_nodes = 200;
  cfg.seed = 17;
  const auto result = run_time_sweep(cfg);
  REQUIRE(result.table.rows.size() == 3);
  CHECK(cell(result.table, 0, "intermediate_regime") == 0.0);
  CHECK(cell(result.table, 2, "intermediate_regime") == 1.0);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(cell(result.table, j, "asymptotic_correction") >= 0.0);
    CHECK(cell(result.table, j, "finite_correction") >= 0.0);
    CHECK(cell(result.table, j, "theory_converged") == 1.0);
    CHECK(cell(result.table, j, "iterations") >= 1.0);
  }
  CHECK(result.metadata.contains("wall_time_s"));
  CHECK(result.metadata["config"]["seed"] == 17);
}

TEST_CASE("experiments rerun bit-identically for any thread count") {
  ExperimentConfig cfg;
  cfg.kind = Kind::kTimeSweep;
  cfg.d = 40;
  cfg.alpha_grid = {0.5};
  cfg.t_grid = {0.1, 1.0};
  cfg.subsets = 8;
  cfg.replicates = 8;
  cfg.mp_nodes = 100;
  cfg.seed = 4242;

  cfg.threads = 1;
  const std::string csv_serial = io::to_csv(run_time_sweep(cfg).table);
  cfg.threads = 4;
  const std::string csv_parallel = io::to_csv(run_time_sweep(cfg).table);
  CHECK(csv_serial == csv_parallel);

  cfg.seed = 4243;
  cfg.threads = 1;
  CHECK(io::to_csv(run_time_sweep(cfg).table) != csv_serial);
}

TEST_CASE("write_result: atomic files with config echo; empty tables rejected") {
  const fs::path dir = fs::temp_directory_path() / "sgflow_write_result_test";
  fs::remove_all(dir);

  ExperimentConfig cfg;
  cfg.kind = Kind::kHeatmap;
  cfg.t_grid = {0.5};
  cfg.alpha_grid = {0.5};
  cfg.mp_nodes = 100;
  auto result = run_heatmap(cfg);
  const auto files = write_result(result, dir.string());
  CHECK(fs::exists(files.csv_path));
  CHECK(fs::exists(files.meta_path));
  CHECK(!fs::exists(files.csv_path + ".tmp"));

  std::ifstream meta(files.meta_path);
  nlohmann::json parsed;
  meta >> parsed;
  CHECK(parsed["config"]["kind"] == "heatmap");
  CHECK(parsed["config"]["seed"] == 12345);
  CHECK(parsed.contains("wall_time_s"));
  CHECK(parsed["version"] == "0.1.0");

  ExperimentResult empty;
  empty.name = "empty";
  empty.table.columns = {"a"};
  CHECK_THROWS_AS(write_result(empty, dir.string()), ValidationError);
  CHECK(!fs::exists(dir / "empty.csv"));
  fs::remove_all(dir);
}

TEST_CASE("phase sweep at reduced scale recovers the sign structure") {
  ExperimentConfig cfg;
  cfg.kind = Kind::kPhaseSweep;
  cfg.d = 50;
  cfg.asym.psi = 2.5;
  cfg.alpha_grid = {0.5, 1.5};
  cfg.t_grid = {1.0};  // unused by the runner
  cfg.t_infinity = 25.0;
  cfg.subsets = 60;
  cfg.seed = 606;
  const auto result = run_phase_sweep(cfg);
  REQUIRE(result.table.rows.size() == 2);
  CHECK(cell(result.table, 1, "theory_limit") == 0.0);  // alpha = 1.5
  const double sim_below = cell(result.table, 0, "sim_mean");
  const double theory_below = cell(result.table, 0, "theory_limit");
  const double se = cell(result.table, 0, "sim_stderr");
  CHECK(theory_below > 0.0);
  CHECK(std::abs(sim_below - theory_below) < 4.0 * se);
}

TEST_CASE("config validation names the unusable grids") {
  ExperimentConfig cfg;
  cfg.kind = Kind::kHeatmap;
  cfg.t_grid = {};
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.t_grid = {1.0};
  cfg.alpha_grid = {3.5};  // above psi
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.alpha_grid = {0.5, 0.2};  // not ascending
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.alpha_grid = {0.5};
  cfg.kind = Kind::kSdeValidation;
  cfg.scenario = "nonsense";
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("heatmap CSV matches the committed golden fixture byte for byte") {
  ExperimentConfig cfg;
  cfg.kind = Kind::kHeatmap;
  cfg.t_grid = {0.5, 2.0};
  cfg.alpha_grid = {0.4, 0.8, 1.2};
  cfg.mp_nodes = 200;
  const std::string csv = io::to_csv(run_heatmap(cfg).table);

  const fs::path golden = fs::path(__FILE__).parent_path() / "golden" / "heatmap_small.csv";
  REQUIRE(fs::exists(golden));
  std::ifstream in(golden, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(csv == ss.str());
}
