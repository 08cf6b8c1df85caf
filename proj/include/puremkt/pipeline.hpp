#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "puremkt/eg_solver.hpp"
#include "puremkt/fairness.hpp"
#include "puremkt/generator.hpp"
#include "puremkt/rounding.hpp"
#include "puremkt/spending_forest.hpp"

namespace puremkt {

/// Wall-clock seconds per stage.
struct StageTimings {
  double solver_s = 0.0;
  double forest_s = 0.0;
  double round_s = 0.0;
  double certify_s = 0.0;
  double fairness_s = 0.0;
};

struct PipelineResult {
  Outcome outcome;
  /// Equilibrium check of the solver outcome.
  EquilibriumReport equilibrium;
  ForestResult forest;
  RoundingResult rounding;
  CertificationReport certification;
  FairnessProfile fairness;
  StageTimings timings;
};

/// solve -> forest -> round -> certify -> fairness. DidNotConverge and
/// structural errors propagate.
PipelineResult run_pipeline(const Market& market, const SolverConfig& solver,
                            const ToleranceConfig& tol);

struct ExperimentRow {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t trials = 0;
  std::size_t completed = 0;
  std::size_t failed = 0;
  std::size_t certification_failures = 0;
  std::size_t ef = 0;
  std::size_t ef1 = 0;
  std::size_t ef11 = 0;
  std::size_t prop = 0;
  std::size_t prop1 = 0;
  double mean_solver_s = 0.0;
  double max_solver_s = 0.0;
  double mean_forest_s = 0.0;
  double max_forest_s = 0.0;
  double mean_round_s = 0.0;
  double max_round_s = 0.0;
  /// ||e' - e||_inf / ||p||_inf over completed trials.
  double mean_pert_ratio = 0.0;
  double max_pert_ratio = 0.0;
  /// One line per failed trial.
  std::vector<std::string> notes;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;
};

/// Runs the pipeline on config.trials generated instances for every agent
/// count in config.agent_counts.
ExperimentReport run_experiment(const GeneratorConfig& config, const SolverConfig& solver,
                                const ToleranceConfig& tol);

/// Fixed columns: n, m, trials, ef, ef1, ef11, prop, prop1, mean_solver_s,
/// max_solver_s, mean_forest_s, max_forest_s, mean_round_s, max_round_s,
/// mean_pert_ratio, max_pert_ratio.
std::string report_csv(const ExperimentReport& report);

/// Transposed table, one column per agent count, one row per metric.
std::string report_markdown(const ExperimentReport& report);

}  // namespace puremkt
