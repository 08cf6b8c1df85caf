#include "puremkt/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

namespace puremkt {

namespace {

template <typename F>
auto timed(double& seconds, F&& f) {
  const auto start = std::chrono::steady_clock::now();
  auto out = std::forward<F>(f)();
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

PipelineResult run_pipeline(const Market& market, const SolverConfig& solver,
                            const ToleranceConfig& tol) {
  PipelineResult r;
  SolverConfig config = solver;
  config.tol = tol;
  r.outcome = timed(r.timings.solver_s, [&] { return solve_equilibrium(market, config); });
  r.equilibrium = check_equilibrium(market, r.outcome.alloc, r.outcome.prices, tol);
  r.forest = timed(r.timings.forest_s, [&] {
    return rearrange_to_forest(market, r.outcome.alloc, r.outcome.prices, tol);
  });
  r.rounding = timed(r.timings.round_s, [&] {
    return round_to_pure(market, r.forest.alloc, r.outcome.prices, tol);
  });
  r.certification =
      timed(r.timings.certify_s, [&] { return certify_rounding(market, r.rounding, tol); });
  r.fairness =
      timed(r.timings.fairness_s, [&] { return fairness_profile(market, r.rounding.alloc); });
  return r;
}

ExperimentReport run_experiment(const GeneratorConfig& config, const SolverConfig& solver,
                                const ToleranceConfig& tol) {
  ExperimentReport report;
  if (config.trials == 0) return report;
  for (std::size_t n : config.agent_counts) {
    GeneratorConfig gen = config;
    gen.n_agents = n;
    gen.validate();
    ExperimentRow row;
    row.n = n;
    row.m = n * config.goods_factor;
    row.trials = config.trials;
    for (std::size_t t = 0; t < config.trials; ++t) {
      const Market market = generate_instance(gen, t);
      PipelineResult r;
      try {
        r = run_pipeline(market, solver, tol);
      } catch (const Error& e) {
        ++row.failed;
        row.notes.push_back("trial " + std::to_string(t) + ": " + e.what());
        continue;
      }
      ++row.completed;
      if (!r.certification.pass) {
        ++row.certification_failures;
        row.notes.push_back("trial " + std::to_string(t) + ": certification failed");
      }
      row.ef += r.fairness.ef;
      row.ef1 += r.fairness.ef1;
      row.ef11 += r.fairness.ef11;
      row.prop += r.fairness.prop;
      row.prop1 += r.fairness.prop1;
      row.mean_solver_s += r.timings.solver_s;
      row.max_solver_s = std::max(row.max_solver_s, r.timings.solver_s);
      row.mean_forest_s += r.timings.forest_s;
      row.max_forest_s = std::max(row.max_forest_s, r.timings.forest_s);
      row.mean_round_s += r.timings.round_s;
      row.max_round_s = std::max(row.max_round_s, r.timings.round_s);
      const double ratio =
          r.rounding.price_inf > 0.0 ? r.rounding.perturbation_inf / r.rounding.price_inf : 0.0;
      row.mean_pert_ratio += ratio;
      row.max_pert_ratio = std::max(row.max_pert_ratio, ratio);
    }
    if (row.completed > 0) {
      const double c = static_cast<double>(row.completed);
      row.mean_solver_s /= c;
      row.mean_forest_s /= c;
      row.mean_round_s /= c;
      row.mean_pert_ratio /= c;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string report_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "n,m,trials,ef,ef1,ef11,prop,prop1,mean_solver_s,max_solver_s,mean_forest_s,"
         "max_forest_s,mean_round_s,max_round_s,mean_pert_ratio,max_pert_ratio\n";
  for (const auto& r : report.rows) {
    out << r.n << ',' << r.m << ',' << r.trials << ',' << r.ef << ',' << r.ef1 << ',' << r.ef11
        << ',' << r.prop << ',' << r.prop1 << ',' << fixed(r.mean_solver_s, 6) << ','
        << fixed(r.max_solver_s, 6) << ',' << fixed(r.mean_forest_s, 6) << ','
        << fixed(r.max_forest_s, 6) << ',' << fixed(r.mean_round_s, 6) << ','
        << fixed(r.max_round_s, 6) << ',' << fixed(r.mean_pert_ratio, 6) << ','
        << fixed(r.max_pert_ratio, 6) << '\n';
  }
  return out.str();
}

std::string report_markdown(const ExperimentReport& report) {
  struct Line {
    std::string label;
    std::function<std::string(const ExperimentRow&)> cell;
  };
  const std::vector<Line> lines{
      {"Number of agents (n)", [](const ExperimentRow& r) { return "n=" + std::to_string(r.n); }},
      {"Number of goods (m)", [](const ExperimentRow& r) { return "m=" + std::to_string(r.m); }},
      {"Mean run-time of Gradient Ascent",
       [](const ExperimentRow& r) { return fixed(r.mean_solver_s, 4) + " sec"; }},
      {"Mean run-time of forest rearrangement",
       [](const ExperimentRow& r) { return fixed(r.mean_forest_s, 4) + " sec"; }},
      {"Mean run-time of rounding",
       [](const ExperimentRow& r) { return fixed(r.mean_round_s, 4) + " sec"; }},
      {"Max run-time of Gradient Ascent",
       [](const ExperimentRow& r) { return fixed(r.max_solver_s, 4) + " sec"; }},
      {"Max run-time of forest rearrangement",
       [](const ExperimentRow& r) { return fixed(r.max_forest_s, 4) + " sec"; }},
      {"Max run-time of rounding",
       [](const ExperimentRow& r) { return fixed(r.max_round_s, 4) + " sec"; }},
      {"Number of EF allocations", [](const ExperimentRow& r) { return std::to_string(r.ef); }},
      {"Number of EF1 allocations", [](const ExperimentRow& r) { return std::to_string(r.ef1); }},
      {"Number of EF11 allocations",
       [](const ExperimentRow& r) { return std::to_string(r.ef11); }},
      {"Number of Prop allocations",
       [](const ExperimentRow& r) { return std::to_string(r.prop); }},
      {"Number of Prop1 allocations",
       [](const ExperimentRow& r) { return std::to_string(r.prop1); }},
      {"Trials (completed / failed)",
       [](const ExperimentRow& r) {
         return std::to_string(r.completed) + " / " + std::to_string(r.failed);
       }},
      {"Mean budget perturbation / max price",
       [](const ExperimentRow& r) { return fixed(r.mean_pert_ratio, 4); }},
      {"Max budget perturbation / max price",
       [](const ExperimentRow& r) { return fixed(r.max_pert_ratio, 4); }},
  };
  std::ostringstream out;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    out << "| " << lines[k].label;
    for (const auto& r : report.rows) out << " | " << lines[k].cell(r);
    out << " |\n";
    if (k == 0) {
      out << "|---";
      for (std::size_t c = 0; c < report.rows.size(); ++c) out << "|---";
      out << "|\n";
    }
  }
  return out.str();
}

}  // namespace puremkt
