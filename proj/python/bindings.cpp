#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "puremkt/eg_solver.hpp"
#include "puremkt/errors.hpp"
#include "puremkt/fairness.hpp"
#include "puremkt/generator.hpp"
#include "puremkt/io.hpp"
#include "puremkt/oracles.hpp"
#include "puremkt/pipeline.hpp"
#include "puremkt/rounding.hpp"
#include "puremkt/spending_forest.hpp"

namespace py = pybind11;
using namespace puremkt;

namespace {

using Rows = std::vector<std::vector<double>>;
using Owners = std::vector<std::optional<AgentIndex>>;

FractionalAllocation shares(const Rows& rows) {
  return FractionalAllocation(Matrix::from_rows(rows));
}

py::dict check_dict(const ConditionCheck& c) {
  py::dict d;
  d["ok"] = c.ok;
  d["worst"] = c.worst;
  return d;
}

}  // namespace

PYBIND11_MODULE(_puremkt, m) {
  m.doc() = "Fisher-market equilibria, rounding to pure markets, and fairness checks";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DidNotConverge>(m, "DidNotConverge", error.ptr());
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<NotAnEquilibrium>(m, "NotAnEquilibrium", error.ptr());
  py::register_exception<NotAForest>(m, "NotAForest", error.ptr());
  py::register_exception<TooLarge>(m, "TooLarge", error.ptr());

  py::class_<ToleranceConfig>(m, "ToleranceConfig")
      .def(py::init([](double abs, double rel, double spend) {
             return ToleranceConfig{abs, rel, spend};
           }),
           py::arg("abs") = ToleranceConfig{}.abs, py::arg("rel") = ToleranceConfig{}.rel,
           py::arg("spend") = ToleranceConfig{}.spend)
      .def_readwrite("abs", &ToleranceConfig::abs)
      .def_readwrite("rel", &ToleranceConfig::rel)
      .def_readwrite("spend", &ToleranceConfig::spend);

  py::enum_<StepRule>(m, "StepRule")
      .value("BACKTRACKING", StepRule::kBacktracking)
      .value("BARZILAI_BORWEIN", StepRule::kBarzilaiBorwein);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("max_iters", &SolverConfig::max_iters)
      .def_readwrite("step_size", &SolverConfig::step_size)
      .def_readwrite("step_rule", &SolverConfig::step_rule)
      .def_readwrite("precondition", &SolverConfig::precondition)
      .def_readwrite("convergence_tol", &SolverConfig::convergence_tol)
      .def_readwrite("seed", &SolverConfig::seed)
      .def_readwrite("tol", &SolverConfig::tol)
      .def_readwrite("on_step", &SolverConfig::on_step);

  py::class_<Market>(m, "Market")
      .def(py::init([](const Rows& v, std::vector<double> e) {
             return Market(Matrix::from_rows(v), std::move(e));
           }),
           py::arg("valuations"), py::arg("budgets"))
      .def_property_readonly("n_agents", &Market::n_agents)
      .def_property_readonly("n_goods", &Market::n_goods)
      .def_property_readonly("valuations", [](const Market& mk) { return mk.valuations().to_rows(); })
      .def_property_readonly("budgets", &Market::budgets)
      .def("to_json", &serialize_market)
      .def_static("from_json", &parse_market)
      .def("__eq__", [](const Market& a, const Market& b) { return a == b; });

  py::class_<Outcome>(m, "Outcome")
      .def_property_readonly("shares", [](const Outcome& o) { return o.alloc.shares.to_rows(); })
      .def_property_readonly("prices", [](const Outcome& o) { return o.prices.prices; })
      .def_readonly("residual", &Outcome::residual)
      .def_readonly("iterations_used", &Outcome::iterations_used);

  py::class_<EquilibriumReport>(m, "EquilibriumReport")
      .def_readonly("is_equilibrium", &EquilibriumReport::is_equilibrium)
      .def_property_readonly("market_clearing",
                             [](const EquilibriumReport& r) { return check_dict(r.market_clearing); })
      .def_property_readonly(
          "budget_exhaustion", [](const EquilibriumReport& r) { return check_dict(r.budget_exhaustion); })
      .def_property_readonly("mbb", [](const EquilibriumReport& r) { return check_dict(r.mbb); })
      .def_readonly("budget_residuals", &EquilibriumReport::budget_residuals)
      .def("worst_violation", &EquilibriumReport::worst_violation);

  py::class_<ForestResult>(m, "ForestResult")
      .def_property_readonly("shares", [](const ForestResult& f) { return f.alloc.shares.to_rows(); })
      .def_readonly("cancellations", &ForestResult::cancellations);

  py::class_<RoundingResult>(m, "RoundingResult")
      .def_property_readonly("owner", [](const RoundingResult& r) { return r.alloc.owner; })
      .def("bundle", [](const RoundingResult& r, AgentIndex i) { return r.alloc.bundle(i); })
      .def_readonly("budgets_new", &RoundingResult::budgets_new)
      .def_property_readonly("prices", [](const RoundingResult& r) { return r.prices.prices; })
      .def_readonly("perturbation_inf", &RoundingResult::perturbation_inf)
      .def_readonly("price_inf", &RoundingResult::price_inf)
      .def_readonly("budget_sum_delta", &RoundingResult::budget_sum_delta)
      .def_readonly("rounds", &RoundingResult::rounds)
      .def_property_readonly("witnesses", [](const RoundingResult& r) {
        py::list out;
        for (const auto& w : r.witnesses) {
          const char* kind = w.kind == BudgetWitness::Kind::kDeficit ? "deficit" : "surplus";
          out.append(py::make_tuple(w.agent, kind, w.good));
        }
        return out;
      });

  py::class_<CertificationReport>(m, "CertificationReport")
      .def_readonly("passed", &CertificationReport::pass)
      .def_readonly("complete", &CertificationReport::complete)
      .def_readonly("budgets_consistent", &CertificationReport::budgets_consistent)
      .def_readonly("perturbation_ok", &CertificationReport::perturbation_ok)
      .def_readonly("budget_sum_ok", &CertificationReport::budget_sum_ok)
      .def_readonly("equilibrium", &CertificationReport::equilibrium)
      .def_readonly("fpo", &CertificationReport::fpo)
      .def_readonly("witnesses_ok", &CertificationReport::witnesses_ok)
      .def_readonly("failures", &CertificationReport::failures);

  py::class_<FairnessProfile>(m, "FairnessProfile")
      .def_readonly("ef", &FairnessProfile::ef)
      .def_readonly("ef1", &FairnessProfile::ef1)
      .def_readonly("ef11", &FairnessProfile::ef11)
      .def_readonly("prop", &FairnessProfile::prop)
      .def_readonly("prop1", &FairnessProfile::prop1);

  py::class_<PipelineResult>(m, "PipelineResult")
      .def_readonly("outcome", &PipelineResult::outcome)
      .def_readonly("equilibrium", &PipelineResult::equilibrium)
      .def_readonly("forest", &PipelineResult::forest)
      .def_readonly("rounding", &PipelineResult::rounding)
      .def_readonly("certification", &PipelineResult::certification)
      .def_readonly("fairness", &PipelineResult::fairness)
      .def_property_readonly("timings", [](const PipelineResult& r) {
        py::dict d;
        d["solver_s"] = r.timings.solver_s;
        d["forest_s"] = r.timings.forest_s;
        d["round_s"] = r.timings.round_s;
        d["certify_s"] = r.timings.certify_s;
        d["fairness_s"] = r.timings.fairness_s;
        return d;
      })
      .def("to_json", [](const PipelineResult& r) { return to_json(r).dump(); });

  py::class_<ExperimentReport>(m, "ExperimentReport")
      .def_property_readonly("rows",
                             [](const ExperimentReport& r) {
                               py::list out;
                               for (const auto& row : r.rows) {
                                 py::dict d;
                                 d["n"] = row.n;
                                 d["m"] = row.m;
                                 d["trials"] = row.trials;
                                 d["completed"] = row.completed;
                                 d["failed"] = row.failed;
                                 d["certification_failures"] = row.certification_failures;
                                 d["ef"] = row.ef;
                                 d["ef1"] = row.ef1;
                                 d["ef11"] = row.ef11;
                                 d["prop"] = row.prop;
                                 d["prop1"] = row.prop1;
                                 d["mean_solver_s"] = row.mean_solver_s;
                                 d["mean_round_s"] = row.mean_round_s;
                                 d["max_pert_ratio"] = row.max_pert_ratio;
                                 d["notes"] = row.notes;
                                 out.append(d);
                               }
                               return out;
                             })
      .def("csv", &report_csv)
      .def("markdown", &report_markdown)
      .def("to_json", [](const ExperimentReport& r) { return to_json(r).dump(); });

  m.def("solve_equilibrium", &solve_equilibrium, py::arg("market"),
        py::arg("config") = SolverConfig{});
  m.def(
      "check_equilibrium",
      [](const Market& mk, const Rows& x, std::vector<double> p,
         std::optional<std::vector<double>> budgets, const ToleranceConfig& tol) {
        const PriceVector prices(std::move(p));
        if (budgets) return check_equilibrium(mk, shares(x), prices, *budgets, tol);
        return check_equilibrium(mk, shares(x), prices, tol);
      },
      py::arg("market"), py::arg("shares"), py::arg("prices"), py::arg("budgets") = py::none(),
      py::arg("tol") = ToleranceConfig{});
  m.def(
      "eg_objective", [](const Market& mk, const Rows& x) { return eg_objective(mk, shares(x)); },
      py::arg("market"), py::arg("shares"));
  m.def(
      "eg_gradient",
      [](const Market& mk, const Rows& x) { return eg_gradient(mk, shares(x)).to_rows(); },
      py::arg("market"), py::arg("shares"));
  m.def(
      "rearrange_to_forest",
      [](const Market& mk, const Rows& x, std::vector<double> p, const ToleranceConfig& tol) {
        return rearrange_to_forest(mk, shares(x), PriceVector(std::move(p)), tol);
      },
      py::arg("market"), py::arg("shares"), py::arg("prices"), py::arg("tol") = ToleranceConfig{});
  m.def(
      "round_to_pure",
      [](const Market& mk, const Rows& x, std::vector<double> p, const ToleranceConfig& tol) {
        return round_to_pure(mk, shares(x), PriceVector(std::move(p)), tol);
      },
      py::arg("market"), py::arg("shares"), py::arg("prices"), py::arg("tol") = ToleranceConfig{});
  m.def("certify_rounding", &certify_rounding, py::arg("market"), py::arg("result"),
        py::arg("tol") = ToleranceConfig{});
  m.def(
      "fairness_profile",
      [](const Market& mk, const Owners& owner) {
        return fairness_profile(mk, IntegralAllocation(owner));
      },
      py::arg("market"), py::arg("owner"));
  m.def(
      "brute_force_integral_po",
      [](const Market& mk, const Owners& owner) -> std::optional<Owners> {
        const auto r = brute_force_integral_po(mk, IntegralAllocation(owner));
        if (!r.dominated) return std::nullopt;
        return r.dominator->owner;
      },
      py::arg("market"), py::arg("owner"),
      "Returns a dominating owner list, or None if the allocation is Pareto optimal.");

  m.def(
      "generate_instance",
      [](std::size_t n_agents, std::size_t trial, std::uint64_t seed, std::size_t goods_factor,
         std::size_t levels) {
        GeneratorConfig g;
        g.n_agents = n_agents;
        g.seed = seed;
        g.goods_factor = goods_factor;
        g.value_exponent_levels = levels;
        return generate_instance(g, trial);
      },
      py::arg("n_agents"), py::arg("trial") = 0, py::arg("seed") = 0, py::arg("goods_factor") = 5,
      py::arg("levels") = 5);
  m.def("run_pipeline", &run_pipeline, py::arg("market"), py::arg("solver") = SolverConfig{},
        py::arg("tol") = ToleranceConfig{});
  m.def(
      "run_experiment",
      [](std::vector<std::size_t> agent_counts, std::size_t trials, std::uint64_t seed,
         std::size_t goods_factor, std::size_t levels, const SolverConfig& solver,
         const ToleranceConfig& tol) {
        GeneratorConfig g;
        g.agent_counts = std::move(agent_counts);
        g.trials = trials;
        g.seed = seed;
        g.goods_factor = goods_factor;
        g.value_exponent_levels = levels;
        return run_experiment(g, solver, tol);
      },
      py::arg("agent_counts") = GeneratorConfig{}.agent_counts, py::arg("trials") = 100,
      py::arg("seed") = 0, py::arg("goods_factor") = 5, py::arg("levels") = 5,
      py::arg("solver") = SolverConfig{}, py::arg("tol") = ToleranceConfig{});

  m.def(
      "partition_market",
      [](std::vector<std::int64_t> values) { return partition_market({std::move(values)}); },
      py::arg("values"));
  m.def(
      "purity_oracle",
      [](std::vector<std::int64_t> values) -> py::object {
        const auto v = purity_oracle_partition_family({std::move(values)});
        if (!v.is_pure) return py::none();
        return py::make_tuple(v.witness->first, v.witness->second);
      },
      py::arg("values"),
      "Returns the first equal-sum split as (goods of agent 0, goods of agent 1), or None.");
  m.def("comparative_instance", &comparative_instance, py::arg("n"), py::arg("eps"));
  m.def(
      "comparative_expected_prices",
      [](std::size_t n) { return comparative_expected_prices(n).prices; }, py::arg("n"));
  m.def(
      "comparative_equilibrium_prices",
      [](std::size_t n, double eps) { return comparative_equilibrium_prices(n, eps).prices; },
      py::arg("n"), py::arg("eps"));
}
