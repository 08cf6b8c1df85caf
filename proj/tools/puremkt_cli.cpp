#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "puremkt/eg_solver.hpp"
#include "puremkt/errors.hpp"
#include "puremkt/fairness.hpp"
#include "puremkt/generator.hpp"
#include "puremkt/io.hpp"
#include "puremkt/oracles.hpp"
#include "puremkt/pipeline.hpp"
#include "puremkt/rounding.hpp"
#include "puremkt/spending_forest.hpp"

using namespace puremkt;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kNoConvergence = 2, kCertification = 3 };

struct Globals {
  std::uint64_t seed = 0;
  double tol_abs = ToleranceConfig{}.abs;
  double tol_rel = ToleranceConfig{}.rel;
  std::size_t max_iters = SolverConfig{}.max_iters;
  std::string out;
  std::string format = "csv";

  ToleranceConfig tol() const { return {tol_abs, tol_rel, ToleranceConfig{}.spend}; }

  SolverConfig solver() const {
    SolverConfig c;
    c.max_iters = max_iters;
    c.tol = tol();
    return c;
  }
};

std::string read_input(const std::string& path) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const Globals& g, const std::string& text) {
  if (g.out.empty() || g.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(g.out);
  if (!out) throw InvalidInput("cannot write " + g.out);
  out << text;
}

void emit(const Globals& g, const json& doc) { write_output(g, doc.dump(2) + "\n"); }

std::vector<std::int64_t> parse_values(const std::string& list) {
  std::vector<std::int64_t> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw InvalidInput("not an integer: '" + item + "'");
    }
  }
  return out;
}

// Outcome documents carry the market; a bare market document is solved first.
OutcomeDocument load_outcome(const Globals& g, const std::string& path) {
  const json doc = parse_document(read_input(path));
  if (doc.is_object() && doc.value("kind", "") == "market") {
    Market mk = market_from_json(doc);
    Outcome out = solve_equilibrium(mk, g.solver());
    return {std::move(mk), std::move(out)};
  }
  return outcome_from_json(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisher-market equilibria, rounding to pure markets, and fairness checks"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Generator seed");
  app.add_option("--tol-abs", g.tol_abs, "Absolute tolerance")->check(CLI::NonNegativeNumber);
  app.add_option("--tol-rel", g.tol_rel, "Relative tolerance")->check(CLI::NonNegativeNumber);
  app.add_option("--max-iters", g.max_iters, "Solver iteration cap")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output file (default stdout)");
  app.add_option("--format", g.format, "Experiment report format")
      ->check(CLI::IsMember({"csv", "md", "json-doc"}));

  GeneratorConfig gen;
  std::size_t trial = 0;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a random equal-income market");
  gen_cmd->add_option("-n,--agents", gen.n_agents, "Number of agents")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--goods-factor", gen.goods_factor, "Goods per agent");
  gen_cmd->add_option("--levels", gen.value_exponent_levels, "Value set size K");
  gen_cmd->add_option("--trial", trial, "Trial index");

  std::string input = "-";
  auto* solve_cmd = app.add_subcommand("solve", "Compute an equilibrium of a market");
  solve_cmd->add_option("input", input, "Market document (- for stdin)");
  auto* forest_cmd = app.add_subcommand("forest", "Rearrange an equilibrium to a forest");
  forest_cmd->add_option("input", input, "Outcome or market document");
  auto* round_cmd = app.add_subcommand("round", "Round an equilibrium to a pure market");
  round_cmd->add_option("input", input, "Outcome or market document");
  auto* check_cmd = app.add_subcommand("check", "Check an outcome or certify a rounding");
  check_cmd->add_option("input", input, "Outcome or rounding document");
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Solve, rearrange, round and certify");
  pipeline_cmd->add_option("input", input, "Market document");

  std::vector<std::size_t> counts = gen.agent_counts;
  auto* exp_cmd = app.add_subcommand("experiment", "Run the fairness experiment grid");
  exp_cmd->add_option("--agents", counts, "Agent counts")->delimiter(',');
  exp_cmd->add_option("--trials", gen.trials, "Trials per agent count");
  exp_cmd->add_option("--goods-factor", gen.goods_factor, "Goods per agent");
  exp_cmd->add_option("--levels", gen.value_exponent_levels, "Value set size K");

  auto* oracle_cmd = app.add_subcommand("oracle", "Reference instances");
  oracle_cmd->require_subcommand(1);
  std::string values;
  auto* part_cmd = oracle_cmd->add_subcommand("partition", "Purity of a partition market");
  part_cmd->add_option("values", values, "Comma-separated positive integers")->required();
  std::size_t comp_n = 1;
  double eps = 0.01;
  bool run = false;
  auto* comp_cmd = oracle_cmd->add_subcommand("comparative", "Comparative family instance");
  comp_cmd->add_option("-n", comp_n, "Family size")->check(CLI::PositiveNumber);
  comp_cmd->add_option("--eps", eps, "Perturbation in (0,1)");
  comp_cmd->add_flag("--run", run, "Also run the pipeline on it");

  CLI11_PARSE(app, argc, argv);

  try {
    gen.seed = g.seed;
    const ToleranceConfig tol = g.tol();
    if (*gen_cmd) {
      write_output(g, serialize_market(generate_instance(gen, trial)));
    } else if (*solve_cmd) {
      const Market mk = parse_market(read_input(input));
      emit(g, to_json(mk, solve_equilibrium(mk, g.solver())));
    } else if (*forest_cmd) {
      auto doc = load_outcome(g, input);
      const auto f = rearrange_to_forest(doc.market, doc.outcome.alloc, doc.outcome.prices, tol);
      doc.outcome.alloc = f.alloc;
      json out = to_json(doc.market, doc.outcome);
      out["forest_cancellations"] = f.cancellations;
      emit(g, out);
    } else if (*round_cmd) {
      const auto doc = load_outcome(g, input);
      const auto f = rearrange_to_forest(doc.market, doc.outcome.alloc, doc.outcome.prices, tol);
      const auto r = round_to_pure(doc.market, f.alloc, doc.outcome.prices, tol);
      emit(g, to_json(doc.market, r));
      if (!certify_rounding(doc.market, r, tol).pass) return kCertification;
    } else if (*check_cmd) {
      const json doc = parse_document(read_input(input));
      if (doc.is_object() && doc.value("kind", "") == "rounding") {
        const auto rd = rounding_from_json(doc);
        const auto cert = certify_rounding(rd.market, rd.result, tol);
        json out = to_json(cert);
        out["fairness"] = to_json(fairness_profile(rd.market, rd.result.alloc));
        emit(g, out);
        if (!cert.pass) return kCertification;
      } else {
        const auto od = outcome_from_json(doc);
        const auto report = check_equilibrium(od.market, od.outcome.alloc, od.outcome.prices, tol);
        emit(g, to_json(report));
        if (!report.is_equilibrium) return kInvalid;
      }
    } else if (*pipeline_cmd) {
      const Market mk = parse_market(read_input(input));
      const auto r = run_pipeline(mk, g.solver(), tol);
      emit(g, to_json(r));
      if (!r.certification.pass) return kCertification;
    } else if (*exp_cmd) {
      gen.agent_counts = counts;
      const auto report = run_experiment(gen, g.solver(), tol);
      if (g.format == "md") {
        write_output(g, report_markdown(report));
      } else if (g.format == "json-doc") {
        emit(g, to_json(report));
      } else {
        write_output(g, report_csv(report));
      }
      for (const auto& row : report.rows) {
        for (const auto& note : row.notes) std::cerr << "n=" << row.n << " " << note << "\n";
        if (row.certification_failures > 0) return kCertification;
      }
    } else if (*part_cmd) {
      const PartitionInstance inst{parse_values(values)};
      const auto v = purity_oracle_partition_family(inst);
      json out{{"kind", "purity_verdict"}, {"version", 1}, {"pure", v.is_pure}};
      out["market"] = to_json(partition_market(inst));
      if (v.witness) {
        out["witness"] = {{"first", v.witness->first}, {"second", v.witness->second}};
        out["prices"] = v.prices->prices;
        out["equilibrium"] = to_json(*v.report);
      }
      emit(g, out);
    } else if (*comp_cmd) {
      const Market mk = comparative_instance(comp_n, eps);
      json out{{"kind", "comparative_instance"}, {"version", 1}, {"n", comp_n}, {"eps", eps}};
      out["market"] = to_json(mk);
      out["quoted_prices"] = comparative_expected_prices(comp_n).prices;
      out["equilibrium_prices"] = comparative_equilibrium_prices(comp_n, eps).prices;
      if (run) {
        const auto r = run_pipeline(mk, g.solver(), tol);
        out["pipeline"] = to_json(r);
        emit(g, out);
        if (!r.certification.pass) return kCertification;
      } else {
        emit(g, out);
      }
    }
  } catch (const DidNotConverge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kOk;
}
