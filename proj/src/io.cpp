#include "puremkt/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "puremkt/errors.hpp"

namespace puremkt {

using nlohmann::json;

namespace {

constexpr int kVersion = 1;

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(json(std::vector<double>(row.begin(), row.end())));
  }
  return rows;
}

json header(const std::string& kind) { return json{{"kind", kind}, {"version", kVersion}}; }

const json& field(const json& doc, const std::string& name) {
  if (!doc.is_object()) throw ParseError(name, "document is not an object");
  auto it = doc.find(name);
  if (it == doc.end()) throw ParseError(name, "missing field");
  return *it;
}

void expect_kind(const json& doc, const std::string& kind) {
  const json& k = field(doc, "kind");
  if (!k.is_string() || k.get<std::string>() != kind) {
    throw ParseError("kind", "expected '" + kind + "', got " + k.dump());
  }
  const json& v = field(doc, "version");
  if (!v.is_number_integer() || v.get<int>() != kVersion) {
    throw ParseError("version", "unsupported version " + v.dump());
  }
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path, "expected a number, got " + v.dump());
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(path, "number is not finite");
  return d;
}

std::size_t count(const json& doc, const std::string& name) {
  const json& v = field(doc, name);
  if (!v.is_number_unsigned() || v.get<std::size_t>() == 0) {
    throw ParseError(name, "expected a positive integer, got " + v.dump());
  }
  return v.get<std::size_t>();
}

std::vector<double> vector_field(const json& doc, const std::string& name, std::size_t size) {
  const json& v = field(doc, name);
  if (!v.is_array()) throw ParseError(name, "expected an array");
  if (v.size() != size) {
    throw ParseError(name, "expected " + std::to_string(size) + " entries, got " +
                               std::to_string(v.size()));
  }
  std::vector<double> out(size);
  for (std::size_t k = 0; k < size; ++k) {
    out[k] = number(v[k], name + "[" + std::to_string(k) + "]");
  }
  return out;
}

Matrix matrix_field(const json& doc, const std::string& name, std::size_t rows, std::size_t cols) {
  const json& v = field(doc, name);
  if (!v.is_array() || v.size() != rows) {
    throw ParseError(name, "expected " + std::to_string(rows) + " rows");
  }
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_path = name + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || v[r].size() != cols) {
      throw ParseError(row_path, "expected " + std::to_string(cols) + " entries");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      out(r, c) = number(v[r][c], row_path + "[" + std::to_string(c) + "]");
    }
  }
  return out;
}

std::vector<std::optional<AgentIndex>> owner_field(const json& doc, std::size_t n, std::size_t m) {
  const json& v = field(doc, "owner");
  if (!v.is_array() || v.size() != m) {
    throw ParseError("owner", "expected " + std::to_string(m) + " entries");
  }
  std::vector<std::optional<AgentIndex>> owner(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::string path = "owner[" + std::to_string(j) + "]";
    if (v[j].is_null()) continue;
    if (!v[j].is_number_unsigned() || v[j].get<std::size_t>() >= n) {
      throw ParseError(path, "expected an agent index below " + std::to_string(n) + " or null");
    }
    owner[j] = v[j].get<std::size_t>();
  }
  return owner;
}

json owner_json(const IntegralAllocation& alloc) {
  json owner = json::array();
  for (const auto& o : alloc.owner) owner.push_back(o ? json(*o) : json(nullptr));
  return owner;
}

json check_json(const ConditionCheck& c) { return json{{"ok", c.ok}, {"worst", c.worst}}; }

const char* witness_kind(BudgetWitness::Kind k) {
  return k == BudgetWitness::Kind::kDeficit ? "deficit" : "surplus";
}

}  // namespace

json to_json(const Market& market) {
  json doc = header("market");
  doc["n"] = market.n_agents();
  doc["m"] = market.n_goods();
  doc["valuations"] = matrix_json(market.valuations());
  doc["budgets"] = market.budgets();
  return doc;
}

json to_json(const FractionalAllocation& alloc) {
  json doc = header("fractional_allocation");
  doc["n"] = alloc.n_agents();
  doc["m"] = alloc.n_goods();
  doc["shares"] = matrix_json(alloc.shares);
  return doc;
}

json to_json(const IntegralAllocation& alloc) {
  json doc = header("integral_allocation");
  doc["m"] = alloc.n_goods();
  doc["owner"] = owner_json(alloc);
  return doc;
}

json to_json(const PriceVector& prices) {
  json doc = header("prices");
  doc["m"] = prices.size();
  doc["prices"] = prices.prices;
  return doc;
}

json to_json(const Market& market, const Outcome& outcome) {
  json doc = header("outcome");
  doc["market"] = to_json(market);
  doc["shares"] = matrix_json(outcome.alloc.shares);
  doc["prices"] = outcome.prices.prices;
  doc["residual"] = outcome.residual;
  doc["iterations"] = outcome.iterations_used;
  return doc;
}

json to_json(const Market& market, const RoundingResult& result) {
  json doc = header("rounding");
  doc["market"] = to_json(market);
  doc["owner"] = owner_json(result.alloc);
  doc["budgets_new"] = result.budgets_new;
  doc["prices"] = result.prices.prices;
  doc["perturbation_inf"] = result.perturbation_inf;
  doc["price_inf"] = result.price_inf;
  doc["budget_sum_delta"] = result.budget_sum_delta;
  doc["rounds"] = result.rounds;
  json witnesses = json::array();
  for (const auto& w : result.witnesses) {
    witnesses.push_back({{"agent", w.agent},
                         {"kind", witness_kind(w.kind)},
                         {"good", w.good ? json(*w.good) : json(nullptr)}});
  }
  doc["witnesses"] = std::move(witnesses);
  return doc;
}

json to_json(const EquilibriumReport& report) {
  json doc = header("equilibrium_report");
  doc["is_equilibrium"] = report.is_equilibrium;
  doc["market_clearing"] = check_json(report.market_clearing);
  doc["budget_exhaustion"] = check_json(report.budget_exhaustion);
  doc["budget_residuals"] = report.budget_residuals;
  doc["mbb"] = check_json(report.mbb);
  doc["tolerance"] = {{"abs", report.tolerance_used.abs},
                      {"rel", report.tolerance_used.rel},
                      {"spend", report.tolerance_used.spend}};
  return doc;
}

json to_json(const FairnessProfile& profile) {
  json doc = header("fairness_profile");
  doc["ef"] = profile.ef;
  doc["ef1"] = profile.ef1;
  doc["ef11"] = profile.ef11;
  doc["prop"] = profile.prop;
  doc["prop1"] = profile.prop1;
  auto opt = [](const std::optional<GoodIndex>& g) { return g ? json(*g) : json(nullptr); };
  json pairs = json::array();
  for (const auto& w : profile.pairs) {
    if (w.ef) continue;  // only pairs with envy carry evidence worth printing
    pairs.push_back({{"agent", w.agent},
                     {"other", w.other},
                     {"own_value", w.own_value},
                     {"other_value", w.other_value},
                     {"removed", opt(w.removed)},
                     {"added", opt(w.added)},
                     {"ef1", w.ef1},
                     {"ef11", w.ef11}});
  }
  doc["envious_pairs"] = std::move(pairs);
  json agents = json::array();
  for (const auto& w : profile.agents) {
    agents.push_back({{"agent", w.agent},
                      {"own_value", w.own_value},
                      {"grand_value", w.grand_value},
                      {"added", opt(w.added)},
                      {"prop", w.prop},
                      {"prop1", w.prop1}});
  }
  doc["agents"] = std::move(agents);
  return doc;
}

json to_json(const CertificationReport& cert) {
  json doc = header("certification");
  doc["pass"] = cert.pass;
  doc["complete"] = cert.complete;
  doc["budgets_consistent"] = cert.budgets_consistent;
  doc["budget_mismatch"] = cert.budget_mismatch;
  doc["perturbation_ok"] = cert.perturbation_ok;
  doc["perturbation_inf"] = cert.perturbation_inf;
  doc["price_inf"] = cert.price_inf;
  doc["budget_sum_ok"] = cert.budget_sum_ok;
  doc["budget_sum_delta"] = cert.budget_sum_delta;
  doc["equilibrium"] = to_json(cert.equilibrium);
  doc["fpo"] = cert.fpo;
  doc["witnesses_ok"] = cert.witnesses_ok;
  doc["failures"] = cert.failures;
  return doc;
}

json to_json(const PipelineResult& result) {
  json doc = header("pipeline");
  doc["solver"] = {{"residual", result.outcome.residual},
                   {"iterations", result.outcome.iterations_used},
                   {"prices", result.outcome.prices.prices}};
  doc["equilibrium"] = to_json(result.equilibrium);
  doc["forest_cancellations"] = result.forest.cancellations;
  doc["allocation"] = owner_json(result.rounding.alloc);
  doc["budgets_new"] = result.rounding.budgets_new;
  doc["perturbation_inf"] = result.rounding.perturbation_inf;
  doc["price_inf"] = result.rounding.price_inf;
  doc["budget_sum_delta"] = result.rounding.budget_sum_delta;
  doc["certification"] = to_json(result.certification);
  doc["fairness"] = to_json(result.fairness);
  doc["timings"] = {{"solver_s", result.timings.solver_s},
                    {"forest_s", result.timings.forest_s},
                    {"round_s", result.timings.round_s},
                    {"certify_s", result.timings.certify_s},
                    {"fairness_s", result.timings.fairness_s}};
  return doc;
}

json to_json(const ExperimentReport& report) {
  json doc = header("experiment_report");
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"n", r.n},
                    {"m", r.m},
                    {"trials", r.trials},
                    {"completed", r.completed},
                    {"failed", r.failed},
                    {"certification_failures", r.certification_failures},
                    {"ef", r.ef},
                    {"ef1", r.ef1},
                    {"ef11", r.ef11},
                    {"prop", r.prop},
                    {"prop1", r.prop1},
                    {"mean_solver_s", r.mean_solver_s},
                    {"max_solver_s", r.max_solver_s},
                    {"mean_forest_s", r.mean_forest_s},
                    {"max_forest_s", r.max_forest_s},
                    {"mean_round_s", r.mean_round_s},
                    {"max_round_s", r.max_round_s},
                    {"mean_pert_ratio", r.mean_pert_ratio},
                    {"max_pert_ratio", r.max_pert_ratio},
                    {"notes", r.notes}});
  }
  doc["rows"] = std::move(rows);
  return doc;
}

Market market_from_json(const json& doc) {
  expect_kind(doc, "market");
  const std::size_t n = count(doc, "n");
  const std::size_t m = count(doc, "m");
  Matrix v = matrix_field(doc, "valuations", n, m);
  for (std::size_t i = 0; i < n; ++i) {
    bool positive = false;
    for (std::size_t j = 0; j < m; ++j) {
      if (v(i, j) < 0.0) {
        throw ParseError("valuations[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                         "valuation must be nonnegative");
      }
      positive = positive || v(i, j) > 0.0;
    }
    if (!positive) {
      throw ParseError("valuations[" + std::to_string(i) + "]",
                       "agent needs at least one positive valuation");
    }
  }
  std::vector<double> e = vector_field(doc, "budgets", n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(e[i] > 0.0)) {
      throw ParseError("budgets[" + std::to_string(i) + "]", "budget must be positive");
    }
  }
  return Market(std::move(v), std::move(e));
}

FractionalAllocation fractional_from_json(const json& doc) {
  expect_kind(doc, "fractional_allocation");
  const std::size_t n = count(doc, "n");
  const std::size_t m = count(doc, "m");
  FractionalAllocation alloc(matrix_field(doc, "shares", n, m));
  try {
    alloc.validate(1e-9);
  } catch (const InvalidInput& e) {
    throw ParseError("shares", e.what());
  }
  return alloc;
}

IntegralAllocation integral_from_json(const json& doc) {
  expect_kind(doc, "integral_allocation");
  const std::size_t m = count(doc, "m");
  return IntegralAllocation(owner_field(doc, std::numeric_limits<std::size_t>::max(), m));
}

PriceVector prices_from_json(const json& doc) {
  expect_kind(doc, "prices");
  const std::size_t m = count(doc, "m");
  auto p = vector_field(doc, "prices", m);
  for (std::size_t j = 0; j < m; ++j) {
    if (p[j] < 0.0) throw ParseError("prices[" + std::to_string(j) + "]", "price must be >= 0");
  }
  return PriceVector(std::move(p));
}

OutcomeDocument outcome_from_json(const json& doc) {
  expect_kind(doc, "outcome");
  Market market = market_from_json(field(doc, "market"));
  Outcome outcome;
  outcome.alloc =
      FractionalAllocation(matrix_field(doc, "shares", market.n_agents(), market.n_goods()));
  outcome.prices = PriceVector(vector_field(doc, "prices", market.n_goods()));
  if (doc.contains("residual")) outcome.residual = number(doc["residual"], "residual");
  if (doc.contains("iterations") && doc["iterations"].is_number_unsigned()) {
    outcome.iterations_used = doc["iterations"].get<std::size_t>();
  }
  return {std::move(market), std::move(outcome)};
}

RoundingDocument rounding_from_json(const json& doc) {
  expect_kind(doc, "rounding");
  Market market = market_from_json(field(doc, "market"));
  const std::size_t n = market.n_agents();
  const std::size_t m = market.n_goods();
  RoundingResult r;
  r.alloc = IntegralAllocation(owner_field(doc, n, m));
  r.budgets_new = vector_field(doc, "budgets_new", n);
  r.prices = PriceVector(vector_field(doc, "prices", m));
  r.perturbation_inf = number(field(doc, "perturbation_inf"), "perturbation_inf");
  r.price_inf = number(field(doc, "price_inf"), "price_inf");
  r.budget_sum_delta = number(field(doc, "budget_sum_delta"), "budget_sum_delta");
  if (doc.contains("rounds") && doc["rounds"].is_number_unsigned()) {
    r.rounds = doc["rounds"].get<std::size_t>();
  }
  if (doc.contains("witnesses")) {
    const json& ws = doc["witnesses"];
    if (!ws.is_array()) throw ParseError("witnesses", "expected an array");
    for (std::size_t k = 0; k < ws.size(); ++k) {
      const std::string path = "witnesses[" + std::to_string(k) + "]";
      BudgetWitness w;
      const json& agent = field(ws[k], "agent");
      if (!agent.is_number_unsigned() || agent.get<std::size_t>() >= n) {
        throw ParseError(path + ".agent", "expected an agent index");
      }
      w.agent = agent.get<std::size_t>();
      const json& kind = field(ws[k], "kind");
      if (kind == "deficit") {
        w.kind = BudgetWitness::Kind::kDeficit;
      } else if (kind == "surplus") {
        w.kind = BudgetWitness::Kind::kSurplus;
      } else {
        throw ParseError(path + ".kind", "expected 'deficit' or 'surplus'");
      }
      const json& good = field(ws[k], "good");
      if (!good.is_null()) {
        if (!good.is_number_unsigned() || good.get<std::size_t>() >= m) {
          throw ParseError(path + ".good", "expected a good index or null");
        }
        w.good = good.get<std::size_t>();
      }
      r.witnesses.push_back(w);
    }
  }
  return {std::move(market), std::move(r)};
}

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line =
        1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw ParseError("", e.what(), line);
  }
}

std::string serialize_market(const Market& market) { return to_json(market).dump(2) + "\n"; }

Market parse_market(const std::string& text) { return market_from_json(parse_document(text)); }

}  // namespace puremkt
