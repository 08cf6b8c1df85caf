#pragma once

#include <string>

#include <json.hpp>

#include "puremkt/eg_solver.hpp"
#include "puremkt/fairness.hpp"
#include "puremkt/pipeline.hpp"
#include "puremkt/rounding.hpp"

namespace puremkt {

// JSON documents, each tagged with "kind" and "version". Doubles are written
// in shortest round-trip form, so parse(serialize(x)) == x bit for bit.

nlohmann::json to_json(const Market& market);
nlohmann::json to_json(const FractionalAllocation& alloc);
nlohmann::json to_json(const IntegralAllocation& alloc);
nlohmann::json to_json(const PriceVector& prices);
/// Outcome document embeds its market so later stages are self-contained.
nlohmann::json to_json(const Market& market, const Outcome& outcome);
nlohmann::json to_json(const Market& market, const RoundingResult& result);
nlohmann::json to_json(const EquilibriumReport& report);
nlohmann::json to_json(const FairnessProfile& profile);
nlohmann::json to_json(const CertificationReport& cert);
nlohmann::json to_json(const PipelineResult& result);
nlohmann::json to_json(const ExperimentReport& report);

Market market_from_json(const nlohmann::json& doc);
FractionalAllocation fractional_from_json(const nlohmann::json& doc);
IntegralAllocation integral_from_json(const nlohmann::json& doc);
PriceVector prices_from_json(const nlohmann::json& doc);

struct OutcomeDocument {
  Market market;
  Outcome outcome;
};
OutcomeDocument outcome_from_json(const nlohmann::json& doc);

struct RoundingDocument {
  Market market;
  RoundingResult result;
};
RoundingDocument rounding_from_json(const nlohmann::json& doc);

/// Parses text into JSON; syntax errors become ParseError with a line number.
nlohmann::json parse_document(const std::string& text);

std::string serialize_market(const Market& market);
Market parse_market(const std::string& text);

}  // namespace puremkt
