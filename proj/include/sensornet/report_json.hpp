#pragma once

#include "sensornet/experiments.hpp"

#include <json.hpp>

namespace sensornet {

using OrderedJson = nlohmann::ordered_json;

OrderedJson to_json(const Selection& sel);
OrderedJson to_json(const SolveReport& report);
OrderedJson to_json(const RoundingOutcome& outcome);
OrderedJson to_json(const SimReport& report);
OrderedJson to_json(const FeasibilityVerdict& verdict);
OrderedJson to_json(const VerificationReport& report);
OrderedJson to_json(const ResultRow& row);
OrderedJson to_json(const PointResult& point);

ResultRow row_from_json(const OrderedJson& j);

}  // namespace sensornet
