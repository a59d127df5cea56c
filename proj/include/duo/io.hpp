#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "duo/circuit.hpp"
#include "duo/duotensor.hpp"
#include "duo/engine.hpp"
#include "duo/theory.hpp"

// JSON forms of theories, fragments, duotensors and reports. Errors in
// shape or content raise FormatError; theory contents are then validated
// by the theory layer itself.
namespace duo::io {

using nlohmann::json;

/// {"types": {name: {"backend", "dim", "fiducials": "default" | {...}}},
///  "operations": {id: {"inputs", "outputs", "setting"?, "outcomes":
///  {label: {"classical_matrix": rows} | {"kraus": [matrix, ...]}}}}}
/// Complex entries are numbers or [re, im] pairs.
Theory theory_from_json(const json& j);
json theory_to_json(const Theory& theory);

/// {"instances": {id: {"apparatus", "outcome", "setting", "inputs",
/// "outputs"}}, "wires": [{"from": [id, slot], "to": [id, slot]}]}
Fragment fragment_from_json(const json& j);
json fragment_to_json(const Fragment& f);

/// {"indices": [{"label", "direction", "type", "color", "dim"}], "values"}.
/// Doubles are written with round-trip precision.
Duotensor duotensor_from_json(const json& j);
json duotensor_to_json(const Duotensor& t);

json foliation_to_json(const Fragment& circuit, const Foliation& fol);
Foliation foliation_from_json(const json& j);

json plan_to_json(const ContractionPlan& plan);

/// {probability, plan, padding_count?, verdict?, k?}. The probability is
/// clamped to [0, 1] here and nowhere else.
json report(std::optional<double> probability, const ContractionPlan& plan, std::optional<int> padding_count = {},
            const RatioVerdict* verdict = nullptr);

/// {"error": kind, "message", "line"?, "column"?}
json error_to_json(const Error& e);

std::string read_file(const std::string& path);
Theory load_theory(const std::string& path);

}  // namespace duo::io
