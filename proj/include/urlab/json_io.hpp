#pragma once

#include <json.hpp>

#include "urlab/fraisse.hpp"
#include "urlab/topology.hpp"

namespace urlab {

using Json = nlohmann::ordered_json;

// Scalars encode as "p/q" when rational, {"rat": "p/q", "sqrt2": "r/s"} otherwise.
Json scalar_to_json(const Scalar& s);
Scalar scalar_from_json(const Json& j);

Json space_to_json(const FiniteMetricSpace& s);
FiniteMetricSpace space_from_json(const Json& j);

Json triple_to_json(const Triple& t);
Triple triple_from_json(const Json& j);

Json embedding_to_json(const Embedding& e);
std::vector<std::size_t> index_list_from_json(const Json& j);

Json spec_to_json(const ExtensionSpec& s);
/// base is taken from the caller, not the JSON.
ExtensionSpec spec_from_json(const Json& j, const Triple& base);

Json stage_to_json(const AmbientStage& s);
AmbientStage stage_from_json(const Json& j);

Json game_to_json(const GameState& gs);

Json metric_report_to_json(const ValidationReport& r);
Json triple_report_to_json(const TripleReport& r);
Json discrepancy_to_json(const DiscrepancyReport& r);
Json trace_to_json(const RationalizationTrace& t);
Json urstar_to_json(const UrStarVerdict& v);
Json step_report_to_json(const StepReport& r);

/// The file-format reference served by the schema verb.
Json format_schemas();

}  // namespace urlab
