#pragma once

#include <json.hpp>

#include "gazeprompt/augmentation.hpp"
#include "gazeprompt/behavior.hpp"
#include "gazeprompt/calibration.hpp"
#include "gazeprompt/metrics.hpp"
#include "gazeprompt/simulator.hpp"
#include "gazeprompt/types.hpp"

namespace gazeprompt {

using Json = nlohmann::json;

// Readers throw Error(invalid_config) for configuration objects and Error(parse) for
// data objects when a field is missing, mistyped or unknown.

Json to_json(const ScreenGeometry& g);
ScreenGeometry geometry_from_json(const Json& j);

Json to_json(const EngineConfig& c);
// Fields absent from j keep the values of base.
EngineConfig engine_config_from_json(const Json& j, const EngineConfig& base = {});

Json to_json(const AugmentationConfig& c);
AugmentationConfig augmentation_config_from_json(const Json& j, const AugmentationConfig& base = {});

Json to_json(const Viewport& v);
Viewport viewport_from_json(const Json& j, const Viewport& base = {});

Json to_json(const PageLayout& layout);
// text_width and line_height are recomputed from the boxes when absent.
PageLayout layout_from_json(const Json& j);

Json id_map_to_json(const IdMap& map);
IdMap id_map_from_json(const Json& j);

Json to_json(const GazeSample& s);
GazeSample gaze_sample_from_json(const Json& j);

Json to_json(const Fixation& f);
Fixation fixation_from_json(const Json& j);

Json to_json(const BehaviorEvent& e);
BehaviorEvent behavior_event_from_json(const Json& j);

Json to_json(const AugmentationEvent& e);

Json to_json(const DriftProfile& p);
DriftProfile drift_profile_from_json(const Json& j);

Json to_json(const TargetLayout& t, const ScreenGeometry& geom);

Json to_json(const ReaderProfile& p);
ReaderProfile reader_profile_from_json(const Json& j, const ReaderProfile& base = {});

Json to_json(const GroundTruth& t);
GroundTruth ground_truth_from_json(const Json& j);

Json to_json(const PassageMetrics& m);

// Compact single-line serialization; invalid UTF-8 in strings is replaced, never thrown.
std::string dump_line(const Json& j);

// Parses text as a single JSON document; syntax errors become Error(parse).
Json parse_json(std::string_view text);

}  // namespace gazeprompt
