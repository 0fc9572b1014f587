#pragma once

// Internal: nlohmann::json conversions shared by the run-config parser and the
// checkpoint header.

#include <json.hpp>
#include <string>

#include "wavems/config_io.hpp"

namespace wavems::detail {

using nlohmann::json;

json model_to_json(const ModelConfig& c);
json train_to_json(const TrainConfig& c);
json metrics_to_json(const EpochMetrics& m);

// `path` prefixes error messages with the location of the offending key.
ModelConfig model_from_json(const json& j, const std::string& path, bool* num_classes_given = nullptr);
TrainConfig train_from_json(const json& j, const std::string& path);
EpochMetrics metrics_from_json(const json& j, const std::string& path);

}  // namespace wavems::detail
