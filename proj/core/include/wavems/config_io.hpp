#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "wavems/model.hpp"
#include "wavems/trainer.hpp"

namespace wavems {

struct DataSettings {
  std::string manifest;  // optional default for commands that take --manifest
};

struct EvalSettings {
  std::size_t hop = 0;  // 0: half a window
  std::size_t repeats = 1;
};

struct AnalysisSettings {
  std::size_t nfft = 2048;
};

/// Run configuration document with sections model, train, data, eval and
/// analysis. Missing sections and keys keep their defaults; unknown keys are
/// rejected with their path (e.g. "model.branches[1].strid").
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  DataSettings data;
  EvalSettings eval;
  AnalysisSettings analysis;
  bool num_classes_given = false;  // whether model.num_classes was set explicitly
};

RunConfig parse_run_config(std::string_view json_text);
RunConfig read_run_config(const std::filesystem::path& path);
std::string to_json(const RunConfig& config);

std::string to_json(const ModelConfig& config);
std::string to_json(const TrainConfig& config);
ModelConfig model_config_from_json(std::string_view json_text);
TrainConfig train_config_from_json(std::string_view json_text);

}  // namespace wavems
