#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wavems/dataset.hpp"
#include "wavems/model.hpp"

namespace wavems {

struct LrStage {
  std::size_t epochs = 0;
  double lr = 0.0;

  friend bool operator==(const LrStage&, const LrStage&) = default;
};

/// Training protocol. Defaults: 160 epochs, batch 64, momentum 0.9, L2 5e-4,
/// learning rate 1e-2 / 1e-3 / 1e-4 / 1e-5 for 60 / 60 / 20 / 20 epochs.
struct TrainConfig {
  std::size_t epochs = 160;
  std::size_t batch_size = 64;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::vector<LrStage> lr_stages{{60, 1e-2}, {60, 1e-3}, {20, 1e-4}, {20, 1e-5}};
  std::uint64_t seed = 0;
  bool deterministic = false;  // when set, the CLI runs every kernel on one thread
  std::size_t checkpoint_every = 0;  // 0: only the final checkpoint

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Throws ConfigError unless the stage spans add up to `epochs`.
void validate(const TrainConfig& config);

/// Stagewise-constant learning rate for a zero-based epoch.
double lr_at(const TrainConfig& config, std::size_t epoch);

struct EpochMetrics {
  std::size_t epoch = 0;
  double lr = 0.0;
  double loss = 0.0;            // mean cross-entropy over the epoch's crops
  double train_accuracy = 0.0;  // fraction of crops classified correctly before their step
  std::size_t crops = 0;

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<float> values;

  friend bool operator==(const NamedArray&, const NamedArray&) = default;
};

/// Everything needed to resume training exactly.
struct Checkpoint {
  ModelConfig model_config;
  TrainConfig train_config;
  std::size_t epoch = 0;  // completed epochs
  int test_fold = 0;      // 0 when trained without a held-out fold
  std::vector<NamedArray> parameters;
  std::vector<NamedArray> velocities;
  std::vector<std::uint64_t> rng_state;
  std::vector<EpochMetrics> history;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary layout: "WMSN", u32 version, u64 header length, UTF-8 JSON header
/// (configs, epoch, history, name/shape table, rng word count), float32 LE
/// parameters then velocities in table order, u64 LE rng state words.
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Model<float> model_from_checkpoint(const Checkpoint& checkpoint);

/// Snapshot of a model, its optimizer state and the trainer RNG.
Checkpoint make_checkpoint(const Model<float>& model, const TrainConfig& train_config, std::size_t epoch,
                           int test_fold, const std::mt19937_64& rng, std::vector<EpochMetrics> history);

/// Crop and shuffle generator of a fresh run; a separate stream from model init.
std::mt19937_64 trainer_rng(std::uint64_t seed);

std::vector<std::uint64_t> rng_to_words(const std::mt19937_64& rng);
std::mt19937_64 rng_from_words(std::span<const std::uint64_t> words);

/// One pass over `indices` (into clips). Entries are put in path order and
/// shuffled with `rng`, so the visiting order depends only on the RNG state and
/// not on manifest row order. Each entry contributes one fresh random crop.
/// Per batch: zero grads, forward, mean cross-entropy, backward, SGD step.
EpochMetrics train_epoch(Model<float>& model, const TrainConfig& config, const ClipSet& clips,
                         std::span<const std::size_t> indices, std::size_t epoch, std::mt19937_64& rng);

struct TrainOptions {
  std::function<void(const EpochMetrics&)> on_epoch;
  /// Destination of periodic checkpoints (train_config.checkpoint_every);
  /// epoch e is written next to it as <stem>.e<e><ext>.
  std::filesystem::path checkpoint_path;
  /// Continue from this state instead of a fresh model.
  const Checkpoint* resume = nullptr;
  /// Stop once this many epochs are complete (0: run to train_config.epochs).
  std::size_t stop_after = 0;
};

/// Full protocol on every fold except `test_fold` (0 trains on all entries).
Checkpoint train(const ModelConfig& model_config, const TrainConfig& train_config, const ClipSet& clips,
                 int test_fold, const TrainOptions& options = {});

}  // namespace wavems
