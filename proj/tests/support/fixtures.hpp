#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "wavems/dataset.hpp"
#include "wavems/model.hpp"
#include "wavems/trainer.hpp"

namespace wavems::testing {

/// Smallest three-branch model the shape rules admit with a 2x2 level target:
/// window 440, 32 time bins, 11 filters per branch (33 rows), channels 4/8/8/8.
ModelConfig gradcheck_config();

/// Desk-scale model for 8 kHz synthetic clips: 1.5 s windows, 12 filters per
/// branch, 64 time bins, channels 8/16/16/16, 2x2 level target.
ModelConfig desk_model_config();
/// 12 epochs, batch 16, lr 1e-2 for 8 epochs then 1e-3.
TrainConfig desk_train_config();
/// 5 classes x 40 clips of 3 s at 8 kHz, 5 folds.
ClipSet desk_clips(std::uint64_t seed = 7);

/// Short-window model for fast unit tests on tiny synthetic sets.
ModelConfig tiny_model_config(std::size_t num_classes = 3);
ClipSet tiny_clips(int classes = 3, int clips_per_class = 4, int folds = 2, double seconds = 0.5,
                   std::uint64_t seed = 3);

/// Published filter counts and 2-D channels with a short window and 80 time
/// bins, the smallest front-end that still reaches a 4x5 level-4 map.
ModelConfig published_channels_config();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace wavems::testing
