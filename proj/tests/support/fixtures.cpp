#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <iterator>
#include <random>
#include <unistd.h>

#include "wavems/synth.hpp"

namespace wavems::testing {

ModelConfig gradcheck_config() {
  ModelConfig c;
  c.branches = {{11, 1, 11}, {51, 5, 11}, {101, 10, 11}};
  c.frontend_time_bins = 32;
  c.conv_channels = {4, 8, 8, 8};
  c.level_pool_h = 2;
  c.level_pool_w = 2;
  c.last_n_levels = 4;
  c.fc_hidden = 8;
  c.num_classes = 3;
  c.window_length = 440;
  c.sample_rate = 8000;
  return c;
}

ModelConfig desk_model_config() {
  ModelConfig c;
  c.branches = {{11, 1, 12}, {51, 5, 12}, {101, 10, 12}};
  c.frontend_time_bins = 64;
  c.conv_channels = {8, 16, 16, 16};
  c.level_pool_h = 2;
  c.level_pool_w = 2;
  c.last_n_levels = 4;
  c.fc_hidden = 64;
  c.num_classes = 5;
  c.window_length = 12000;
  c.sample_rate = 8000;
  return c;
}

TrainConfig desk_train_config() {
  TrainConfig t;
  t.epochs = 12;
  t.batch_size = 16;
  t.lr_stages = {{8, 1e-2}, {4, 1e-3}};
  t.seed = 1;
  t.deterministic = true;
  return t;
}

ClipSet desk_clips(std::uint64_t seed) {
  SynthParams p;
  p.seed = seed;
  return clip_set_from(synth_dataset(p), 8000);
}

ModelConfig tiny_model_config(std::size_t num_classes) {
  ModelConfig c;
  c.branches = {{11, 1, 6}, {51, 5, 6}, {101, 10, 6}};
  c.frontend_time_bins = 32;
  c.conv_channels = {4, 8, 8, 8};
  c.level_pool_h = 1;
  c.level_pool_w = 2;
  c.last_n_levels = 2;
  c.fc_hidden = 16;
  c.num_classes = num_classes;
  c.window_length = 1000;
  c.sample_rate = 8000;
  return c;
}

ClipSet tiny_clips(int classes, int clips_per_class, int folds, double seconds, std::uint64_t seed) {
  SynthParams p;
  p.num_classes = classes;
  p.clips_per_class = clips_per_class;
  p.num_folds = folds;
  p.clip_seconds = seconds;
  p.seed = seed;
  return clip_set_from(synth_dataset(p), 8000);
}

ModelConfig published_channels_config() {
  ModelConfig c;  // published branches, channels and 4x5 level target
  c.frontend_time_bins = 80;
  c.window_length = 1000;
  c.sample_rate = 8000;
  c.num_classes = 5;
  return c;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("wavems_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace wavems::testing
