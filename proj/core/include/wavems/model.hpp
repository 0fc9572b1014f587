#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wavems/optim.hpp"
#include "wavems/tensor.hpp"

namespace wavems {

/// Geometry of one front-end branch: a strided time-domain filter bank.
struct BranchSpec {
  std::size_t filter_len = 11;
  std::size_t stride = 1;
  std::size_t num_filters = 32;

  friend bool operator==(const BranchSpec&, const BranchSpec&) = default;
};

/// Full architecture description. Defaults reproduce the published network:
/// branches (11,1) (51,5) (101,10) with 32 filters each, a size-3 phase conv,
/// 441 time bins, 2-D levels of 64/128/256/256 channels, 4x5 level pooling,
/// and 1.5 s windows at 44.1 kHz.
struct ModelConfig {
  std::vector<BranchSpec> branches{{11, 1, 32}, {51, 5, 32}, {101, 10, 32}};
  std::size_t phase_filter_len = 3;
  std::size_t phase_stride = 1;
  bool relu_between_branch_convs = true;
  std::size_t frontend_time_bins = 441;
  std::vector<std::size_t> conv_channels{64, 128, 256, 256};
  std::size_t level_pool_h = 4;
  std::size_t level_pool_w = 5;
  std::size_t last_n_levels = 4;
  std::size_t fc_hidden = 512;
  std::size_t num_classes = 50;
  std::size_t window_length = 66150;
  int sample_rate = 44100;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Every 2-D level is followed by this non-overlapping max pool.
inline constexpr std::size_t kLevelPoolWindow = 2;

/// Stage-by-stage extents implied by a config.
struct ShapePlan {
  std::vector<std::size_t> branch_conv_lengths;     // after the strided branch conv
  std::vector<std::size_t> branch_prepool_lengths;  // after the phase conv
  Shape frontend;                                   // {1, sum of filters, time bins}
  std::vector<Shape> level_maps;                    // after conv -> relu -> 2x2 pool
  std::size_t fc_input_dim = 0;
};

/// Throws ConfigError when the config is inconsistent or some stage would
/// shrink below what the next one needs.
ShapePlan plan_shapes(const ModelConfig& config);
inline void validate(const ModelConfig& config) { (void)plan_shapes(config); }

struct ParamSpec {
  std::string name;
  Shape shape;
  std::size_t fan_in = 0;
  bool is_bias = false;
};

/// Parameter names and shapes in serialization order:
/// branch{i}.conv.{weight,bias}, branch{i}.phase.{weight,bias} for each branch,
/// level{l}.conv.{weight,bias} for each 2-D level, then fc1 and fc2.
std::vector<ParamSpec> parameter_layout(const ModelConfig& config);

/// Exact number of trainable scalars.
std::size_t param_count(const ModelConfig& config);

enum class BranchVariant { kLow, kMiddle, kHigh };

/// Keeps only branch I (low), II (middle) or III (high) of the published
/// geometry with triple the filters (96), so the front-end still emits 96 rows.
ModelConfig single_branch_variant(const ModelConfig& config, BranchVariant which);

const char* variant_name(BranchVariant which);

template <Real T>
struct BackendOutput {
  Tensor<T> logits;
  std::vector<Tensor<T>> level_maps;
};

/// The network: a parameter list plus forward passes. Forward never mutates
/// parameters; the optimizer is the only writer.
template <Real T>
class Model {
 public:
  /// Uniform(+-sqrt(6 / fan_in)) weights, zero biases. Same seed, same model,
  /// in either precision (draws are made in double, then rounded).
  static Model build(const ModelConfig& config, std::uint64_t seed);

  /// Model with explicit parameter values in parameter_layout() order.
  static Model from_values(const ModelConfig& config, const std::vector<std::vector<T>>& values);

  const ModelConfig& config() const { return config_; }
  const ShapePlan& plan() const { return plan_; }

  std::span<Parameter<T>> parameters() { return params_; }
  std::span<const Parameter<T>> parameters() const { return params_; }
  const Parameter<T>& parameter(std::string_view name) const;

  /// wave [1 x window_length] -> feature map [1 x H x time_bins].
  Tensor<T> forward_frontend(const Tensor<T>& wave) const;
  /// feature map -> logits [num_classes] plus the four post-pool level maps.
  BackendOutput<T> forward_backend(const Tensor<T>& featmap) const;

  Tensor<T> forward(const Tensor<T>& wave) const;
  Tensor<T> forward(std::span<const float> wave) const;

  /// softmax(forward(wave)) without recording a graph.
  std::vector<double> predict_proba(std::span<const float> wave) const;

  Tensor<T> wave_tensor(std::span<const float> wave) const;

 private:
  Model(ModelConfig config, ShapePlan plan) : config_(std::move(config)), plan_(std::move(plan)) {}

  ModelConfig config_;
  ShapePlan plan_;
  std::vector<Parameter<T>> params_;
};

extern template class Model<float>;
extern template class Model<double>;

}  // namespace wavems
