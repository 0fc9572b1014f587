#include "wavems/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "wavems/error.hpp"
#include "wavems/ops.hpp"

namespace wavems {

ShapePlan plan_shapes(const ModelConfig& c) {
  auto fail = [](const std::string& what) { return ConfigError("model config: " + what); };
  if (c.branches.empty()) throw fail("at least one branch is required");
  if (c.phase_filter_len == 0 || c.phase_stride == 0) throw fail("phase conv length and stride must be positive");
  if (c.frontend_time_bins == 0) throw fail("frontend_time_bins must be positive");
  if (c.conv_channels.empty()) throw fail("conv_channels must not be empty");
  if (c.level_pool_h == 0 || c.level_pool_w == 0) throw fail("level pool target must be positive");
  if (c.last_n_levels < 1 || c.last_n_levels > c.conv_channels.size()) {
    throw fail("last_n_levels must be in [1, " + std::to_string(c.conv_channels.size()) + "]");
  }
  if (c.fc_hidden == 0) throw fail("fc_hidden must be positive");
  if (c.num_classes == 0) throw fail("num_classes must be positive");
  if (c.sample_rate <= 0) throw fail("sample_rate must be positive");

  ShapePlan plan;
  std::size_t height = 0;
  for (std::size_t i = 0; i < c.branches.size(); ++i) {
    const auto& b = c.branches[i];
    const std::string tag = "branch " + std::to_string(i + 1) + ": ";
    if (b.stride < 1 || b.filter_len < b.stride) throw fail(tag + "requires filter_len >= stride >= 1");
    if (b.num_filters < 1) throw fail(tag + "num_filters must be positive");
    if (c.window_length < b.filter_len) throw fail(tag + "window shorter than filter");
    const std::size_t conv_len = (c.window_length - b.filter_len) / b.stride + 1;
    if (conv_len < c.phase_filter_len) throw fail(tag + "output shorter than the phase filter");
    const std::size_t pre = (conv_len - c.phase_filter_len) / c.phase_stride + 1;
    if (pre < c.frontend_time_bins) {
      throw fail(tag + std::to_string(pre) + " samples cannot be pooled to " + std::to_string(c.frontend_time_bins) +
                 " bins");
    }
    plan.branch_conv_lengths.push_back(conv_len);
    plan.branch_prepool_lengths.push_back(pre);
    height += b.num_filters;
  }
  plan.frontend = {1, height, c.frontend_time_bins};

  std::size_t h = height, w = c.frontend_time_bins;
  for (std::size_t l = 0; l < c.conv_channels.size(); ++l) {
    if (c.conv_channels[l] == 0) throw fail("conv_channels entries must be positive");
    if (h < kLevelPoolWindow || w < kLevelPoolWindow) {
      throw fail("level " + std::to_string(l + 1) + " input " + std::to_string(h) + "x" + std::to_string(w) +
                 " too small for 2x2 pooling");
    }
    h /= kLevelPoolWindow;
    w /= kLevelPoolWindow;
    plan.level_maps.push_back({c.conv_channels[l], h, w});
  }
  const std::size_t first = c.conv_channels.size() - c.last_n_levels;
  for (std::size_t l = first; l < c.conv_channels.size(); ++l) {
    const Shape& m = plan.level_maps[l];
    if (m[1] < c.level_pool_h || m[2] < c.level_pool_w) {
      throw fail("level " + std::to_string(l + 1) + " map " + shape_str(m) + " smaller than pool target " +
                 std::to_string(c.level_pool_h) + "x" + std::to_string(c.level_pool_w));
    }
    plan.fc_input_dim += m[0] * c.level_pool_h * c.level_pool_w;
  }
  return plan;
}

std::vector<ParamSpec> parameter_layout(const ModelConfig& c) {
  const ShapePlan plan = plan_shapes(c);
  std::vector<ParamSpec> specs;
  auto add = [&](std::string name, Shape weight_shape, std::size_t fan_in) {
    const std::size_t out = weight_shape[0];
    specs.push_back({name + ".weight", std::move(weight_shape), fan_in, false});
    specs.push_back({name + ".bias", Shape{out}, fan_in, true});
  };
  for (std::size_t i = 0; i < c.branches.size(); ++i) {
    const auto& b = c.branches[i];
    const std::string prefix = "branch" + std::to_string(i + 1);
    add(prefix + ".conv", {b.num_filters, 1, b.filter_len}, b.filter_len);
    add(prefix + ".phase", {b.num_filters, b.num_filters, c.phase_filter_len}, b.num_filters * c.phase_filter_len);
  }
  std::size_t in_ch = 1;
  for (std::size_t l = 0; l < c.conv_channels.size(); ++l) {
    add("level" + std::to_string(l + 1) + ".conv", {c.conv_channels[l], in_ch, 3, 3}, in_ch * 9);
    in_ch = c.conv_channels[l];
  }
  add("fc1", {c.fc_hidden, plan.fc_input_dim}, plan.fc_input_dim);
  add("fc2", {c.num_classes, c.fc_hidden}, c.fc_hidden);
  return specs;
}

std::size_t param_count(const ModelConfig& config) {
  std::size_t n = 0;
  for (const auto& s : parameter_layout(config)) n += shape_numel(s.shape);
  return n;
}

const char* variant_name(BranchVariant which) {
  switch (which) {
    case BranchVariant::kLow: return "Low";
    case BranchVariant::kMiddle: return "Middle";
    case BranchVariant::kHigh: return "High";
  }
  return "?";
}

ModelConfig single_branch_variant(const ModelConfig& config, BranchVariant which) {
  if (config.branches.size() != 3) throw ConfigError("single_branch_variant: base config must have three branches");
  std::size_t total = 0;
  for (const auto& b : config.branches) total += b.num_filters;
  ModelConfig out = config;
  BranchSpec kept = config.branches[static_cast<std::size_t>(which)];
  kept.num_filters = total;
  out.branches = {kept};
  return out;
}

template <Real T>
Model<T> Model<T>::build(const ModelConfig& config, std::uint64_t seed) {
  Model model(config, plan_shapes(config));
  std::mt19937_64 rng(seed);
  for (auto& spec : parameter_layout(config)) {
    std::vector<T> values(shape_numel(spec.shape), T(0));
    if (!spec.is_bias) {
      const double bound = std::sqrt(6.0 / static_cast<double>(spec.fan_in));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (T& v : values) v = static_cast<T>(dist(rng));
    }
    model.params_.emplace_back(spec.name, Tensor<T>(spec.shape, std::move(values), true), spec.is_bias);
  }
  return model;
}

template <Real T>
Model<T> Model<T>::from_values(const ModelConfig& config, const std::vector<std::vector<T>>& values) {
  Model model(config, plan_shapes(config));
  const auto layout = parameter_layout(config);
  if (values.size() != layout.size()) {
    throw ConfigError("expected " + std::to_string(layout.size()) + " parameter arrays, got " +
                      std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (values[i].size() != shape_numel(layout[i].shape)) {
      throw ShapeError("parameter '" + layout[i].name + "' expects " + shape_str(layout[i].shape));
    }
    model.params_.emplace_back(layout[i].name, Tensor<T>(layout[i].shape, values[i], true), layout[i].is_bias);
  }
  return model;
}

template <Real T>
const Parameter<T>& Model<T>::parameter(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p;
  }
  throw ArgumentError("no parameter named '" + std::string(name) + "'");
}

namespace {

template <Real T>
void expect_shape(const Tensor<T>& t, const Shape& expected, const std::string& stage) {
  if (t.shape() != expected) {
    throw ShapeError(stage + ": produced " + shape_str(t.shape()) + ", expected " + shape_str(expected));
  }
}

}  // namespace

template <Real T>
Tensor<T> Model<T>::forward_frontend(const Tensor<T>& wave) const {
  expect_shape(wave, Shape{1, config_.window_length}, "input wave");
  std::vector<Tensor<T>> maps;
  maps.reserve(config_.branches.size());
  for (std::size_t i = 0; i < config_.branches.size(); ++i) {
    const auto& b = config_.branches[i];
    const auto& conv = params_[4 * i];
    const auto& conv_b = params_[4 * i + 1];
    const auto& phase = params_[4 * i + 2];
    const auto& phase_b = params_[4 * i + 3];
    Tensor<T> x = conv1d(wave, conv.value, conv_b.value, b.stride);
    if (config_.relu_between_branch_convs) x = relu(x);
    x = relu(conv1d(x, phase.value, phase_b.value, config_.phase_stride));
    expect_shape(x, Shape{b.num_filters, plan_.branch_prepool_lengths[i]}, "branch " + std::to_string(i + 1));
    maps.push_back(adaptive_maxpool(x, config_.frontend_time_bins, 1));
  }
  Tensor<T> merged = concat<T>(maps, 0);
  return reshape(merged, plan_.frontend);
}

template <Real T>
BackendOutput<T> Model<T>::forward_backend(const Tensor<T>& featmap) const {
  expect_shape(featmap, plan_.frontend, "backend input");
  const std::size_t base = 4 * config_.branches.size();
  const std::size_t levels = config_.conv_channels.size();
  BackendOutput<T> out;
  Tensor<T> x = featmap;
  for (std::size_t l = 0; l < levels; ++l) {
    const auto& w = params_[base + 2 * l];
    const auto& b = params_[base + 2 * l + 1];
    x = maxpool2d(relu(conv2d(x, w.value, b.value)), kLevelPoolWindow, kLevelPoolWindow);
    expect_shape(x, plan_.level_maps[l], "level " + std::to_string(l + 1));
    out.level_maps.push_back(x);
  }
  std::vector<Tensor<T>> selected;
  for (std::size_t l = levels - config_.last_n_levels; l < levels; ++l) {
    selected.push_back(flatten(adaptive_maxpool2d(out.level_maps[l], config_.level_pool_h, config_.level_pool_w)));
  }
  Tensor<T> features = concat<T>(selected, 0);
  expect_shape(features, Shape{plan_.fc_input_dim}, "multi-level features");
  const std::size_t fc = base + 2 * levels;
  Tensor<T> hidden = relu(linear(features, params_[fc].value, params_[fc + 1].value));
  out.logits = linear(hidden, params_[fc + 2].value, params_[fc + 3].value);
  return out;
}

template <Real T>
Tensor<T> Model<T>::forward(const Tensor<T>& wave) const {
  return forward_backend(forward_frontend(wave)).logits;
}

template <Real T>
Tensor<T> Model<T>::wave_tensor(std::span<const float> wave) const {
  if (wave.size() != config_.window_length) {
    throw ShapeError("wave length " + std::to_string(wave.size()) + " does not match window_length " +
                     std::to_string(config_.window_length));
  }
  std::vector<T> data(wave.begin(), wave.end());
  return Tensor<T>(Shape{1, wave.size()}, std::move(data));
}

template <Real T>
Tensor<T> Model<T>::forward(std::span<const float> wave) const {
  return forward(wave_tensor(wave));
}

template <Real T>
std::vector<double> Model<T>::predict_proba(std::span<const float> wave) const {
  NoGradGuard guard;
  const Tensor<T> logits = forward(wave);
  return softmax<T>(logits.data());
}

template class Model<float>;
template class Model<double>;

}  // namespace wavems
