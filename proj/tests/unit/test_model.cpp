#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numeric>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/suites.hpp"
#include "wavems/error.hpp"
#include "wavems/model.hpp"
#include "wavems/ops.hpp"

namespace wavems {
namespace {

using testing::random_values;

TEST(ShapePlan, PublishedChain) {
  const ShapePlan p = plan_shapes(ModelConfig{});
  EXPECT_EQ(p.branch_conv_lengths, (std::vector<std::size_t>{66140, 13220, 6605}));
  EXPECT_EQ(p.branch_prepool_lengths, (std::vector<std::size_t>{66138, 13218, 6603}));
  EXPECT_EQ(p.frontend, (Shape{1, 96, 441}));
  ASSERT_EQ(p.level_maps.size(), 4u);
  EXPECT_EQ(p.level_maps[0], (Shape{64, 48, 220}));
  EXPECT_EQ(p.level_maps[1], (Shape{128, 24, 110}));
  EXPECT_EQ(p.level_maps[2], (Shape{256, 12, 55}));
  EXPECT_EQ(p.level_maps[3], (Shape{256, 6, 27}));
  EXPECT_EQ(p.fc_input_dim, 14080u);
}

TEST(ShapePlan, FcInputDimPerLastN) {
  ModelConfig c;
  const std::size_t want[] = {5120, 10240, 12800, 14080};
  for (std::size_t n = 1; n <= 4; ++n) {
    c.last_n_levels = n;
    EXPECT_EQ(plan_shapes(c).fc_input_dim, want[n - 1]) << "last_n " << n;
  }
  c.last_n_levels = 3;
  EXPECT_EQ(plan_shapes(c).fc_input_dim, (128u + 256u + 256u) * 4u * 5u);
}

TEST(ShapePlan, RejectsInconsistentConfigs) {
  ModelConfig c;
  c.last_n_levels = 5;
  EXPECT_THROW(validate(c), ConfigError);
  c = ModelConfig{};
  c.last_n_levels = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c = ModelConfig{};
  c.branches[1] = {3, 5, 32};
  EXPECT_THROW(validate(c), ConfigError);
  c = ModelConfig{};
  c.branches[0].num_filters = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c = ModelConfig{};
  c.window_length = 4000;  // branch III cannot reach 441 bins
  EXPECT_THROW(validate(c), ConfigError);
  c = ModelConfig{};
  c.branches = {{11, 1, 4}};  // 4 rows cannot take four 2x2 pools
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Params, PublishedLayout) {
  const auto layout = parameter_layout(ModelConfig{});
  ASSERT_EQ(layout.size(), 2u * (6 + 4 + 2));
  EXPECT_EQ(layout[0].name, "branch1.conv.weight");
  EXPECT_EQ(layout[0].shape, (Shape{32, 1, 11}));
  EXPECT_EQ(layout[1].name, "branch1.conv.bias");
  EXPECT_EQ(layout[2].name, "branch1.phase.weight");
  EXPECT_EQ(layout[2].shape, (Shape{32, 32, 3}));
  EXPECT_EQ(layout[12].name, "level1.conv.weight");
  EXPECT_EQ(layout[12].shape, (Shape{64, 1, 3, 3}));
  EXPECT_EQ(layout[20].name, "fc1.weight");
  EXPECT_EQ(layout[20].shape, (Shape{512, 14080}));
  EXPECT_EQ(layout[22].name, "fc2.weight");
  EXPECT_EQ(layout[22].shape, (Shape{50, 512}));
  EXPECT_EQ(shape_numel(layout[0].shape) + shape_numel(layout[1].shape), 384u);
  EXPECT_EQ(shape_numel(layout[12].shape) + shape_numel(layout[13].shape), 640u);
}

TEST(Params, CountMatchesLayerByLayerArithmetic) {
  // Independent per-layer tally of the published network.
  std::size_t expect = 0;
  const std::size_t lens[] = {11, 51, 101};
  for (std::size_t k : lens) {
    expect += 32 * 1 * k + 32;   // branch conv
    expect += 32 * 32 * 3 + 32;  // phase conv
  }
  const std::size_t ch[] = {1, 64, 128, 256, 256};
  for (int l = 0; l < 4; ++l) expect += ch[l + 1] * ch[l] * 9 + ch[l + 1];
  const std::size_t fc_in = (64 + 128 + 256 + 256) * 4 * 5;
  expect += 512 * fc_in + 512;
  expect += 50 * 512 + 50;
  EXPECT_EQ(param_count(ModelConfig{}), expect);
  EXPECT_EQ(expect, 8209490u);
}

TEST(Variants, SingleBranchGeometry) {
  const ModelConfig base;
  const auto low = single_branch_variant(base, BranchVariant::kLow);
  const auto mid = single_branch_variant(base, BranchVariant::kMiddle);
  const auto high = single_branch_variant(base, BranchVariant::kHigh);
  ASSERT_EQ(low.branches.size(), 1u);
  EXPECT_EQ(low.branches[0], (BranchSpec{11, 1, 96}));
  EXPECT_EQ(mid.branches[0], (BranchSpec{51, 5, 96}));
  EXPECT_EQ(high.branches[0], (BranchSpec{101, 10, 96}));
  for (const auto& v : {low, mid, high, base}) EXPECT_EQ(plan_shapes(v).frontend, (Shape{1, 96, 441}));
  EXPECT_STREQ(variant_name(BranchVariant::kMiddle), "Middle");
  ModelConfig two = base;
  two.branches.pop_back();
  EXPECT_THROW(single_branch_variant(two, BranchVariant::kLow), ConfigError);
}

TEST(Variants, BackendWeightsAreShapeCompatible) {
  const ModelConfig base = testing::gradcheck_config();
  const auto full = parameter_layout(base);
  const auto low = parameter_layout(single_branch_variant(base, BranchVariant::kLow));
  // Everything after the front-end matches one for one.
  ASSERT_EQ(full.size() - 12, low.size() - 4);
  for (std::size_t i = 0; i + 12 < full.size(); ++i) {
    EXPECT_EQ(full[12 + i].name, low[4 + i].name);
    EXPECT_EQ(full[12 + i].shape, low[4 + i].shape);
  }
}

TEST(Build, SameSeedSameModelDifferentSeedDifferent) {
  const auto c = testing::gradcheck_config();
  const auto a = Model<float>::build(c, 5), b = Model<float>::build(c, 5), d = Model<float>::build(c, 6);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    const auto x = a.parameters()[i].value.data(), y = b.parameters()[i].value.data(), z = d.parameters()[i].value.data();
    EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin()));
    if (!std::equal(x.begin(), x.end(), z.begin())) any_diff = true;
  }
  EXPECT_TRUE(any_diff);
}

TEST(Build, UniformFanInBoundsAndZeroBiases) {
  const auto c = testing::gradcheck_config();
  const auto m = Model<double>::build(c, 1);
  const auto layout = parameter_layout(c);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto data = m.parameters()[i].value.data();
    if (layout[i].is_bias) {
      for (double v : data) EXPECT_EQ(v, 0.0);
      EXPECT_TRUE(m.parameters()[i].decay_exempt);
    } else {
      const double bound = std::sqrt(6.0 / static_cast<double>(layout[i].fan_in));
      for (double v : data) EXPECT_LE(std::abs(v), bound);
    }
  }
}

TEST(Build, FloatModelIsRoundedDoubleModel) {
  const auto c = testing::gradcheck_config();
  const auto f = Model<float>::build(c, 9);
  const auto d = Model<double>::build(c, 9);
  for (std::size_t i = 0; i < f.parameters().size(); ++i) {
    const auto x = f.parameters()[i].value.data();
    const auto y = d.parameters()[i].value.data();
    for (std::size_t j = 0; j < x.size(); ++j) EXPECT_EQ(x[j], static_cast<float>(y[j]));
  }
}

TEST(Forward, PublishedRuntimeShapes) {
  const ModelConfig c;
  const auto model = Model<float>::build(c, 0);
  std::mt19937_64 rng(1);
  const auto wave = random_values<float>(c.window_length, rng);
  NoGradGuard guard;
  const auto front = model.forward_frontend(model.wave_tensor(wave));
  EXPECT_EQ(front.shape(), (Shape{1, 96, 441}));
  const auto back = model.forward_backend(front);
  ASSERT_EQ(back.level_maps.size(), 4u);
  EXPECT_EQ(back.level_maps[0].shape(), (Shape{64, 48, 220}));
  EXPECT_EQ(back.level_maps[3].shape(), (Shape{256, 6, 27}));
  EXPECT_EQ(back.logits.shape(), (Shape{50}));
}

TEST(Forward, ZeroWaveGivesZeroFeaturesAndUniformProbabilities) {
  const auto c = testing::gradcheck_config();
  const auto model = Model<float>::build(c, 2);
  const std::vector<float> zeros(c.window_length, 0.0f);
  NoGradGuard guard;
  const auto front = model.forward_frontend(model.wave_tensor(zeros));
  for (float v : front.data()) EXPECT_EQ(v, 0.0f);
  const auto logits = model.forward(zeros);
  for (float v : logits.data()) EXPECT_EQ(v, 0.0f);
  for (double p : model.predict_proba(zeros)) EXPECT_NEAR(p, 1.0 / static_cast<double>(c.num_classes), 1e-12);
}

TEST(Forward, ProbabilitiesSumToOneAndForwardIsPure) {
  const auto c = testing::gradcheck_config();
  const auto model = Model<float>::build(c, 3);
  std::vector<std::vector<float>> before;
  for (const auto& p : model.parameters()) before.emplace_back(p.value.data().begin(), p.value.data().end());
  std::mt19937_64 rng(4);
  const auto wave = random_values<float>(c.window_length, rng);
  const auto p1 = model.predict_proba(wave);
  const auto p2 = model.predict_proba(wave);
  EXPECT_NEAR(std::accumulate(p1.begin(), p1.end(), 0.0), 1.0, 1e-6);
  EXPECT_EQ(p1, p2);
  const auto l1 = model.forward(wave);
  const auto l2 = model.forward(wave);
  EXPECT_TRUE(std::equal(l1.data().begin(), l1.data().end(), l2.data().begin()));
  for (std::size_t i = 0; i < before.size(); ++i) {
    const auto now = model.parameters()[i].value.data();
    EXPECT_TRUE(std::equal(now.begin(), now.end(), before[i].begin()));
  }
}

TEST(Forward, LevelMapsIndependentOfLastN) {
  auto c = testing::gradcheck_config();
  std::mt19937_64 rng(5);
  const auto wave = random_values<float>(c.window_length, rng);
  std::vector<std::vector<float>> reference;
  for (std::size_t n = 1; n <= 4; ++n) {
    c.last_n_levels = n;
    const auto model = Model<float>::build(c, 11);
    NoGradGuard guard;
    const auto out = model.forward_backend(model.forward_frontend(model.wave_tensor(wave)));
    std::vector<std::vector<float>> maps;
    for (const auto& m : out.level_maps) maps.emplace_back(m.data().begin(), m.data().end());
    if (n == 1) {
      reference = maps;
    } else {
      EXPECT_EQ(maps, reference) << "last_n " << n;
    }
  }
}

TEST(Forward, ShapeMismatchesThrow) {
  const auto c = testing::gradcheck_config();
  const auto model = Model<float>::build(c, 1);
  EXPECT_THROW(model.forward(std::vector<float>(c.window_length + 1)), ShapeError);
  EXPECT_THROW(model.forward_backend(Tensor<float>(Shape{1, 10, 10})), ShapeError);
}

TEST(Forward, FromValuesRoundTrip) {
  const auto c = testing::gradcheck_config();
  const auto a = Model<float>::build(c, 4);
  std::vector<std::vector<float>> values;
  for (const auto& p : a.parameters()) values.emplace_back(p.value.data().begin(), p.value.data().end());
  const auto b = Model<float>::from_values(c, values);
  std::mt19937_64 rng(6);
  const auto wave = random_values<float>(c.window_length, rng);
  EXPECT_EQ(a.predict_proba(wave), b.predict_proba(wave));
  values.pop_back();
  EXPECT_THROW(Model<float>::from_values(c, values), ConfigError);
}

TEST(Forward, ParameterLookup) {
  const auto model = Model<float>::build(testing::gradcheck_config(), 1);
  EXPECT_EQ(model.parameter("fc2.bias").value.shape(), (Shape{3}));
  EXPECT_THROW(model.parameter("nope"), ArgumentError);
}

TEST(GradCheckModel, EndToEndSmallConfig) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto r = testing::gradcheck_model(seed);
    EXPECT_TRUE(r.ok) << "seed " << seed << ": " << r.worst;
    EXPECT_GT(r.checked, 5000u);
  }
}

}  // namespace
}  // namespace wavems
