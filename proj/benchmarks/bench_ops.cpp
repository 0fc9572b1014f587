#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "wavems/analysis.hpp"
#include "wavems/model.hpp"
#include "wavems/ops.hpp"
#include "wavems/parallel.hpp"

namespace wavems {
namespace {

Tensor<float> random_tensor(Shape shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> d(-1.0f, 1.0f);
  std::vector<float> v(shape_numel(shape));
  for (auto& e : v) e = d(rng);
  return Tensor<float>(std::move(shape), std::move(v));
}

// Branch I of the published front-end: 32 filters of 11 taps over a 1.5 s window.
void BM_Conv1dBranch(benchmark::State& state) {
  set_num_threads(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(1);
  const auto x = random_tensor({1, 66150}, rng);
  const auto w = random_tensor({32, 1, 11}, rng);
  const auto b = random_tensor({32}, rng);
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(conv1d(x, w, b, 1));
}
BENCHMARK(BM_Conv1dBranch)->Arg(1)->Unit(benchmark::kMillisecond);

// Second 2-D level of the published back-end.
void BM_Conv2dLevel(benchmark::State& state) {
  set_num_threads(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(2);
  const auto x = random_tensor({64, 48, 220}, rng);
  const auto w = random_tensor({128, 64, 3, 3}, rng);
  const auto b = random_tensor({128}, rng);
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, w, b));
}
BENCHMARK(BM_Conv2dLevel)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ForwardPublished(benchmark::State& state) {
  set_num_threads(1);
  const Model<float> model = Model<float>::build(ModelConfig{}, 0);
  std::mt19937_64 rng(3);
  const auto wave = random_tensor({1, model.config().window_length}, rng);
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(wave));
}
BENCHMARK(BM_ForwardPublished)->Unit(benchmark::kMillisecond)->Iterations(1);

void BM_FilterResponse(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> w(101);
  for (auto& e : w) e = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(filter_response(w, 2048));
}
BENCHMARK(BM_FilterResponse);

}  // namespace
}  // namespace wavems

BENCHMARK_MAIN();
