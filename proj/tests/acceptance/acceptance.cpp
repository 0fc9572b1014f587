// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is non-zero when any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/suites.hpp"
#include "wavems/analysis.hpp"
#include "wavems/evaluator.hpp"
#include "wavems/ops.hpp"
#include "wavems/parallel.hpp"
#include "wavems/synth.hpp"
#include "wavems/trainer.hpp"

namespace wavems {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Collects failed checks; an empty list means the criterion passed.
struct Verdict {
  std::vector<std::string> failures;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : "; ") + s;
  return out;
}

template <typename... Args>
std::string format(const char* spec, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, spec, args...);
  return buf;
}

Verdict gradient_suite() {
  Verdict v;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  std::size_t trials = 0;
  for (const auto& op : testing::differentiable_ops()) {
    for (int t = 0; t < 20; ++t, ++trials) {
      const auto r = testing::gradcheck_op(op, rng);
      worst = std::max(worst, r.max_rel);
      v.check(r.ok, op + " trial " + std::to_string(t) + ": " + r.worst);
    }
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed, ++trials) {
    const auto r = testing::gradcheck_model(seed);
    worst = std::max(worst, r.max_rel);
    v.check(r.ok, "model seed " + std::to_string(seed) + ": " + r.worst);
  }
  const double secs = seconds_since(t0);
  v.check(secs < 300.0, format("runtime %.1f s exceeds 300 s", secs));
  v.detail = format("%zu ops x 20 + model x 20 = %zu trials, max rel err %.2e, %.1f s",
                    testing::differentiable_ops().size(), trials, worst, secs);
  return v;
}

Verdict oracle_suite() {
  Verdict v;
  std::mt19937_64 rng(99);
  for (const auto& op : testing::oracle_ops()) {
    for (int t = 0; t < 200; ++t) {
      const std::string diff = testing::oracle_trial(op, rng);
      v.check(diff.empty(), op + " trial " + std::to_string(t) + ": " + diff);
    }
  }
  v.detail = format("%zu ops x 200 shapes, exact in float and double", testing::oracle_ops().size());
  return v;
}

Verdict shape_contract() {
  Verdict v;
  NoGradGuard guard;
  const ModelConfig config;
  const Model<float> model = Model<float>::build(config, 0);
  std::mt19937_64 rng(1);
  const auto wave_values = testing::random_values<float>(config.window_length, rng);
  const Tensor<float> wave = model.wave_tensor(wave_values);

  const std::size_t want_prepool[] = {66138, 13218, 6603};
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string b = "branch" + std::to_string(i + 1);
    const Tensor<float> x = relu(conv1d(relu(conv1d(wave, model.parameter(b + ".conv.weight").value,
                                                    model.parameter(b + ".conv.bias").value, config.branches[i].stride)),
                                        model.parameter(b + ".phase.weight").value,
                                        model.parameter(b + ".phase.bias").value, 1));
    v.check(x.shape() == Shape{32, want_prepool[i]}, b + " pre-pool " + shape_str(x.shape()));
  }
  const Tensor<float> front = model.forward_frontend(wave);
  v.check(front.shape() == Shape{1, 96, 441}, "frontend " + shape_str(front.shape()));
  const BackendOutput<float> back = model.forward_backend(front);
  const Shape want_levels[] = {{64, 48, 220}, {128, 24, 110}, {256, 12, 55}, {256, 6, 27}};
  v.check(back.level_maps.size() == 4, "level count");
  for (std::size_t l = 0; l < back.level_maps.size() && l < 4; ++l) {
    v.check(back.level_maps[l].shape() == want_levels[l],
            "level" + std::to_string(l + 1) + " " + shape_str(back.level_maps[l].shape()));
  }
  v.check(back.logits.shape() == Shape{50}, "logits " + shape_str(back.logits.shape()));
  auto fc_input = [&](std::size_t last_n) {
    std::size_t dim = 0;
    for (std::size_t l = 4 - last_n; l < 4; ++l) dim += adaptive_maxpool2d(back.level_maps[l], 4, 5).numel();
    return dim;
  };
  v.check(fc_input(3) == 12800, "fc input last_n=3: " + std::to_string(fc_input(3)));
  v.check(fc_input(4) == 14080, "fc input last_n=4: " + std::to_string(fc_input(4)));
  v.check(model.parameter("fc1.weight").value.shape() == Shape{512, 14080}, "fc1.weight shape");
  ModelConfig three = config;
  three.last_n_levels = 3;
  const Model<float> model3 = Model<float>::build(three, 0);
  v.check(model3.parameter("fc1.weight").value.shape() == Shape{512, 12800}, "fc1.weight shape for last_n=3");
  v.detail = "pre-pool 66138/13218/6603, frontend 1x96x441, levels 64x48x220..256x6x27, fc in 12800/14080";
  return v;
}

struct DeskRun {
  Checkpoint checkpoint;
  double seconds = 0.0;
};

DeskRun desk_train(const ClipSet& clips, const TrainOptions& options = {}) {
  const auto t0 = Clock::now();
  DeskRun r;
  r.checkpoint = train(testing::desk_model_config(), testing::desk_train_config(), clips, 1, options);
  r.seconds = seconds_since(t0);
  return r;
}

Verdict desk_learning(const ClipSet& clips, const DeskRun& run) {
  Verdict v;
  const auto t0 = Clock::now();
  const double train_acc = run.checkpoint.history.back().train_accuracy;
  const EvalReport report = evaluate(model_from_checkpoint(run.checkpoint), clips, 1);
  const double secs = run.seconds + seconds_since(t0);
  v.check(clips.samples.size() == 200 && clips.manifest.num_classes == 5, "dataset is not 5 x 40 clips");
  v.check(run.checkpoint.train_config.epochs <= 50, "more than 50 epochs");
  v.check(train_acc >= 0.95, format("train accuracy %.4f < 0.95", train_acc));
  v.check(report.accuracy >= 0.80, format("held-out accuracy %.4f < 0.80", report.accuracy));
  v.check(secs < 600.0, format("runtime %.1f s exceeds 600 s", secs));
  v.detail = format("%zu epochs, final train acc %.4f, fold-1 voting acc %.4f, %.1f s on 1 thread",
                    run.checkpoint.train_config.epochs, train_acc, report.accuracy, secs);
  return v;
}

Verdict determinism(const ClipSet& clips, const DeskRun& first) {
  Verdict v;
  const DeskRun second = desk_train(clips);
  const auto a = serialize_checkpoint(first.checkpoint);
  v.check(a == serialize_checkpoint(second.checkpoint), "two desk runs differ");

  testing::TempDir dir("acceptance");
  TrainOptions half;
  half.stop_after = testing::desk_train_config().epochs / 2;
  save_checkpoint(desk_train(clips, half).checkpoint, dir / "half.ckpt");
  const Checkpoint loaded = load_checkpoint(dir / "half.ckpt");
  TrainOptions resume;
  resume.resume = &loaded;
  const DeskRun resumed = desk_train(clips, resume);
  v.check(a == serialize_checkpoint(resumed.checkpoint), "resumed run differs from uninterrupted run");
  v.detail = format("checkpoint %zu bytes identical across runs and after resume at epoch %zu", a.size(),
                    loaded.epoch);
  return v;
}

bool mean_within_range(const AblationRow& r) { return r.min <= r.mean && r.mean <= r.max; }

Verdict ablation_machinery() {
  Verdict v;
  TrainConfig one_epoch;
  one_epoch.epochs = 1;
  one_epoch.batch_size = 4;
  one_epoch.lr_stages = {{1, 1e-2}};
  one_epoch.seed = 1;

  SynthParams p;
  p.clips_per_class = 2;
  p.num_folds = 2;
  p.clip_seconds = 0.25;
  p.seed = 13;
  const ClipSet clips = clip_set_from(synth_dataset(p), 8000);

  // Published branch layout over a small back-end keeps the temporal sweep cheap.
  ModelConfig temporal_base = testing::tiny_model_config(5);
  temporal_base.branches = ModelConfig{}.branches;
  const AblationResult temporal = ablate_temporal(temporal_base, one_epoch, clips);
  const std::array<std::size_t, 3> want_filters[] = {{96, 0, 0}, {0, 96, 0}, {0, 0, 96}, {32, 32, 32}};
  v.check(temporal.rows.size() == 4, "temporal rows " + std::to_string(temporal.rows.size()));
  for (std::size_t i = 0; i < temporal.rows.size() && i < 4; ++i) {
    const auto& r = temporal.rows[i];
    v.check(r.filters == want_filters[i], r.variant + " filter columns");
    v.check(mean_within_range(r), r.variant + " mean outside min/max");
  }

  const AblationResult levels = ablate_levels(testing::published_channels_config(), one_epoch, clips);
  const std::size_t want_dims[] = {5120, 10240, 12800, 14080};
  v.check(levels.rows.size() == 4, "level rows " + std::to_string(levels.rows.size()));
  for (std::size_t i = 0; i < levels.rows.size() && i < 4; ++i) {
    const auto& r = levels.rows[i];
    v.check(r.variant == "N=" + std::to_string(i + 1), "row " + std::to_string(i) + " is " + r.variant);
    v.check(r.fc_input_dim == want_dims[i], r.variant + " fc dim " + std::to_string(r.fc_input_dim));
    v.check(mean_within_range(r), r.variant + " mean outside min/max");
  }
  std::ostringstream dims;
  for (const auto& r : levels.rows) dims << (dims.tellp() ? "/" : "") << r.fc_input_dim;
  v.detail = "temporal rows Low/Middle/High/Multi with (96,0,0)/(0,96,0)/(0,0,96)/(32,32,32); level fc dims " +
             dims.str() + "; means within per-fold ranges";
  return v;
}

Verdict voting() {
  Verdict v;
  const std::vector<std::vector<double>> fixture{{0.6, 0.4}, {0.2, 0.8}, {0.3, 0.7}};
  std::size_t calls = 0;
  const SegmentScorer scorer = [&](std::span<const float>) { return fixture[calls++ % 3]; };
  const ClipPrediction p = predict_clip(scorer, std::vector<float>(20, 0.1f), 10);
  v.check(calls == 3, "expected 3 segments, scored " + std::to_string(calls));
  const std::vector<double> hand{0.6 + 0.2 + 0.3, 0.4 + 0.8 + 0.7};
  v.check(p.predicted == 1 && p.summed == hand, "3-segment fixture");

  const ModelConfig mc = testing::tiny_model_config(4);
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Model<float> model = Model<float>::build(mc, seed);
    const auto clip = testing::random_values<float>(mc.window_length, rng);
    const auto probs = model.predict_proba(clip);
    const ClipPrediction single = predict_clip(model, clip);
    v.check(single.segments == 1 && single.predicted == argmax<double>(probs) && single.summed == probs,
            "single segment seed " + std::to_string(seed));
  }
  v.check(vote(std::vector<std::vector<double>>{{0.25, 0.5, 0.25}, {0.5, 0.25, 0.25}}).predicted == 0, "tie 0/1");
  v.check(vote(std::vector<std::vector<double>>{{0.1, 0.45, 0.45}}).predicted == 1, "tie 1/2");
  v.detail = "[0.6,0.4]+[0.2,0.8]+[0.3,0.7] -> class 1; single segment = argmax; ties -> lowest index";
  return v;
}

Verdict lr_schedule() {
  Verdict v;
  const TrainConfig t;
  const std::pair<std::size_t, double> cases[] = {{0, 1e-2},   {59, 1e-2},  {60, 1e-3},  {119, 1e-3},
                                                  {120, 1e-4}, {139, 1e-4}, {140, 1e-5}, {159, 1e-5}};
  for (auto [epoch, lr] : cases) v.check(lr_at(t, epoch) == lr, "epoch " + std::to_string(epoch));
  v.detail = "1e-2/1e-3/1e-4/1e-5 exactly at epochs {0,59}/{60,119}/{120,139}/{140,159}";
  return v;
}

Verdict filter_analysis() {
  Verdict v;
  const double bin = 44100.0 / 2048.0;
  const double planted[] = {7000.0, 4410.0, 12000.0, 2500.0, 17500.0};
  std::vector<std::vector<double>> filters;
  for (double f : planted) {
    std::vector<double> w(101);
    for (std::size_t n = 0; n < w.size(); ++n) w[n] = std::cos(2.0 * std::numbers::pi * f * n / 44100.0);
    filters.push_back(std::move(w));
  }
  const ResponseMatrix m = response_matrix(filters, 1, 44100);
  double worst = 0.0;
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    const double err = std::abs(m.central_freqs[r] - planted[m.filter_index[r]]);
    worst = std::max(worst, err);
    v.check(err <= bin, format("planted %.0f Hz recovered at %.2f Hz", planted[m.filter_index[r]], m.central_freqs[r]));
  }
  v.check(std::is_sorted(m.central_freqs.begin(), m.central_freqs.end()), "rows not sorted");

  const ParsedResponseCsv csv = parse_response_csv(response_csv(m));
  bool csv_ok = csv.rows.size() == m.rows.size();
  for (std::size_t r = 0; csv_ok && r < m.rows.size(); ++r) {
    for (std::size_t c = 0; c < m.rows[r].size(); ++c) {
      csv_ok = csv_ok && std::abs(csv.rows[r][c] - m.rows[r][c]) <= 5e-7 * std::abs(m.rows[r][c]);
    }
  }
  v.check(csv_ok, "CSV round trip");
  const GrayImage img = parse_pgm(response_pgm(m));
  bool pgm_ok = img.width == 1025 && img.height == m.rows.size() && img.maxval == 255;
  for (std::size_t r = 0; pgm_ok && r < img.height; ++r) {
    for (std::size_t c = 0; c < img.width; ++c) {
      pgm_ok = pgm_ok && img.pixels[r * img.width + c] == std::lround(255.0 * m.rows[r][c]);
    }
  }
  v.check(pgm_ok, "PGM round trip");
  v.detail = format("5 planted cosines within %.2f Hz (bin %.2f Hz), rows sorted, CSV/PGM round trip", worst, bin);
  return v;
}

int report(int id, const char* name, const std::function<Verdict()>& run) {
  Verdict v;
  try {
    v = run();
  } catch (const std::exception& e) {
    v.failures.push_back(std::string("exception: ") + e.what());
  }
  const bool ok = v.failures.empty();
  std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, name,
              ok ? v.detail.c_str() : join(v.failures).c_str());
  std::fflush(stdout);
  return ok ? 0 : 1;
}

}  // namespace
}  // namespace wavems

int main() {
  using namespace wavems;
  set_num_threads(1);
  const ClipSet desk = testing::desk_clips();
  DeskRun first;
  int failed = 0;
  failed += report(1, "gradient suite", gradient_suite);
  failed += report(2, "oracle suite", oracle_suite);
  failed += report(3, "shape contract", shape_contract);
  failed += report(4, "desk-scale learning", [&] {
    first = desk_train(desk);
    return desk_learning(desk, first);
  });
  failed += report(5, "ablation machinery", ablation_machinery);
  failed += report(6, "voting", voting);
  failed += report(7, "lr schedule", lr_schedule);
  failed += report(8, "filter analysis", filter_analysis);
  failed += report(9, "determinism", [&] { return determinism(desk, first); });
  return failed == 0 ? 0 : 1;
}
