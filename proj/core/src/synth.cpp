#include "wavems/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "wavems/error.hpp"

namespace wavems {

namespace {

constexpr double kBandQ = 3.0;
constexpr double kNoiseFloorDb = -30.0;
constexpr double kOutputPeak = 0.9;
constexpr std::size_t kWarmup = 2048;  // filter settling samples discarded up front

// RBJ band-pass with 0 dB peak gain.
struct Biquad {
  double b0, b1, b2, a1, a2;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;

  Biquad(double center, double rate, double q) {
    const double w0 = 2.0 * std::numbers::pi * center / rate;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    b0 = alpha / a0;
    b1 = 0.0;
    b2 = -alpha / a0;
    a1 = -2.0 * std::cos(w0) / a0;
    a2 = (1.0 - alpha) / a0;
  }

  double step(double x) {
    const double y = b0 * x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = y;
    return y;
  }
};

std::string clip_name(int c, int j) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "c%02d_%04d.wav", c, j);
  return buf;
}

}  // namespace

double synth_center_frequency(int class_index) { return 300.0 * std::exp2(class_index / 2.0); }

SynthDataset synth_dataset(const SynthParams& p) {
  if (p.num_classes < 1 || p.num_classes > kMaxSynthClasses) {
    throw ArgumentError("synth: num_classes must be in [1, " + std::to_string(kMaxSynthClasses) + "], got " +
                        std::to_string(p.num_classes));
  }
  if (p.clips_per_class < 1) throw ArgumentError("synth: clips_per_class must be positive");
  if (p.num_folds < 1) throw ArgumentError("synth: num_folds must be positive");
  if (!(p.clip_seconds > 0)) throw ArgumentError("synth: clip_seconds must be positive");
  if (p.sample_rate <= 0) throw ArgumentError("synth: sample_rate must be positive");
  const double nyquist = p.sample_rate / 2.0;
  const double top = synth_center_frequency(p.num_classes - 1);
  if (top >= nyquist) {
    throw ArgumentError("synth: class " + std::to_string(p.num_classes - 1) + " center " + std::to_string(top) +
                        " Hz is not below Nyquist " + std::to_string(nyquist) + " Hz");
  }
  const auto length = static_cast<std::size_t>(std::llround(p.clip_seconds * p.sample_rate));
  if (length == 0) throw ArgumentError("synth: clip shorter than one sample");

  SynthDataset out;
  std::vector<ManifestEntry> entries;
  for (int c = 0; c < p.num_classes; ++c) {
    const double fc = synth_center_frequency(c);
    const double mod_hz = 1.0 + c;
    for (int j = 0; j < p.clips_per_class; ++j) {
      std::seed_seq seq{static_cast<std::uint32_t>(p.seed), static_cast<std::uint32_t>(p.seed >> 32),
                        static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(j)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);

      Biquad s1(fc, p.sample_rate, kBandQ), s2(fc, p.sample_rate, kBandQ);
      std::vector<double> band(length);
      for (std::size_t i = 0; i < kWarmup; ++i) s2.step(s1.step(gauss(rng)));
      double energy = 0;
      for (std::size_t i = 0; i < length; ++i) {
        band[i] = s2.step(s1.step(gauss(rng)));
        energy += band[i] * band[i];
      }
      const double rms = std::sqrt(energy / static_cast<double>(length));
      const double phase = phase_dist(rng);
      const double noise_amp = std::pow(10.0, kNoiseFloorDb / 20.0);
      std::vector<double> mix(length);
      double peak = 0;
      for (std::size_t i = 0; i < length; ++i) {
        const double t = static_cast<double>(i) / p.sample_rate;
        const double env = 0.55 + 0.45 * std::sin(2.0 * std::numbers::pi * mod_hz * t + phase);
        mix[i] = env * band[i] / rms + noise_amp * gauss(rng);
        peak = std::max(peak, std::fabs(mix[i]));
      }
      AudioClip clip;
      clip.sample_rate = p.sample_rate;
      clip.source_id = clip_name(c, j);
      clip.samples.resize(length);
      for (std::size_t i = 0; i < length; ++i) clip.samples[i] = static_cast<float>(kOutputPeak * mix[i] / peak);
      entries.push_back({clip.source_id, c, j % p.num_folds + 1});
      out.clips.push_back(std::move(clip));
    }
  }
  out.manifest = make_manifest(std::move(entries));
  return out;
}

void write_synth_dataset(const SynthDataset& dataset, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  for (std::size_t i = 0; i < dataset.clips.size(); ++i) {
    const auto& clip = dataset.clips[i];
    write_wav(out_dir / dataset.manifest.entries[i].path, clip.samples, clip.sample_rate, 16);
  }
  write_manifest(out_dir / "manifest.csv", dataset.manifest);
}

}  // namespace wavems
