#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "wavems/audio.hpp"
#include "wavems/manifest.hpp"

namespace wavems {

/// Parameters of the synthetic stand-in corpus.
struct SynthParams {
  int num_classes = 5;
  int clips_per_class = 40;
  double clip_seconds = 3.0;
  int sample_rate = 8000;
  int num_folds = 5;
  std::uint64_t seed = 0;
};

inline constexpr int kMaxSynthClasses = 16;

/// Band center of class c: 300 * 2^(c/2) Hz.
double synth_center_frequency(int class_index);

/// Manifest and clips, index-aligned.
struct SynthDataset {
  DatasetManifest manifest;
  std::vector<AudioClip> clips;
};

/// Class c is white noise band-passed around synth_center_frequency(c) by two
/// cascaded biquads, amplitude-modulated at (1 + c) Hz, plus broadband noise
/// 30 dB below the band signal. Clip j of every class lands in fold
/// (j mod num_folds) + 1. Output is a pure function of the parameters.
SynthDataset synth_dataset(const SynthParams& params);

/// Writes every clip as 16-bit mono WAV plus manifest.csv into out_dir.
void write_synth_dataset(const SynthDataset& dataset, const std::filesystem::path& out_dir);

}  // namespace wavems
