#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "wavems/audio.hpp"
#include "wavems/manifest.hpp"
#include "wavems/synth.hpp"

namespace wavems {

/// Manifest plus decoded, resampled and peak-normalized waveforms,
/// index-aligned with manifest.entries.
struct ClipSet {
  DatasetManifest manifest;
  std::vector<std::vector<float>> samples;
  int sample_rate = 0;
};

/// resample_linear to `sample_rate`, then peak_normalize.
AudioClip prepare_clip(const AudioClip& clip, int sample_rate);

/// Reads the manifest and every WAV it lists (paths relative to the manifest's
/// directory).
ClipSet load_clip_set(const std::filesystem::path& manifest_path, int sample_rate);

ClipSet clip_set_from(const SynthDataset& dataset, int sample_rate);

/// Indices of entries in (fold != test_fold) and (fold == test_fold).
/// Throws FoldError for an unknown fold.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(const ClipSet& clips, int test_fold);

}  // namespace wavems
