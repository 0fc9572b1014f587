#include "wavems/dataset.hpp"

#include "wavems/error.hpp"

namespace wavems {

AudioClip prepare_clip(const AudioClip& clip, int sample_rate) {
  return peak_normalize(resample_linear(clip, sample_rate));
}

ClipSet load_clip_set(const std::filesystem::path& manifest_path, int sample_rate) {
  ClipSet set;
  set.manifest = read_manifest(manifest_path);
  set.sample_rate = sample_rate;
  const auto root = manifest_path.parent_path();
  set.samples.reserve(set.manifest.entries.size());
  for (const auto& e : set.manifest.entries) {
    set.samples.push_back(prepare_clip(read_wav(root / e.path), sample_rate).samples);
  }
  return set;
}

ClipSet clip_set_from(const SynthDataset& dataset, int sample_rate) {
  ClipSet set;
  set.manifest = dataset.manifest;
  set.sample_rate = sample_rate;
  set.samples.reserve(dataset.clips.size());
  for (const auto& clip : dataset.clips) set.samples.push_back(prepare_clip(clip, sample_rate).samples);
  return set;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(const ClipSet& clips, int test_fold) {
  const auto& m = clips.manifest;
  if (test_fold < 1 || test_fold > m.num_folds) {
    throw FoldError("fold " + std::to_string(test_fold) + " does not exist (manifest has folds 1.." +
                    std::to_string(m.num_folds) + ")");
  }
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    (m.entries[i].fold == test_fold ? out.second : out.first).push_back(i);
  }
  return out;
}

}  // namespace wavems
