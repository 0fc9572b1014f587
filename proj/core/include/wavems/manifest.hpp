#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wavems {

struct ManifestEntry {
  std::string path;
  int label = 0;
  int fold = 1;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Labeled, fold-assigned clip index.
/// Labels are contiguous from 0 and folds run from 1 to num_folds.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  int num_classes = 0;
  int num_folds = 0;
};

/// Parses CSV with header `path,label,fold`. Throws ManifestError on malformed
/// rows, duplicate paths, or labels that are not contiguous from 0.
DatasetManifest load_manifest(std::string_view csv);
DatasetManifest read_manifest(const std::filesystem::path& path);

std::string manifest_to_csv(const DatasetManifest& manifest);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Recomputes num_classes / num_folds and checks invariants.
DatasetManifest make_manifest(std::vector<ManifestEntry> entries);

/// (train, test) partition: test holds the entries whose fold == test_fold.
/// Throws FoldError if test_fold is outside [1, num_folds].
std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>> fold_split(const DatasetManifest& manifest,
                                                                             int test_fold);

}  // namespace wavems
