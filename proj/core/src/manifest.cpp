#include "wavems/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "wavems/error.hpp"

namespace wavems {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view field, std::size_t line, const char* column) {
  field = trim(field);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ManifestError("manifest line " + std::to_string(line) + ": " + column + " '" + std::string(field) +
                        "' is not an integer");
  }
  return value;
}

}  // namespace

DatasetManifest make_manifest(std::vector<ManifestEntry> entries) {
  if (entries.empty()) throw ManifestError("manifest has no entries");
  std::set<std::string> paths;
  std::set<int> labels;
  int max_fold = 0;
  for (const auto& e : entries) {
    if (e.path.empty()) throw ManifestError("manifest entry with empty path");
    if (!paths.insert(e.path).second) throw ManifestError("duplicate path in manifest: " + e.path);
    if (e.label < 0) throw ManifestError("negative label for " + e.path);
    if (e.fold < 1) throw ManifestError("fold must be >= 1 for " + e.path);
    labels.insert(e.label);
    max_fold = std::max(max_fold, e.fold);
  }
  const int num_classes = *labels.rbegin() + 1;
  if (static_cast<int>(labels.size()) != num_classes) {
    throw ManifestError("labels are not contiguous from 0 (found " + std::to_string(labels.size()) +
                        " distinct labels, max " + std::to_string(num_classes - 1) + ")");
  }
  DatasetManifest m;
  m.entries = std::move(entries);
  m.num_classes = num_classes;
  m.num_folds = max_fold;
  return m;
}

DatasetManifest load_manifest(std::string_view csv) {
  std::vector<ManifestEntry> entries;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!csv.empty()) {
    const auto nl = csv.find('\n');
    std::string_view line = csv.substr(0, nl);
    csv.remove_prefix(nl == std::string_view::npos ? csv.size() : nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "path,label,fold") {
        throw ManifestError("manifest header must be 'path,label,fold', got '" + std::string(line) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
      throw ManifestError("manifest line " + std::to_string(line_no) + ": expected 3 fields");
    }
    ManifestEntry e;
    e.path = std::string(trim(line.substr(0, c1)));
    e.label = parse_int(line.substr(c1 + 1, c2 - c1 - 1), line_no, "label");
    e.fold = parse_int(line.substr(c2 + 1), line_no, "fold");
    entries.push_back(std::move(e));
  }
  if (!header_seen) throw ManifestError("manifest is empty");
  return make_manifest(std::move(entries));
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_manifest(text);
}

std::string manifest_to_csv(const DatasetManifest& manifest) {
  std::ostringstream os;
  os << "path,label,fold\n";
  for (const auto& e : manifest.entries) os << e.path << ',' << e.label << ',' << e.fold << '\n';
  return os.str();
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << manifest_to_csv(manifest);
  if (!out) throw IoError("write failed for " + path.string());
}

std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>> fold_split(const DatasetManifest& manifest,
                                                                             int test_fold) {
  if (test_fold < 1 || test_fold > manifest.num_folds) {
    throw FoldError("fold " + std::to_string(test_fold) + " does not exist (manifest has folds 1.." +
                    std::to_string(manifest.num_folds) + ")");
  }
  std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>> split;
  for (const auto& e : manifest.entries) (e.fold == test_fold ? split.second : split.first).push_back(e);
  return split;
}

}  // namespace wavems
