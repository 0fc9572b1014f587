#include "wavems/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wavems/error.hpp"
#include "wavems/ops.hpp"

namespace wavems {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string exact(double v) { return fmt("%.17g", v); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

SegmentScorer model_scorer(const Model<float>& model) {
  return [&model](std::span<const float> wave) { return model.predict_proba(wave); };
}

ClipPrediction vote(std::span<const std::vector<double>> segment_probs) {
  if (segment_probs.empty()) throw ArgumentError("vote: no segments");
  ClipPrediction out;
  out.summed.assign(segment_probs.front().size(), 0.0);
  for (const auto& p : segment_probs) {
    if (p.size() != out.summed.size()) throw ArgumentError("vote: probability vectors differ in length");
    for (std::size_t k = 0; k < p.size(); ++k) out.summed[k] += p[k];
  }
  if (out.summed.empty()) throw ArgumentError("vote: empty probability vectors");
  out.predicted = argmax<double>(out.summed);
  out.segments = segment_probs.size();
  return out;
}

ClipPrediction predict_clip(const SegmentScorer& scorer, std::span<const float> clip, std::size_t window_length,
                            std::size_t hop) {
  const auto windows = segment_for_voting(clip, window_length, hop ? hop : default_hop(window_length));
  std::vector<std::vector<double>> probs;
  probs.reserve(windows.size());
  for (const auto& w : windows) probs.push_back(scorer(w.samples));
  return vote(probs);
}

ClipPrediction predict_clip(const Model<float>& model, std::span<const float> clip, std::size_t hop) {
  return predict_clip(model_scorer(model), clip, model.config().window_length, hop);
}

EvalReport evaluate(const SegmentScorer& scorer, std::size_t window_length, std::size_t num_classes,
                    const ClipSet& clips, int test_fold, std::size_t hop) {
  const auto test = split_indices(clips, test_fold).second;
  if (test.empty()) throw ArgumentError("evaluate: fold " + std::to_string(test_fold) + " has no entries");
  if (num_classes < static_cast<std::size_t>(clips.manifest.num_classes)) {
    throw ConfigError("evaluate: scorer has " + std::to_string(num_classes) + " classes, manifest has " +
                      std::to_string(clips.manifest.num_classes));
  }
  EvalReport r;
  r.test_fold = test_fold;
  r.n_clips = test.size();
  r.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  r.per_class_count.assign(num_classes, 0);
  r.per_class_accuracy.assign(num_classes, 0.0);
  std::size_t correct = 0;
  for (std::size_t idx : test) {
    const auto& entry = clips.manifest.entries[idx];
    ClipPrediction p = predict_clip(scorer, clips.samples[idx], window_length, hop);
    if (p.summed.size() != num_classes) {
      throw ShapeError("evaluate: scorer returned " + std::to_string(p.summed.size()) + " probabilities, expected " +
                       std::to_string(num_classes));
    }
    const auto label = static_cast<std::size_t>(entry.label);
    ++r.confusion[label][p.predicted];
    ++r.per_class_count[label];
    if (p.predicted == label) ++correct;
    r.predictions.push_back({entry.path, entry.label, p.predicted, std::move(p.summed)});
  }
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (r.per_class_count[k]) {
      r.per_class_accuracy[k] = static_cast<double>(r.confusion[k][k]) / static_cast<double>(r.per_class_count[k]);
    }
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.n_clips);
  return r;
}

EvalReport evaluate(const Model<float>& model, const ClipSet& clips, int test_fold, std::size_t hop) {
  return evaluate(model_scorer(model), model.config().window_length, model.config().num_classes, clips, test_fold,
                  hop);
}

void summarize(AblationRow& row) {
  if (row.runs.empty()) {
    row.mean = row.stddev = row.min = row.max = 0.0;
    return;
  }
  double sum = 0.0;
  row.min = row.max = row.runs.front().accuracy;
  for (const auto& r : row.runs) {
    sum += r.accuracy;
    row.min = std::min(row.min, r.accuracy);
    row.max = std::max(row.max, r.accuracy);
  }
  const double n = static_cast<double>(row.runs.size());
  row.mean = sum / n;
  double sq = 0.0;
  for (const auto& r : row.runs) sq += (r.accuracy - row.mean) * (r.accuracy - row.mean);
  row.stddev = std::sqrt(sq / n);
}

namespace {

std::array<std::size_t, 3> filter_columns(const ModelConfig& c) {
  std::array<std::size_t, 3> out{};
  for (std::size_t i = 0; i < c.branches.size() && i < 3; ++i) out[i] = c.branches[i].num_filters;
  return out;
}

}  // namespace

AblationRow cross_validate(const ModelConfig& model_config, const TrainConfig& train_config, const ClipSet& clips,
                           const CrossValidateOptions& options) {
  if (options.repeats == 0) throw ArgumentError("cross_validate: repeats must be at least 1");
  AblationRow row;
  row.variant = "model";
  row.filters = filter_columns(model_config);
  row.last_n = model_config.last_n_levels;
  row.fc_input_dim = plan_shapes(model_config).fc_input_dim;
  for (std::size_t rep = 0; rep < options.repeats; ++rep) {
    TrainConfig tc = train_config;
    tc.seed = train_config.seed + rep;
    for (int fold = 1; fold <= clips.manifest.num_folds; ++fold) {
      const Checkpoint ck = train(model_config, tc, clips, fold);
      const Model<float> model = model_from_checkpoint(ck);
      const double acc = evaluate(model, clips, fold, options.hop).accuracy;
      row.runs.push_back({fold, rep, acc});
      if (options.log) {
        options.log("repeat " + std::to_string(rep) + " fold " + std::to_string(fold) + " accuracy " + fmt("%.4f", acc));
      }
    }
  }
  summarize(row);
  return row;
}

AblationResult ablate_temporal(const ModelConfig& base, const TrainConfig& train_config, const ClipSet& clips,
                               const CrossValidateOptions& options) {
  AblationResult result{"temporal", {}};
  const BranchVariant variants[] = {BranchVariant::kLow, BranchVariant::kMiddle, BranchVariant::kHigh};
  std::size_t total = 0;
  for (const auto& b : base.branches) total += b.num_filters;
  for (std::size_t i = 0; i < 3; ++i) {
    const ModelConfig mc = single_branch_variant(base, variants[i]);
    if (options.log) options.log(std::string("variant ") + variant_name(variants[i]));
    AblationRow row = cross_validate(mc, train_config, clips, options);
    row.variant = variant_name(variants[i]);
    row.filters = {0, 0, 0};
    row.filters[i] = total;
    result.rows.push_back(std::move(row));
  }
  if (options.log) options.log("variant Multi");
  AblationRow multi = cross_validate(base, train_config, clips, options);
  multi.variant = "Multi";
  result.rows.push_back(std::move(multi));
  return result;
}

AblationResult ablate_levels(const ModelConfig& base, const TrainConfig& train_config, const ClipSet& clips,
                             const CrossValidateOptions& options) {
  AblationResult result{"levels", {}};
  for (std::size_t n = 1; n <= base.conv_channels.size(); ++n) {
    ModelConfig mc = base;
    mc.last_n_levels = n;
    if (options.log) options.log("variant N=" + std::to_string(n));
    AblationRow row = cross_validate(mc, train_config, clips, options);
    row.variant = "N=" + std::to_string(n);
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::string ablation_summary_csv(const AblationResult& result) {
  std::ostringstream os;
  os << "variant,filters_I,filters_II,filters_III,last_n,fc_input_dim,n,mean,stddev,min,max\n";
  for (const auto& r : result.rows) {
    os << r.variant << ',' << r.filters[0] << ',' << r.filters[1] << ',' << r.filters[2] << ',' << r.last_n << ','
       << r.fc_input_dim << ',' << r.runs.size() << ',' << exact(r.mean) << ',' << exact(r.stddev) << ','
       << exact(r.min) << ',' << exact(r.max) << '\n';
  }
  return os.str();
}

std::string ablation_runs_csv(const AblationResult& result) {
  std::ostringstream os;
  os << "variant,fold,repeat,accuracy\n";
  for (const auto& r : result.rows) {
    for (const auto& run : r.runs) os << r.variant << ',' << run.fold << ',' << run.repeat << ',' << exact(run.accuracy) << '\n';
  }
  return os.str();
}

std::vector<AblationRow> parse_ablation_runs_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != "variant,fold,repeat,accuracy") {
    throw ArgumentError("ablation runs CSV: bad header");
  }
  std::vector<AblationRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string variant, fold, repeat, acc;
    if (!std::getline(ls, variant, ',') || !std::getline(ls, fold, ',') || !std::getline(ls, repeat, ',') ||
        !std::getline(ls, acc)) {
      throw ArgumentError("ablation runs CSV: malformed row '" + line + "'");
    }
    if (rows.empty() || rows.back().variant != variant) {
      rows.emplace_back();
      rows.back().variant = variant;
    }
    rows.back().runs.push_back({std::stoi(fold), static_cast<std::size_t>(std::stoull(repeat)), std::stod(acc)});
  }
  return rows;
}

std::string ablation_table(const AblationResult& result) {
  const bool temporal = result.mode == "temporal";
  std::vector<std::vector<std::string>> cells;
  if (temporal) {
    cells.push_back({"Model", "I", "II", "III", "FC in", "Runs", "Accuracy (%)", "Min", "Max"});
  } else {
    cells.push_back({"Levels", "FC in", "Runs", "Accuracy (%)", "Min", "Max"});
  }
  for (const auto& r : result.rows) {
    std::vector<std::string> row{r.variant};
    if (temporal) {
      for (auto f : r.filters) row.push_back(std::to_string(f));
    }
    row.push_back(std::to_string(r.fc_input_dim));
    row.push_back(std::to_string(r.runs.size()));
    row.push_back(fmt("%.2f", 100.0 * r.mean) + " +- " + fmt("%.2f", 100.0 * r.stddev));
    row.push_back(fmt("%.2f", 100.0 * r.min));
    row.push_back(fmt("%.2f", 100.0 * r.max));
    cells.push_back(std::move(row));
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t c = 0; c < cells[i].size(); ++c) {
      const auto& s = cells[i][c];
      const std::string pad(width[c] - s.size(), ' ');
      if (c == 0) {
        os << s << pad;
      } else {
        os << "  " << pad << s;
      }
    }
    os << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      os << std::string(total - 2, '-') << '\n';
    }
  }
  return os.str();
}

void write_ablation(const AblationResult& result, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  const std::string stem = "ablation_" + result.mode;
  write_text(out_dir / (stem + ".csv"), ablation_summary_csv(result));
  write_text(out_dir / (stem + "_folds.csv"), ablation_runs_csv(result));
  write_text(out_dir / (stem + ".txt"), ablation_table(result));
}

std::string eval_report_text(const EvalReport& r) {
  std::ostringstream os;
  os << "fold " << r.test_fold << ": " << r.n_clips << " clips, accuracy " << fmt("%.4f", r.accuracy) << '\n';
  os << "\nclass  clips  accuracy\n";
  for (std::size_t k = 0; k < r.per_class_count.size(); ++k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%5zu  %5zu  %8.4f\n", k, r.per_class_count[k], r.per_class_accuracy[k]);
    os << buf;
  }
  std::size_t cell = 1;
  for (const auto& row : r.confusion) {
    for (auto v : row) cell = std::max(cell, std::to_string(v).size());
  }
  cell = std::max(cell, std::to_string(r.confusion.size()).size()) + 1;
  os << "\nconfusion (rows true, columns predicted)\n" << std::string(cell + 1, ' ');
  for (std::size_t k = 0; k < r.confusion.size(); ++k) {
    const auto s = std::to_string(k);
    os << std::string(cell - s.size(), ' ') << s;
  }
  os << '\n';
  for (std::size_t i = 0; i < r.confusion.size(); ++i) {
    const auto s = std::to_string(i);
    os << std::string(cell - s.size(), ' ') << s << ' ';
    for (auto v : r.confusion[i]) {
      const auto t = std::to_string(v);
      os << std::string(cell - t.size(), ' ') << t;
    }
    os << '\n';
  }
  return os.str();
}

void write_eval_report(const EvalReport& r, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  std::ostringstream pred;
  pred << "path,label,predicted,correct";
  const std::size_t k = r.confusion.size();
  for (std::size_t c = 0; c < k; ++c) pred << ",p" << c;
  pred << '\n';
  for (const auto& p : r.predictions) {
    pred << p.path << ',' << p.label << ',' << p.predicted << ',' << (static_cast<std::size_t>(p.label) == p.predicted);
    for (double v : p.summed) pred << ',' << exact(v);
    pred << '\n';
  }
  write_text(out_dir / "predictions.csv", pred.str());

  std::ostringstream per;
  per << "class,clips,correct,accuracy\n";
  for (std::size_t c = 0; c < k; ++c) {
    per << c << ',' << r.per_class_count[c] << ',' << r.confusion[c][c] << ',' << exact(r.per_class_accuracy[c]) << '\n';
  }
  write_text(out_dir / "per_class.csv", per.str());

  std::ostringstream conf;
  conf << "true";
  for (std::size_t c = 0; c < k; ++c) conf << ",pred_" << c;
  conf << '\n';
  for (std::size_t i = 0; i < k; ++i) {
    conf << i;
    for (auto v : r.confusion[i]) conf << ',' << v;
    conf << '\n';
  }
  write_text(out_dir / "confusion.csv", conf.str());
  write_text(out_dir / "report.txt", eval_report_text(r));
}

}  // namespace wavems
