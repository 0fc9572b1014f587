#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wavems/dataset.hpp"
#include "wavems/model.hpp"
#include "wavems/trainer.hpp"

namespace wavems {

/// Maps one window of samples to a class probability vector.
using SegmentScorer = std::function<std::vector<double>(std::span<const float>)>;

/// Scorer backed by Model::predict_proba.
SegmentScorer model_scorer(const Model<float>& model);

struct ClipPrediction {
  std::size_t predicted = 0;
  std::vector<double> summed;  // elementwise sum of per-segment probabilities
  std::size_t segments = 0;
};

/// Sums the vectors and takes the argmax (lowest index on exact ties).
/// Throws ArgumentError when empty or when lengths differ.
ClipPrediction vote(std::span<const std::vector<double>> segment_probs);

/// segment_for_voting, score each window, vote. hop 0 means default_hop.
ClipPrediction predict_clip(const SegmentScorer& scorer, std::span<const float> clip, std::size_t window_length,
                            std::size_t hop = 0);
ClipPrediction predict_clip(const Model<float>& model, std::span<const float> clip, std::size_t hop = 0);

struct ClipRecord {
  std::string path;
  int label = 0;
  std::size_t predicted = 0;
  std::vector<double> summed;
};

struct EvalReport {
  int test_fold = 0;
  std::size_t n_clips = 0;
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;  // 0 for classes absent from the fold
  std::vector<std::size_t> per_class_count;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::vector<ClipRecord> predictions;
};

/// Voting prediction for every entry in `test_fold`. Throws FoldError for an
/// unknown fold and ArgumentError for an empty one.
EvalReport evaluate(const SegmentScorer& scorer, std::size_t window_length, std::size_t num_classes,
                    const ClipSet& clips, int test_fold, std::size_t hop = 0);
EvalReport evaluate(const Model<float>& model, const ClipSet& clips, int test_fold, std::size_t hop = 0);

struct FoldAccuracy {
  int fold = 0;
  std::size_t repeat = 0;
  double accuracy = 0.0;

  friend bool operator==(const FoldAccuracy&, const FoldAccuracy&) = default;
};

struct AblationRow {
  std::string variant;
  std::array<std::size_t, 3> filters{};  // filter counts of branches I, II, III
  std::size_t last_n = 0;
  std::size_t fc_input_dim = 0;
  std::vector<FoldAccuracy> runs;
  double mean = 0.0;
  double stddev = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
};

struct AblationResult {
  std::string mode;  // "temporal", "levels" or "cv"
  std::vector<AblationRow> rows;
};

/// Fills mean, population stddev, min and max from row.runs.
void summarize(AblationRow& row);

struct CrossValidateOptions {
  std::size_t repeats = 1;
  std::size_t hop = 0;
  std::function<void(const std::string&)> log;
};

/// For repeat r in [0, repeats) and every fold: train with seed
/// train_config.seed + r on the other folds, then evaluate the held-out fold.
AblationRow cross_validate(const ModelConfig& model_config, const TrainConfig& train_config, const ClipSet& clips,
                           const CrossValidateOptions& options = {});

/// Rows Low, Middle, High (single_branch_variant) and Multi (the base config).
AblationResult ablate_temporal(const ModelConfig& base, const TrainConfig& train_config, const ClipSet& clips,
                               const CrossValidateOptions& options = {});

/// Rows N=1..levels, each concatenating the last N level maps.
AblationResult ablate_levels(const ModelConfig& base, const TrainConfig& train_config, const ClipSet& clips,
                             const CrossValidateOptions& options = {});

/// Summary CSV: variant,filters_I,filters_II,filters_III,last_n,fc_input_dim,n,mean,stddev,min,max
std::string ablation_summary_csv(const AblationResult& result);
/// Per-run CSV: variant,fold,repeat,accuracy
std::string ablation_runs_csv(const AblationResult& result);
/// Aligned plain-text table (accuracies in percent, mean +- stddev).
std::string ablation_table(const AblationResult& result);
/// Writes ablation_<mode>.csv, ablation_<mode>_folds.csv and ablation_<mode>.txt.
void write_ablation(const AblationResult& result, const std::filesystem::path& out_dir);

/// Parses ablation_runs_csv output back into rows (variant and runs only).
std::vector<AblationRow> parse_ablation_runs_csv(std::string_view csv);

std::string eval_report_text(const EvalReport& report);
/// Writes predictions.csv, per_class.csv, confusion.csv and report.txt.
void write_eval_report(const EvalReport& report, const std::filesystem::path& out_dir);

}  // namespace wavems
