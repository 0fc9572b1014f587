#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <optional>
#include <thread>

#include "wavems/analysis.hpp"
#include "wavems/config_io.hpp"
#include "wavems/error.hpp"
#include "wavems/evaluator.hpp"
#include "wavems/parallel.hpp"
#include "wavems/synth.hpp"
#include "wavems/trainer.hpp"

namespace wavems::cli {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Context {
  std::ostream& out;
  std::ostream& err;
};

RunConfig load_config(const std::string& path) { return path.empty() ? RunConfig{} : read_run_config(path); }

std::string resolve_manifest(const std::string& flag, const RunConfig& rc) {
  if (!flag.empty()) return flag;
  if (!rc.data.manifest.empty()) return rc.data.manifest;
  throw ArgumentError("no manifest given (use --manifest or data.manifest in the config)");
}

// Loads clips at the model's rate and adopts the manifest's class count unless
// the config fixes it.
ClipSet load_for(RunConfig& rc, const std::string& manifest, std::ostream& err) {
  ClipSet clips = load_clip_set(manifest, rc.model.sample_rate);
  if (!rc.num_classes_given) rc.model.num_classes = static_cast<std::size_t>(clips.manifest.num_classes);
  validate(rc.model);
  err << "loaded " << clips.samples.size() << " clips, " << clips.manifest.num_classes << " classes, "
      << clips.manifest.num_folds << " folds\n";
  return clips;
}

void cmd_synth(Context& c, const std::string& out_dir, const SynthParams& params) {
  const SynthDataset ds = synth_dataset(params);
  write_synth_dataset(ds, out_dir);
  c.out << "wrote " << ds.clips.size() << " clips (" << params.num_classes << " classes, " << params.num_folds
        << " folds, " << params.sample_rate << " Hz) to " << out_dir << "\n";
}

void cmd_init(Context& c, const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed) {
  RunConfig rc = load_config(config_path);
  if (seed) rc.train.seed = *seed;
  const Model<float> model = Model<float>::build(rc.model, rc.train.seed);
  const std::mt19937_64 rng = trainer_rng(rc.train.seed);
  save_checkpoint(make_checkpoint(model, rc.train, 0, 0, rng, {}), out);
  c.out << "wrote untrained checkpoint with " << param_count(rc.model) << " parameters to " << out << "\n";
}

void cmd_train(Context& c, const std::string& config_path, const std::string& manifest_flag, int fold,
               const std::string& out, bool deterministic, const std::string& resume_path) {
  RunConfig rc = load_config(config_path);
  if (deterministic) rc.train.deterministic = true;
  if (rc.train.deterministic) set_num_threads(1);
  ClipSet clips = load_for(rc, resolve_manifest(manifest_flag, rc), c.err);
  if (fold != 0) (void)split_indices(clips, fold);

  std::optional<Checkpoint> resume;
  TrainOptions options;
  if (!resume_path.empty()) {
    resume = load_checkpoint(resume_path);
    options.resume = &*resume;
    c.err << "resuming from epoch " << resume->epoch << "\n";
  }
  options.checkpoint_path = out;
  options.on_epoch = [&](const EpochMetrics& m) {
    c.out << m.epoch << ',' << m.lr << ',' << fixed(m.loss, 6) << ',' << fixed(m.train_accuracy, 4) << '\n';
    c.out.flush();
  };
  c.err << "training " << param_count(rc.model) << " parameters for " << rc.train.epochs << " epochs"
        << (fold ? ", holding out fold " + std::to_string(fold) : std::string()) << "\n";
  c.out << "epoch,lr,loss,train_acc\n";
  const Checkpoint ck = train(rc.model, rc.train, clips, fold, options);
  save_checkpoint(ck, out);
  c.err << "wrote " << out << "\n";
}

void cmd_eval(Context& c, const std::string& ckpt_path, const std::string& manifest, int fold,
              const std::string& report_dir, std::size_t hop) {
  const Checkpoint ck = load_checkpoint(ckpt_path);
  const Model<float> model = model_from_checkpoint(ck);
  const ClipSet clips = load_clip_set(manifest, model.config().sample_rate);
  const EvalReport report = evaluate(model, clips, fold, hop);
  c.out << "fold " << fold << " clips " << report.n_clips << " accuracy " << fixed(report.accuracy, 4) << "\n";
  if (!report_dir.empty()) {
    write_eval_report(report, report_dir);
    c.err << "wrote report to " << report_dir << "\n";
  }
}

void cmd_ablate(Context& c, const std::string& mode, const std::string& config_path, const std::string& manifest_flag,
                const std::string& out_dir, std::optional<std::size_t> repeats, std::optional<std::size_t> hop,
                bool deterministic) {
  RunConfig rc = load_config(config_path);
  if (deterministic) rc.train.deterministic = true;
  if (rc.train.deterministic) set_num_threads(1);
  ClipSet clips = load_for(rc, resolve_manifest(manifest_flag, rc), c.err);
  CrossValidateOptions options;
  options.repeats = repeats.value_or(rc.eval.repeats);
  options.hop = hop.value_or(rc.eval.hop);
  options.log = [&](const std::string& line) { c.err << line << "\n"; };
  if (options.repeats == 0) throw ArgumentError("--repeats must be at least 1");
  const AblationResult result = mode == "temporal" ? ablate_temporal(rc.model, rc.train, clips, options)
                                                   : ablate_levels(rc.model, rc.train, clips, options);
  write_ablation(result, out_dir);
  c.out << ablation_table(result);
}

void cmd_analyze(Context& c, const std::string& ckpt_path, const std::string& out_dir, std::optional<std::size_t> nfft,
                 const std::string& config_path) {
  const RunConfig rc = load_config(config_path);
  const Model<float> model = model_from_checkpoint(load_checkpoint(ckpt_path));
  for (const auto& p : export_all_responses(model, out_dir, nfft.value_or(rc.analysis.nfft))) c.out << p.string() << "\n";
}

void cmd_inspect(Context& c, const std::string& ckpt_path) {
  const Checkpoint ck = load_checkpoint(ckpt_path);
  const ModelConfig& mc = ck.model_config;
  const ShapePlan plan = plan_shapes(mc);
  auto& o = c.out;
  o << "checkpoint: " << ckpt_path << "\n";
  o << "epochs completed: " << ck.epoch << " of " << ck.train_config.epochs << "\n";
  o << "test fold: " << ck.test_fold << "\n";
  o << "parameters: " << param_count(mc) << "\n";
  o << "model config:\n" << to_json(mc) << "\n";
  o << "train config:\n" << to_json(ck.train_config) << "\n";
  o << "shapes:\n";
  o << "  input: " << shape_str({1, mc.window_length}) << "\n";
  for (std::size_t i = 0; i < mc.branches.size(); ++i) {
    o << "  branch" << i + 1 << ": conv " << shape_str({mc.branches[i].num_filters, plan.branch_conv_lengths[i]})
      << ", phase " << shape_str({mc.branches[i].num_filters, plan.branch_prepool_lengths[i]}) << ", pooled "
      << shape_str({mc.branches[i].num_filters, mc.frontend_time_bins}) << "\n";
  }
  o << "  frontend: " << shape_str(plan.frontend) << "\n";
  for (std::size_t l = 0; l < plan.level_maps.size(); ++l) {
    o << "  level" << l + 1 << ": " << shape_str(plan.level_maps[l]) << "\n";
  }
  o << "  fc1 input dim: " << plan.fc_input_dim << " (last " << mc.last_n_levels << " levels)\n";
  o << "tensors:\n";
  for (const auto& p : ck.parameters) o << "  " << p.name << " " << shape_str(p.shape) << "\n";
  if (!ck.history.empty()) {
    const auto& m = ck.history.back();
    o << "last epoch: lr " << m.lr << " loss " << fixed(m.loss, 6) << " train_acc " << fixed(m.train_accuracy, 4)
      << "\n";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{out, err};
  CLI::App app{"Multi-temporal-resolution raw-waveform CNN for environmental sound classification", "wavems"};
  app.require_subcommand(1);
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--threads", threads, "Worker threads used inside kernels")->check(CLI::PositiveNumber);

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic band-limited dataset (WAVs + manifest.csv)");
  std::string synth_out;
  SynthParams sp;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--classes", sp.num_classes, "Number of classes (at most 16)")->capture_default_str();
  synth->add_option("--clips-per-class", sp.clips_per_class, "Clips per class")->capture_default_str();
  synth->add_option("--seconds", sp.clip_seconds, "Clip duration in seconds")->capture_default_str();
  synth->add_option("--sample-rate", sp.sample_rate, "Sample rate in Hz")->capture_default_str();
  synth->add_option("--folds", sp.num_folds, "Number of folds")->capture_default_str();
  synth->add_option("--seed", sp.seed, "Random seed")->capture_default_str();

  // init
  auto* init = app.add_subcommand("init", "Write an untrained checkpoint for a config");
  std::string init_config, init_out;
  std::optional<std::uint64_t> init_seed;
  init->add_option("--config", init_config, "Run config JSON (default: published architecture)");
  init->add_option("--out", init_out, "Checkpoint path")->required();
  init->add_option("--seed", init_seed, "Initialization seed (default: train.seed)");

  // train
  auto* trn = app.add_subcommand("train", "Train a model and write its checkpoint");
  std::string train_config, train_manifest, train_out, train_resume;
  int train_fold = 0;
  bool train_det = false;
  trn->add_option("--config", train_config, "Run config JSON (missing keys keep the published defaults)");
  trn->add_option("--manifest", train_manifest, "Manifest CSV (default: data.manifest)");
  trn->add_option("--fold", train_fold, "Held-out fold; 0 trains on every fold")->capture_default_str();
  trn->add_option("--out", train_out, "Checkpoint path")->required();
  trn->add_option("--resume", train_resume, "Continue from this checkpoint");
  trn->add_flag("--deterministic", train_det, "Run every kernel on one thread");

  // eval
  auto* ev = app.add_subcommand("eval", "Probability-voting evaluation of one fold");
  std::string eval_ckpt, eval_manifest, eval_report;
  int eval_fold = 1;
  std::size_t eval_hop = 0;
  ev->add_option("--ckpt", eval_ckpt, "Checkpoint")->required();
  ev->add_option("--manifest", eval_manifest, "Manifest CSV")->required();
  ev->add_option("--fold", eval_fold, "Fold to evaluate")->required();
  ev->add_option("--report", eval_report, "Directory for predictions.csv, per_class.csv, confusion.csv, report.txt");
  ev->add_option("--hop", eval_hop, "Voting hop in samples (0: half a window)")->capture_default_str();

  // ablate
  auto* abl = app.add_subcommand("ablate", "Cross-validated ablation over branch layouts or concatenated levels");
  std::string abl_mode, abl_config, abl_manifest, abl_out;
  std::optional<std::size_t> abl_repeats, abl_hop;
  bool abl_det = false;
  abl->add_option("--mode", abl_mode, "temporal or levels")->required()->check(CLI::IsMember({"temporal", "levels"}));
  abl->add_option("--config", abl_config, "Run config JSON");
  abl->add_option("--manifest", abl_manifest, "Manifest CSV (default: data.manifest)");
  abl->add_option("--out", abl_out, "Output directory")->required();
  abl->add_option("--repeats", abl_repeats, "Cross-validation repeats (default: eval.repeats)");
  abl->add_option("--hop", abl_hop, "Voting hop in samples (default: eval.hop)");
  abl->add_flag("--deterministic", abl_det, "Run every kernel on one thread");

  // analyze
  auto* ana = app.add_subcommand("analyze", "Export per-branch filter frequency responses (CSV + PGM)");
  std::string ana_ckpt, ana_out, ana_config;
  std::optional<std::size_t> ana_nfft;
  ana->add_option("--ckpt", ana_ckpt, "Checkpoint")->required();
  ana->add_option("--out", ana_out, "Output directory")->required();
  ana->add_option("--nfft", ana_nfft, "DFT length (default: analysis.nfft, 2048)");
  ana->add_option("--config", ana_config, "Run config JSON (for analysis.nfft)");

  // inspect
  auto* ins = app.add_subcommand("inspect", "Print a checkpoint's configs, parameter count and shapes");
  std::string ins_ckpt;
  ins->add_option("--ckpt", ins_ckpt, "Checkpoint")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  set_num_threads(threads);
  try {
    if (*synth) {
      cmd_synth(ctx, synth_out, sp);
    } else if (*init) {
      cmd_init(ctx, init_config, init_out, init_seed);
    } else if (*trn) {
      cmd_train(ctx, train_config, train_manifest, train_fold, train_out, train_det, train_resume);
    } else if (*ev) {
      cmd_eval(ctx, eval_ckpt, eval_manifest, eval_fold, eval_report, eval_hop);
    } else if (*abl) {
      cmd_ablate(ctx, abl_mode, abl_config, abl_manifest, abl_out, abl_repeats, abl_hop, abl_det);
    } else if (*ana) {
      cmd_analyze(ctx, ana_ckpt, ana_out, ana_nfft, ana_config);
    } else if (*ins) {
      cmd_inspect(ctx, ins_ckpt);
    }
  } catch (const FoldError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace wavems::cli
