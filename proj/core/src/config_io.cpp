#include "wavems/config_io.hpp"

#include <fstream>
#include <iterator>
#include <set>

#include "json_io.hpp"
#include "wavems/error.hpp"

namespace wavems {

namespace detail {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Visits the keys of one JSON object and rejects any key nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError((path_.empty() ? "document" : path_) + ": expected an object");
  }

  template <typename F>
  void field(const std::string& key, F&& read) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) read(*it, join(path_, key));
  }

  template <typename F>
  void required(const std::string& key, F&& read) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) throw ConfigError(join(path_, key) + ": missing required key");
    read(*it, join(path_, key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(join(path_, it.key()) + ": unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::uint64_t as_u64(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path + ": expected a non-negative integer");
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const auto v = j.get<std::int64_t>();
  if (v < 0) throw ConfigError(path + ": expected a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

std::size_t as_size(const json& j, const std::string& path) { return static_cast<std::size_t>(as_u64(j, path)); }

double as_real(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  return j.get<double>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path + ": expected true or false");
  return j.get<bool>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array");
  return j;
}

std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

}  // namespace

json model_to_json(const ModelConfig& c) {
  json branches = json::array();
  for (const auto& b : c.branches) {
    branches.push_back({{"filter_len", b.filter_len}, {"stride", b.stride}, {"num_filters", b.num_filters}});
  }
  return {{"branches", branches},
          {"phase_filter_len", c.phase_filter_len},
          {"phase_stride", c.phase_stride},
          {"relu_between_branch_convs", c.relu_between_branch_convs},
          {"frontend_time_bins", c.frontend_time_bins},
          {"conv_channels", c.conv_channels},
          {"level_pool_target", {c.level_pool_h, c.level_pool_w}},
          {"last_n_levels", c.last_n_levels},
          {"fc_hidden", c.fc_hidden},
          {"num_classes", c.num_classes},
          {"window_length", c.window_length},
          {"sample_rate", c.sample_rate}};
}

json train_to_json(const TrainConfig& c) {
  json stages = json::array();
  for (const auto& s : c.lr_stages) stages.push_back({{"epochs", s.epochs}, {"lr", s.lr}});
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"momentum", c.momentum},
          {"weight_decay", c.weight_decay},
          {"lr_stages", stages},
          {"seed", c.seed},
          {"deterministic", c.deterministic},
          {"checkpoint_every", c.checkpoint_every}};
}

json metrics_to_json(const EpochMetrics& m) {
  return {{"epoch", m.epoch}, {"lr", m.lr}, {"loss", m.loss}, {"train_accuracy", m.train_accuracy}, {"crops", m.crops}};
}

ModelConfig model_from_json(const json& j, const std::string& path, bool* num_classes_given) {
  ModelConfig c;
  ObjectReader r(j, path);
  r.field("branches", [&](const json& v, const std::string& p) {
    c.branches.clear();
    const json& arr = as_array(v, p);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      BranchSpec b;
      ObjectReader br(arr[i], index_path(p, i));
      br.required("filter_len", [&](const json& x, const std::string& q) { b.filter_len = as_size(x, q); });
      br.required("stride", [&](const json& x, const std::string& q) { b.stride = as_size(x, q); });
      br.required("num_filters", [&](const json& x, const std::string& q) { b.num_filters = as_size(x, q); });
      br.finish();
      c.branches.push_back(b);
    }
  });
  r.field("phase_filter_len", [&](const json& v, const std::string& p) { c.phase_filter_len = as_size(v, p); });
  r.field("phase_stride", [&](const json& v, const std::string& p) { c.phase_stride = as_size(v, p); });
  r.field("relu_between_branch_convs",
          [&](const json& v, const std::string& p) { c.relu_between_branch_convs = as_bool(v, p); });
  r.field("frontend_time_bins", [&](const json& v, const std::string& p) { c.frontend_time_bins = as_size(v, p); });
  r.field("conv_channels", [&](const json& v, const std::string& p) {
    c.conv_channels.clear();
    const json& arr = as_array(v, p);
    for (std::size_t i = 0; i < arr.size(); ++i) c.conv_channels.push_back(as_size(arr[i], index_path(p, i)));
  });
  r.field("level_pool_target", [&](const json& v, const std::string& p) {
    const json& arr = as_array(v, p);
    if (arr.size() != 2) throw ConfigError(p + ": expected [height, width]");
    c.level_pool_h = as_size(arr[0], index_path(p, 0));
    c.level_pool_w = as_size(arr[1], index_path(p, 1));
  });
  r.field("last_n_levels", [&](const json& v, const std::string& p) { c.last_n_levels = as_size(v, p); });
  r.field("fc_hidden", [&](const json& v, const std::string& p) { c.fc_hidden = as_size(v, p); });
  r.field("num_classes", [&](const json& v, const std::string& p) {
    c.num_classes = as_size(v, p);
    if (num_classes_given) *num_classes_given = true;
  });
  r.field("window_length", [&](const json& v, const std::string& p) { c.window_length = as_size(v, p); });
  r.field("sample_rate", [&](const json& v, const std::string& p) {
    const auto rate = as_u64(v, p);
    if (rate == 0 || rate > 1'000'000) throw ConfigError(p + ": sample rate out of range");
    c.sample_rate = static_cast<int>(rate);
  });
  r.finish();
  try {
    validate(c);
  } catch (const ConfigError& e) {
    throw ConfigError((path.empty() ? std::string() : path + ": ") + e.what());
  }
  return c;
}

TrainConfig train_from_json(const json& j, const std::string& path) {
  TrainConfig c;
  ObjectReader r(j, path);
  r.field("epochs", [&](const json& v, const std::string& p) { c.epochs = as_size(v, p); });
  r.field("batch_size", [&](const json& v, const std::string& p) { c.batch_size = as_size(v, p); });
  r.field("momentum", [&](const json& v, const std::string& p) { c.momentum = as_real(v, p); });
  r.field("weight_decay", [&](const json& v, const std::string& p) { c.weight_decay = as_real(v, p); });
  r.field("lr_stages", [&](const json& v, const std::string& p) {
    c.lr_stages.clear();
    const json& arr = as_array(v, p);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      LrStage s;
      ObjectReader sr(arr[i], index_path(p, i));
      sr.required("epochs", [&](const json& x, const std::string& q) { s.epochs = as_size(x, q); });
      sr.required("lr", [&](const json& x, const std::string& q) { s.lr = as_real(x, q); });
      sr.finish();
      c.lr_stages.push_back(s);
    }
  });
  r.field("seed", [&](const json& v, const std::string& p) { c.seed = as_u64(v, p); });
  r.field("deterministic", [&](const json& v, const std::string& p) { c.deterministic = as_bool(v, p); });
  r.field("checkpoint_every", [&](const json& v, const std::string& p) { c.checkpoint_every = as_size(v, p); });
  r.finish();
  try {
    validate(c);
  } catch (const ConfigError& e) {
    throw ConfigError((path.empty() ? std::string() : path + ": ") + e.what());
  }
  return c;
}

EpochMetrics metrics_from_json(const json& j, const std::string& path) {
  EpochMetrics m;
  ObjectReader r(j, path);
  r.required("epoch", [&](const json& v, const std::string& p) { m.epoch = as_size(v, p); });
  r.required("lr", [&](const json& v, const std::string& p) { m.lr = as_real(v, p); });
  r.required("loss", [&](const json& v, const std::string& p) { m.loss = as_real(v, p); });
  r.required("train_accuracy", [&](const json& v, const std::string& p) { m.train_accuracy = as_real(v, p); });
  r.required("crops", [&](const json& v, const std::string& p) { m.crops = as_size(v, p); });
  r.finish();
  return m;
}

}  // namespace detail

using detail::json;

namespace {

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text) {
  const json doc = parse_document(json_text);
  RunConfig rc;
  detail::ObjectReader r(doc, "");
  r.field("model", [&](const json& v, const std::string& p) { rc.model = detail::model_from_json(v, p, &rc.num_classes_given); });
  r.field("train", [&](const json& v, const std::string& p) { rc.train = detail::train_from_json(v, p); });
  r.field("data", [&](const json& v, const std::string& p) {
    detail::ObjectReader d(v, p);
    d.field("manifest", [&](const json& x, const std::string& q) {
      if (!x.is_string()) throw ConfigError(q + ": expected a string");
      rc.data.manifest = x.get<std::string>();
    });
    d.finish();
  });
  r.field("eval", [&](const json& v, const std::string& p) {
    detail::ObjectReader e(v, p);
    e.field("hop", [&](const json& x, const std::string& q) { rc.eval.hop = detail::as_size(x, q); });
    e.field("repeats", [&](const json& x, const std::string& q) {
      rc.eval.repeats = detail::as_size(x, q);
      if (rc.eval.repeats == 0) throw ConfigError(q + ": must be at least 1");
    });
    e.finish();
  });
  r.field("analysis", [&](const json& v, const std::string& p) {
    detail::ObjectReader a(v, p);
    a.field("nfft", [&](const json& x, const std::string& q) {
      rc.analysis.nfft = detail::as_size(x, q);
      if (rc.analysis.nfft < 2) throw ConfigError(q + ": must be at least 2");
    });
    a.finish();
  });
  r.finish();
  return rc;
}

RunConfig read_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_run_config(text);
}

std::string to_json(const RunConfig& c) {
  json doc = {{"model", detail::model_to_json(c.model)},
              {"train", detail::train_to_json(c.train)},
              {"data", {{"manifest", c.data.manifest}}},
              {"eval", {{"hop", c.eval.hop}, {"repeats", c.eval.repeats}}},
              {"analysis", {{"nfft", c.analysis.nfft}}}};
  return doc.dump(2);
}

std::string to_json(const ModelConfig& config) { return detail::model_to_json(config).dump(2); }
std::string to_json(const TrainConfig& config) { return detail::train_to_json(config).dump(2); }

ModelConfig model_config_from_json(std::string_view json_text) {
  return detail::model_from_json(parse_document(json_text), "model");
}

TrainConfig train_config_from_json(std::string_view json_text) {
  return detail::train_from_json(parse_document(json_text), "train");
}

}  // namespace wavems
