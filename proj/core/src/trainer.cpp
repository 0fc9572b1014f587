#include "wavems/trainer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "json_io.hpp"
#include "wavems/error.hpp"
#include "wavems/ops.hpp"

namespace wavems {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void validate(const TrainConfig& c) {
  if (c.batch_size == 0) throw ConfigError("train config: batch_size must be positive");
  if (!(c.momentum >= 0.0 && c.momentum < 1.0)) throw ConfigError("train config: momentum must be in [0, 1)");
  if (!(c.weight_decay >= 0.0) || !std::isfinite(c.weight_decay)) {
    throw ConfigError("train config: weight_decay must be a finite non-negative number");
  }
  std::size_t span = 0;
  for (const auto& s : c.lr_stages) {
    if (!(s.lr >= 0.0) || !std::isfinite(s.lr)) throw ConfigError("train config: learning rates must be finite and >= 0");
    span += s.epochs;
  }
  if (span != c.epochs) {
    throw ConfigError("train config: lr_stages span " + std::to_string(span) + " epochs but epochs is " +
                      std::to_string(c.epochs));
  }
}

double lr_at(const TrainConfig& config, std::size_t epoch) {
  if (epoch >= config.epochs) {
    throw ArgumentError("lr_at: epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(config.epochs) + ")");
  }
  std::size_t end = 0;
  for (const auto& s : config.lr_stages) {
    end += s.epochs;
    if (epoch < end) return s.lr;
  }
  throw ConfigError("lr_at: schedule does not cover epoch " + std::to_string(epoch));
}

std::vector<std::uint64_t> rng_to_words(const std::mt19937_64& rng) {
  std::stringstream ss;
  ss << rng;
  std::vector<std::uint64_t> words;
  std::uint64_t w;
  while (ss >> w) words.push_back(w);
  return words;
}

std::mt19937_64 rng_from_words(std::span<const std::uint64_t> words) {
  std::stringstream ss;
  for (std::size_t i = 0; i < words.size(); ++i) ss << (i ? " " : "") << words[i];
  std::mt19937_64 rng;
  ss >> rng;
  if (ss.fail()) throw CheckpointError("rng state: cannot restore generator from " + std::to_string(words.size()) + " words");
  return rng;
}

// ---------------------------------------------------------------------------
// Checkpoint file format

namespace {

constexpr char kMagic[4] = {'W', 'M', 'S', 'N'};

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename U>
U get_le(const std::uint8_t* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::span<const std::uint8_t> take(std::size_t n, const std::string& what) {
    if (n > bytes_.size() - pos_) throw CheckpointError("checkpoint truncated while reading " + what);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_floats(std::vector<std::uint8_t>& out, const std::vector<float>& values) {
  for (float v : values) put_le(out, std::bit_cast<std::uint32_t>(v));
}

std::vector<float> get_floats(ByteReader& in, std::size_t n, const std::string& what) {
  const auto bytes = in.take(n * 4, what);
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::bit_cast<float>(get_le<std::uint32_t>(bytes.data() + 4 * i));
  return out;
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ck) {
  using detail::json;
  if (ck.velocities.size() != ck.parameters.size()) throw CheckpointError("velocity table does not match parameters");
  json tensors = json::array();
  for (std::size_t i = 0; i < ck.parameters.size(); ++i) {
    const auto& p = ck.parameters[i];
    if (ck.velocities[i].name != p.name || ck.velocities[i].values.size() != p.values.size()) {
      throw CheckpointError("velocity for '" + p.name + "' does not match its parameter");
    }
    if (shape_numel(p.shape) != p.values.size()) throw CheckpointError("parameter '" + p.name + "' length mismatch");
    tensors.push_back({{"name", p.name}, {"shape", p.shape}});
  }
  json history = json::array();
  for (const auto& m : ck.history) history.push_back(detail::metrics_to_json(m));
  const json header = {{"model_config", detail::model_to_json(ck.model_config)},
                       {"train_config", detail::train_to_json(ck.train_config)},
                       {"epoch", ck.epoch},
                       {"test_fold", ck.test_fold},
                       {"metrics_history", history},
                       {"tensors", tensors},
                       {"rng_words", ck.rng_state.size()}};
  const std::string text = header.dump();

  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& p : ck.parameters) put_floats(out, p.values);
  for (const auto& v : ck.velocities) put_floats(out, v.values);
  for (std::uint64_t w : ck.rng_state) put_le<std::uint64_t>(out, w);
  return out;
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  using detail::json;
  ByteReader in(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CheckpointError("bad magic: not a wavems checkpoint");
  }
  in.take(4, "magic");
  const auto version = get_le<std::uint32_t>(in.take(4, "version").data());
  if (version != kCheckpointVersion) {
    throw CheckpointError("version mismatch: file has " + std::to_string(version) + ", expected " +
                          std::to_string(kCheckpointVersion));
  }
  const auto header_len = get_le<std::uint64_t>(in.take(8, "header length").data());
  if (header_len > in.remaining()) throw CheckpointError("checkpoint truncated while reading header");
  const auto header_bytes = in.take(static_cast<std::size_t>(header_len), "header");

  json header;
  try {
    header = json::parse(header_bytes.begin(), header_bytes.end());
  } catch (const json::parse_error& e) {
    throw CheckpointError(std::string("malformed header: ") + e.what());
  }

  Checkpoint ck;
  try {
    ck.model_config = detail::model_from_json(header.at("model_config"), "model_config");
    ck.train_config = detail::train_from_json(header.at("train_config"), "train_config");
    ck.epoch = header.at("epoch").get<std::size_t>();
    ck.test_fold = header.at("test_fold").get<int>();
    for (const auto& m : header.at("metrics_history")) ck.history.push_back(detail::metrics_from_json(m, "metrics_history"));
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed header: ") + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("invalid header: ") + e.what());
  }

  const auto layout = parameter_layout(ck.model_config);
  const json& table = header.at("tensors");
  if (!table.is_array() || table.size() != layout.size()) {
    throw CheckpointError("shape mismatch: header lists " + std::to_string(table.size()) + " tensors, config implies " +
                          std::to_string(layout.size()));
  }
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto name = table[i].at("name").get<std::string>();
    const auto shape = table[i].at("shape").get<Shape>();
    if (name != layout[i].name || shape != layout[i].shape) {
      throw CheckpointError("shape mismatch: tensor " + std::to_string(i) + " is '" + name + "' " + shape_str(shape) +
                            ", config expects '" + layout[i].name + "' " + shape_str(layout[i].shape));
    }
  }
  for (const auto& spec : layout) {
    ck.parameters.push_back({spec.name, spec.shape, get_floats(in, shape_numel(spec.shape), "parameter '" + spec.name + "'")});
  }
  for (const auto& spec : layout) {
    ck.velocities.push_back({spec.name, spec.shape, get_floats(in, shape_numel(spec.shape), "velocity '" + spec.name + "'")});
  }
  const auto words = header.at("rng_words").get<std::size_t>();
  const auto rng_bytes = in.take(words * 8, "rng state");
  for (std::size_t i = 0; i < words; ++i) ck.rng_state.push_back(get_le<std::uint64_t>(rng_bytes.data() + 8 * i));
  if (in.remaining() != 0) throw CheckpointError("checkpoint has " + std::to_string(in.remaining()) + " trailing bytes");
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(checkpoint);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

Model<float> model_from_checkpoint(const Checkpoint& ck) {
  std::vector<std::vector<float>> values;
  for (const auto& p : ck.parameters) values.push_back(p.values);
  auto model = Model<float>::from_values(ck.model_config, values);
  auto params = model.parameters();
  for (std::size_t i = 0; i < params.size() && i < ck.velocities.size(); ++i) params[i].velocity = ck.velocities[i].values;
  return model;
}

Checkpoint make_checkpoint(const Model<float>& model, const TrainConfig& train_config, std::size_t epoch, int test_fold,
                           const std::mt19937_64& rng, std::vector<EpochMetrics> history) {
  Checkpoint ck;
  ck.model_config = model.config();
  ck.train_config = train_config;
  ck.epoch = epoch;
  ck.test_fold = test_fold;
  for (const auto& p : model.parameters()) {
    ck.parameters.push_back({p.name, p.value.shape(), {p.value.data().begin(), p.value.data().end()}});
    ck.velocities.push_back({p.name, p.value.shape(), p.velocity});
  }
  ck.rng_state = rng_to_words(rng);
  ck.history = std::move(history);
  return ck;
}

// ---------------------------------------------------------------------------
// Training loop

EpochMetrics train_epoch(Model<float>& model, const TrainConfig& config, const ClipSet& clips,
                         std::span<const std::size_t> indices, std::size_t epoch, std::mt19937_64& rng) {
  if (indices.empty()) throw ArgumentError("train_epoch: empty training set");
  const auto& entries = clips.manifest.entries;
  std::vector<std::size_t> order(indices.begin(), indices.end());
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return entries[a].path < entries[b].path; });
  std::shuffle(order.begin(), order.end(), rng);

  EpochMetrics m;
  m.epoch = epoch;
  m.lr = lr_at(config, epoch);
  const auto lr = static_cast<float>(m.lr);
  const auto momentum = static_cast<float>(config.momentum);
  const auto decay = static_cast<float>(config.weight_decay);
  const std::size_t window = model.config().window_length;
  double loss_sum = 0.0;
  std::size_t correct = 0;

  auto params = model.parameters();
  for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
    const std::size_t end = std::min(order.size(), begin + config.batch_size);
    const float inv_count = 1.0f / static_cast<float>(end - begin);
    zero_grads(params);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& entry = entries[order[i]];
      const Window crop = random_crop(clips.samples[order[i]], window, rng, entry.label);
      const Tensor<float> logits = model.forward(crop.samples);
      const Tensor<float> loss = softmax_cross_entropy(logits, static_cast<std::size_t>(entry.label));
      loss_sum += loss.item();
      if (argmax<float>(logits.data()) == static_cast<std::size_t>(entry.label)) ++correct;
      backward(scale(loss, inv_count));
      ++m.crops;
    }
    sgd_step(params, lr, momentum, decay);
  }
  m.loss = loss_sum / static_cast<double>(m.crops);
  m.train_accuracy = static_cast<double>(correct) / static_cast<double>(m.crops);
  return m;
}

namespace {

std::filesystem::path periodic_path(const std::filesystem::path& base, std::size_t epoch) {
  auto p = base;
  p.replace_filename(base.stem().string() + ".e" + std::to_string(epoch) + base.extension().string());
  return p;
}

}  // namespace

std::mt19937_64 trainer_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x7472u};
  return std::mt19937_64(seq);
}

Checkpoint train(const ModelConfig& model_config, const TrainConfig& train_config, const ClipSet& clips, int test_fold,
                 const TrainOptions& options) {
  validate(model_config);
  validate(train_config);
  if (clips.sample_rate != model_config.sample_rate) {
    throw ConfigError("clip set sampled at " + std::to_string(clips.sample_rate) + " Hz but model expects " +
                      std::to_string(model_config.sample_rate) + " Hz");
  }
  if (static_cast<std::size_t>(clips.manifest.num_classes) > model_config.num_classes) {
    throw ConfigError("manifest has " + std::to_string(clips.manifest.num_classes) + " classes but model has " +
                      std::to_string(model_config.num_classes));
  }
  std::vector<std::size_t> train_idx;
  if (test_fold == 0) {
    train_idx.resize(clips.manifest.entries.size());
    std::iota(train_idx.begin(), train_idx.end(), std::size_t{0});
  } else {
    train_idx = split_indices(clips, test_fold).first;
  }

  std::size_t start = 0;
  std::vector<EpochMetrics> history;
  std::mt19937_64 rng;
  Model<float> model = [&] {
    if (options.resume) {
      const Checkpoint& ck = *options.resume;
      if (ck.model_config != model_config || ck.train_config != train_config) {
        throw ConfigError("resume: checkpoint configs differ from the requested run");
      }
      if (ck.test_fold != test_fold) throw ConfigError("resume: checkpoint was trained with another test fold");
      start = ck.epoch;
      history = ck.history;
      rng = rng_from_words(ck.rng_state);
      return model_from_checkpoint(ck);
    }
    rng = trainer_rng(train_config.seed);
    return Model<float>::build(model_config, train_config.seed);
  }();

  const std::size_t last = options.stop_after ? std::min(options.stop_after, train_config.epochs) : train_config.epochs;
  for (std::size_t epoch = start; epoch < last; ++epoch) {
    history.push_back(train_epoch(model, train_config, clips, train_idx, epoch, rng));
    if (options.on_epoch) options.on_epoch(history.back());
    const std::size_t done = epoch + 1;
    if (train_config.checkpoint_every && !options.checkpoint_path.empty() && done % train_config.checkpoint_every == 0 &&
        done < train_config.epochs) {
      save_checkpoint(make_checkpoint(model, train_config, done, test_fold, rng, history),
                      periodic_path(options.checkpoint_path, done));
    }
  }
  return make_checkpoint(model, train_config, std::max(start, last), test_fold, rng, std::move(history));
}

}  // namespace wavems
