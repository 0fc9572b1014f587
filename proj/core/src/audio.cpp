#include "wavems/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "wavems/error.hpp"

namespace wavems {

namespace {

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

struct Format {
  std::uint16_t codec = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

constexpr std::uint16_t kPcm = 1;
constexpr std::uint16_t kExtensible = 0xFFFE;

}  // namespace

AudioClip decode_wav(std::span<const std::uint8_t> bytes, std::string source_id) {
  const std::string where = source_id.empty() ? std::string("wav") : source_id;
  auto fail = [&](const std::string& what) { return DecodeError(where + ": " + what); };

  if (bytes.size() < 12) throw fail("truncated RIFF header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0) throw fail("missing RIFF tag");
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) throw fail("missing WAVE tag");

  Format fmt;
  bool have_fmt = false;
  std::span<const std::uint8_t> data;
  bool have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(reinterpret_cast<const char*>(bytes.data() + pos), 4);
    const std::size_t size = read_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (size > bytes.size() - body) throw fail("truncated '" + id + "' chunk");
    if (id == "fmt ") {
      if (size < 16) throw fail("fmt chunk too short");
      const std::uint8_t* p = bytes.data() + body;
      fmt.codec = read_u16(p);
      fmt.channels = read_u16(p + 2);
      fmt.sample_rate = read_u32(p + 4);
      fmt.block_align = read_u16(p + 12);
      fmt.bits = read_u16(p + 14);
      if (fmt.codec == kExtensible) {
        if (size < 26) throw fail("extensible fmt chunk too short");
        fmt.codec = read_u16(p + 24);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      data = bytes.subspan(body, size);
      have_data = true;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw fail("missing fmt chunk");
  if (!have_data) throw fail("missing data chunk");
  if (fmt.codec != kPcm) throw fail("unsupported codec " + std::to_string(fmt.codec) + " (only PCM)");
  if (fmt.bits != 16 && fmt.bits != 24) throw fail("unsupported bit depth " + std::to_string(fmt.bits));
  if (fmt.channels != 1 && fmt.channels != 2) {
    throw fail("unsupported channel count " + std::to_string(fmt.channels));
  }
  if (fmt.sample_rate == 0) throw fail("zero sample rate");
  const std::size_t bytes_per_sample = fmt.bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  if (fmt.block_align != frame_bytes) throw fail("block_align inconsistent with channels and bit depth");
  if (data.size() % frame_bytes != 0) throw fail("data chunk ends mid-frame");
  const std::size_t frames = data.size() / frame_bytes;
  if (frames == 0) throw fail("no audio frames");

  const double full_scale = std::ldexp(1.0, fmt.bits - 1);
  auto sample_at = [&](const std::uint8_t* p) -> double {
    std::int32_t v;
    if (bytes_per_sample == 2) {
      v = static_cast<std::int16_t>(read_u16(p));
    } else {
      v = static_cast<std::int32_t>(static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                                    (static_cast<std::uint32_t>(p[2]) << 16));
      if (v & 0x800000) v -= 0x1000000;
    }
    return static_cast<double>(v) / full_scale;
  };

  AudioClip clip;
  clip.sample_rate = static_cast<int>(fmt.sample_rate);
  clip.source_id = std::move(source_id);
  clip.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::uint8_t* frame = data.data() + f * frame_bytes;
    double acc = 0;
    for (std::size_t ch = 0; ch < fmt.channels; ++ch) acc += sample_at(frame + ch * bytes_per_sample);
    clip.samples[f] = static_cast<float>(acc / fmt.channels);
  }
  return clip;
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes, path.string());
}

std::vector<std::uint8_t> encode_wav(std::span<const float> samples, int sample_rate, int bits) {
  if (bits != 16 && bits != 24) throw ArgumentError("encode_wav: bits must be 16 or 24");
  if (sample_rate <= 0) throw ArgumentError("encode_wav: sample rate must be positive");
  const std::size_t bytes_per_sample = static_cast<std::size_t>(bits) / 8;
  const std::size_t data_size = samples.size() * bytes_per_sample;
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, static_cast<std::uint32_t>(36 + data_size));
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, kPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate * bytes_per_sample));
  put_u16(out, static_cast<std::uint16_t>(bytes_per_sample));
  put_u16(out, static_cast<std::uint16_t>(bits));
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, static_cast<std::uint32_t>(data_size));
  const double full_scale = std::ldexp(1.0, bits - 1);
  for (float s : samples) {
    const double q = std::clamp(std::round(static_cast<double>(s) * full_scale), -full_scale, full_scale - 1);
    const auto v = static_cast<std::uint32_t>(static_cast<std::int32_t>(q));
    for (std::size_t b = 0; b < bytes_per_sample; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  return out;
}

void write_wav(const std::filesystem::path& path, std::span<const float> samples, int sample_rate, int bits) {
  const auto bytes = encode_wav(samples, sample_rate, bits);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

AudioClip resample_linear(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0) throw ArgumentError("resample_linear: target rate must be positive");
  if (clip.sample_rate <= 0) throw ArgumentError("resample_linear: source rate must be positive");
  if (clip.sample_rate == target_rate) return clip;
  const auto src = static_cast<std::uint64_t>(clip.sample_rate);
  const auto dst = static_cast<std::uint64_t>(target_rate);
  const std::size_t len = clip.samples.size();
  const std::size_t out_len = static_cast<std::size_t>(len * dst / src);
  AudioClip out;
  out.sample_rate = target_rate;
  out.source_id = clip.source_id;
  out.samples.resize(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const std::uint64_t num = i * src;
    const std::size_t idx = static_cast<std::size_t>(num / dst);
    const double frac = static_cast<double>(num % dst) / static_cast<double>(dst);
    const double a = clip.samples[idx];
    const double b = idx + 1 < len ? clip.samples[idx + 1] : a;
    out.samples[i] = static_cast<float>(a + frac * (b - a));
  }
  return out;
}

AudioClip peak_normalize(const AudioClip& clip) {
  float peak = 0.0f;
  for (float s : clip.samples) peak = std::max(peak, std::fabs(s));
  if (peak <= 0.0f) return clip;
  AudioClip out = clip;
  for (float& s : out.samples) s /= peak;
  return out;
}

std::vector<float> pad_to(std::span<const float> samples, std::size_t length) {
  if (samples.size() >= length) return {samples.begin(), samples.end()};
  std::vector<float> out(length, 0.0f);
  const std::size_t left = (length - samples.size()) / 2;
  std::copy(samples.begin(), samples.end(), out.begin() + static_cast<std::ptrdiff_t>(left));
  return out;
}

Window crop_at(std::span<const float> samples, std::size_t window_length, std::size_t start, int label) {
  if (window_length == 0) throw ArgumentError("crop: window length must be positive");
  std::vector<float> padded;
  std::span<const float> src = samples;
  if (samples.size() < window_length) {
    padded = pad_to(samples, window_length);
    src = padded;
  }
  if (start > src.size() - window_length) {
    throw ArgumentError("crop: start " + std::to_string(start) + " beyond last valid offset " +
                        std::to_string(src.size() - window_length));
  }
  Window w;
  w.samples.assign(src.begin() + static_cast<std::ptrdiff_t>(start),
                   src.begin() + static_cast<std::ptrdiff_t>(start + window_length));
  w.start = start;
  w.label = label;
  return w;
}

Window random_crop(std::span<const float> samples, std::size_t window_length, std::mt19937_64& rng, int label) {
  const std::size_t len = std::max(samples.size(), window_length);
  std::uniform_int_distribution<std::size_t> pick(0, len - window_length);
  return crop_at(samples, window_length, pick(rng), label);
}

std::vector<std::size_t> voting_starts(std::size_t length, std::size_t window_length, std::size_t hop) {
  if (hop == 0) throw ArgumentError("segment_for_voting: hop must be positive");
  if (window_length == 0) throw ArgumentError("segment_for_voting: window length must be positive");
  if (length <= window_length) return {0};
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + window_length <= length; s += hop) starts.push_back(s);
  const std::size_t anchor = length - window_length;
  if (starts.back() != anchor) {
    if (starts.size() >= 2 && starts[starts.size() - 2] + window_length >= anchor) starts.pop_back();
    starts.push_back(anchor);
  }
  return starts;
}

std::vector<Window> segment_for_voting(std::span<const float> samples, std::size_t window_length, std::size_t hop) {
  const auto starts = voting_starts(samples.size(), window_length, hop);
  std::vector<Window> windows;
  windows.reserve(starts.size());
  for (std::size_t s : starts) windows.push_back(crop_at(samples, window_length, s));
  return windows;
}

}  // namespace wavems
