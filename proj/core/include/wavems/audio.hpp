#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace wavems {

/// Decoded mono waveform.
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = 0;
  std::string source_id;
};

/// A fixed-length excerpt fed to the network.
struct Window {
  std::vector<float> samples;
  std::size_t start = 0;  // offset into the (possibly padded) clip
  int label = -1;
};

/// Decodes a RIFF/WAVE PCM file (16- or 24-bit, 1 or 2 channels).
/// Stereo is mixed to mono by the per-frame channel mean; integers are scaled
/// by 2^(bits-1). Throws DecodeError naming the defect.
AudioClip decode_wav(std::span<const std::uint8_t> bytes, std::string source_id = {});
AudioClip read_wav(const std::filesystem::path& path);

/// 16- or 24-bit mono PCM encoding; samples are clamped to [-1, 1).
std::vector<std::uint8_t> encode_wav(std::span<const float> samples, int sample_rate, int bits = 16);
void write_wav(const std::filesystem::path& path, std::span<const float> samples, int sample_rate, int bits = 16);

/// Linear interpolation at positions i * src_rate / target_rate, holding the
/// last sample at the right edge. Output length is floor(len * target / src).
AudioClip resample_linear(const AudioClip& clip, int target_rate);

/// Scales so that max |sample| == 1; an all-zero clip is returned unchanged.
AudioClip peak_normalize(const AudioClip& clip);

/// Zero-pads symmetrically up to `length` (extra sample goes to the right).
std::vector<float> pad_to(std::span<const float> samples, std::size_t length);

/// Excerpt [start, start + window_length) of the clip after symmetric padding.
Window crop_at(std::span<const float> samples, std::size_t window_length, std::size_t start, int label = -1);

/// Uniformly random excerpt; start is drawn from [0, len - window_length].
Window random_crop(std::span<const float> samples, std::size_t window_length, std::mt19937_64& rng, int label = -1);

/// Start offsets used for probability voting over a clip of `length` samples.
///
/// Regular windows start at 0, hop, 2*hop, ... while they fit. If the last of
/// them stops short of the clip end, a window anchored at length - window is
/// appended, and the last regular window is dropped when its neighbours already
/// cover it. Clips shorter than one window yield the single start 0 (after
/// padding).
std::vector<std::size_t> voting_starts(std::size_t length, std::size_t window_length, std::size_t hop);

/// Windows at voting_starts(). Throws ArgumentError when hop is zero.
std::vector<Window> segment_for_voting(std::span<const float> samples, std::size_t window_length, std::size_t hop);

/// Half a window, the hop used for voting unless configured otherwise.
inline std::size_t default_hop(std::size_t window_length) { return window_length / 2 > 0 ? window_length / 2 : 1; }

}  // namespace wavems
