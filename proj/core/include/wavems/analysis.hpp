#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wavems/model.hpp"

namespace wavems {

/// |DFT| of the weights zero-padded to nfft, bins 0..nfft/2.
/// Throws ArgumentError when nfft < weights.size() or nfft < 2.
std::vector<double> filter_response(std::span<const double> weights, std::size_t nfft = 2048);

inline double bin_frequency(std::size_t bin, int sample_rate, std::size_t nfft) {
  return static_cast<double>(bin) * sample_rate / static_cast<double>(nfft);
}

/// Frequency of the largest bin (lowest bin on ties); 0 for an all-zero response.
double central_frequency(std::span<const double> magnitude, int sample_rate, std::size_t nfft);

/// Magnitude-weighted mean frequency; 0 for an all-zero response.
double spectral_centroid(std::span<const double> magnitude, int sample_rate, std::size_t nfft);

/// Per-filter responses of one branch, max-normalized per row and stably
/// sorted by ascending central frequency.
struct ResponseMatrix {
  std::size_t branch_id = 0;  // 1-based
  int sample_rate = 0;
  std::size_t nfft = 0;
  std::vector<std::size_t> filter_index;  // original filter of each row
  std::vector<double> central_freqs;
  std::vector<double> centroids;
  std::vector<std::vector<double>> rows;
};

ResponseMatrix response_matrix(std::span<const std::vector<double>> filters, std::size_t branch_id, int sample_rate,
                               std::size_t nfft = 2048);

/// Uses the first (strided) conv of branch `branch_id` (1-based).
ResponseMatrix response_matrix(const Model<float>& model, std::size_t branch_id, std::size_t nfft = 2048);

/// Header `central_freq_hz,<bin Hz>...`, one row per filter.
std::string response_csv(const ResponseMatrix& matrix);
/// Binary PGM (P5): width nfft/2+1, height = rows, maxval 255, round(255 * value).
std::vector<std::uint8_t> response_pgm(const ResponseMatrix& matrix);

/// Writes branch<id>_response.csv and branch<id>_response.pgm; returns both paths.
std::vector<std::filesystem::path> export_response(const ResponseMatrix& matrix, const std::filesystem::path& out_dir);

/// export_response for every branch of the model.
std::vector<std::filesystem::path> export_all_responses(const Model<float>& model, const std::filesystem::path& out_dir,
                                                        std::size_t nfft = 2048);

struct ParsedResponseCsv {
  std::vector<double> bin_freqs;
  std::vector<double> central_freqs;
  std::vector<std::vector<double>> rows;
};
ParsedResponseCsv parse_response_csv(std::string_view csv);

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  int maxval = 0;
  std::vector<std::uint8_t> pixels;
};
GrayImage parse_pgm(std::span<const std::uint8_t> bytes);

}  // namespace wavems
