#include "wavems/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>

#include "wavems/error.hpp"

namespace wavems {

namespace {

// FFTW planning is not thread-safe.
std::mutex g_plan_mutex;

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::vector<double> filter_response(std::span<const double> weights, std::size_t nfft) {
  if (nfft < 2) throw ArgumentError("filter_response: nfft must be at least 2");
  if (nfft < weights.size()) {
    throw ArgumentError("filter_response: nfft " + std::to_string(nfft) + " shorter than filter length " +
                        std::to_string(weights.size()));
  }
  const std::size_t bins = nfft / 2 + 1;
  double* in = fftw_alloc_real(nfft);
  fftw_complex* out = fftw_alloc_complex(bins);
  fftw_plan plan;
  {
    std::lock_guard lock(g_plan_mutex);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in, out, FFTW_ESTIMATE);
  }
  std::fill(in, in + nfft, 0.0);
  std::copy(weights.begin(), weights.end(), in);
  fftw_execute(plan);
  std::vector<double> mag(bins);
  for (std::size_t b = 0; b < bins; ++b) mag[b] = std::hypot(out[b][0], out[b][1]);
  {
    std::lock_guard lock(g_plan_mutex);
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return mag;
}

double central_frequency(std::span<const double> magnitude, int sample_rate, std::size_t nfft) {
  if (magnitude.empty()) return 0.0;
  const auto it = std::max_element(magnitude.begin(), magnitude.end());
  if (*it <= 0.0) return 0.0;
  return bin_frequency(static_cast<std::size_t>(it - magnitude.begin()), sample_rate, nfft);
}

double spectral_centroid(std::span<const double> magnitude, int sample_rate, std::size_t nfft) {
  double total = 0.0, weighted = 0.0;
  for (std::size_t b = 0; b < magnitude.size(); ++b) {
    total += magnitude[b];
    weighted += magnitude[b] * bin_frequency(b, sample_rate, nfft);
  }
  return total > 0.0 ? weighted / total : 0.0;
}

ResponseMatrix response_matrix(std::span<const std::vector<double>> filters, std::size_t branch_id, int sample_rate,
                               std::size_t nfft) {
  const std::size_t n = filters.size();
  std::vector<std::vector<double>> raw(n);
  std::vector<double> central(n), centroid(n);
  for (std::size_t i = 0; i < n; ++i) {
    raw[i] = filter_response(filters[i], nfft);
    central[i] = central_frequency(raw[i], sample_rate, nfft);
    centroid[i] = spectral_centroid(raw[i], sample_rate, nfft);
    const double peak = *std::max_element(raw[i].begin(), raw[i].end());
    if (peak > 0.0) {
      for (double& v : raw[i]) v /= peak;
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return central[a] < central[b]; });

  ResponseMatrix m;
  m.branch_id = branch_id;
  m.sample_rate = sample_rate;
  m.nfft = nfft;
  for (std::size_t i : order) {
    m.filter_index.push_back(i);
    m.central_freqs.push_back(central[i]);
    m.centroids.push_back(centroid[i]);
    m.rows.push_back(std::move(raw[i]));
  }
  return m;
}

ResponseMatrix response_matrix(const Model<float>& model, std::size_t branch_id, std::size_t nfft) {
  const auto& branches = model.config().branches;
  if (branch_id < 1 || branch_id > branches.size()) {
    throw ArgumentError("branch " + std::to_string(branch_id) + " does not exist (model has " +
                        std::to_string(branches.size()) + ")");
  }
  const auto& w = model.parameter("branch" + std::to_string(branch_id) + ".conv.weight").value;
  const std::size_t filters = w.shape()[0], k = w.shape()[2];
  std::vector<std::vector<double>> taps(filters);
  const auto data = w.data();
  for (std::size_t f = 0; f < filters; ++f) taps[f].assign(data.begin() + f * k, data.begin() + (f + 1) * k);
  return response_matrix(taps, branch_id, model.config().sample_rate, nfft);
}

std::string response_csv(const ResponseMatrix& m) {
  std::string out = "central_freq_hz";
  const std::size_t bins = m.nfft / 2 + 1;
  for (std::size_t b = 0; b < bins; ++b) out += "," + num(bin_frequency(b, m.sample_rate, m.nfft));
  out += '\n';
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    out += num(m.central_freqs[r]);
    for (double v : m.rows[r]) out += "," + num(v);
    out += '\n';
  }
  return out;
}

std::vector<std::uint8_t> response_pgm(const ResponseMatrix& m) {
  const std::size_t width = m.nfft / 2 + 1;
  const std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(m.rows.size()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (const auto& row : m.rows) {
    for (double v : row) out.push_back(static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))));
  }
  return out;
}

std::vector<std::filesystem::path> export_response(const ResponseMatrix& m, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory " + out_dir.string() + ": " + ec.message());
  const std::string stem = "branch" + std::to_string(m.branch_id) + "_response";
  const auto csv_path = out_dir / (stem + ".csv");
  const auto pgm_path = out_dir / (stem + ".pgm");
  write_bytes(csv_path, response_csv(m));
  const auto pgm = response_pgm(m);
  write_bytes(pgm_path, std::string_view(reinterpret_cast<const char*>(pgm.data()), pgm.size()));
  return {csv_path, pgm_path};
}

std::vector<std::filesystem::path> export_all_responses(const Model<float>& model, const std::filesystem::path& out_dir,
                                                        std::size_t nfft) {
  std::vector<std::filesystem::path> written;
  for (std::size_t b = 1; b <= model.config().branches.size(); ++b) {
    for (auto& p : export_response(response_matrix(model, b, nfft), out_dir)) written.push_back(std::move(p));
  }
  return written;
}

ParsedResponseCsv parse_response_csv(std::string_view csv) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    return cells;
  };
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError("response CSV: empty");
  const auto header = split(line);
  if (header.empty() || header[0] != "central_freq_hz") throw ArgumentError("response CSV: bad header");
  ParsedResponseCsv out;
  for (std::size_t i = 1; i < header.size(); ++i) out.bin_freqs.push_back(std::stod(header[i]));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw ArgumentError("response CSV: ragged row");
    out.central_freqs.push_back(std::stod(cells[0]));
    std::vector<double> row;
    for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(std::stod(cells[i]));
    out.rows.push_back(std::move(row));
  }
  return out;
}

GrayImage parse_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
    if (t.empty()) throw DecodeError("PGM: truncated header");
    return t;
  };
  if (token() != "P5") throw DecodeError("PGM: not a binary graymap");
  GrayImage img;
  img.width = std::stoul(token());
  img.height = std::stoul(token());
  img.maxval = std::stoi(token());
  if (img.maxval < 1 || img.maxval > 255) throw DecodeError("PGM: unsupported maxval");
  ++pos;  // single whitespace before the raster
  if (bytes.size() < pos || bytes.size() - pos != img.width * img.height) throw DecodeError("PGM: raster size mismatch");
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return img;
}

}  // namespace wavems
