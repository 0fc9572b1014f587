#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wavems/ops.hpp"

namespace wavems::testing {

std::vector<double> dft_magnitude_ref(const std::vector<double>& x, std::size_t nfft) {
  std::vector<double> mag(nfft / 2 + 1);
  for (std::size_t b = 0; b < mag.size(); ++b) {
    long double re = 0, im = 0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      const long double ang = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>((b * n) % nfft) /
                              static_cast<long double>(nfft);
      re += x[n] * std::cos(ang);
      im += x[n] * std::sin(ang);
    }
    mag[b] = static_cast<double>(std::sqrt(re * re + im * im));
  }
  return mag;
}

std::vector<double> distinct_values(std::size_t n, std::mt19937_64& rng, double gap) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = (static_cast<double>(i) - static_cast<double>(n) / 2.0) * gap;
  std::shuffle(v.begin(), v.end(), rng);
  return v;
}

std::vector<double> off_kink_values(std::size_t n, std::mt19937_64& rng, double margin) {
  std::uniform_real_distribution<double> mag(margin, 1.0);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> v(n);
  for (auto& e : v) e = sign(rng) ? mag(rng) : -mag(rng);
  return v;
}

Tensor<double> weighted_sum(const Tensor<double>& out, const std::vector<double>& weights) {
  return sum(mul(out, Tensor<double>(out.shape(), weights)));
}

GradCheckResult grad_check(const std::vector<Tensor<double>>& inputs, const std::function<Tensor<double>()>& loss,
                           const std::vector<double>& steps, double rel_tol, double abs_floor) {
  std::vector<Tensor<double>> xs = inputs;
  for (auto& x : xs) x.zero_grad();
  backward(loss());
  std::vector<std::vector<double>> analytic;
  for (const auto& x : xs) {
    if (x.has_grad()) {
      analytic.emplace_back(x.grad().begin(), x.grad().end());
    } else {
      analytic.emplace_back(x.numel(), 0.0);
    }
  }

  GradCheckResult r;
  NoGradGuard guard;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    auto data = xs[t].mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double a = analytic[t][i];
      const double saved = data[i];
      bool pass = false;
      double best_rel = 0.0, numeric = 0.0;
      for (std::size_t s = 0; s < steps.size() && !pass; ++s) {
        data[i] = saved + steps[s];
        const double up = loss().item();
        data[i] = saved - steps[s];
        const double down = loss().item();
        data[i] = saved;
        const double n = (up - down) / (2.0 * steps[s]);
        const double diff = std::abs(a - n);
        const double scale = std::max(std::abs(a), std::abs(n));
        const double rel = diff <= abs_floor ? 0.0 : diff / scale;
        pass = diff <= rel_tol * scale || diff <= abs_floor;
        if (s == 0 || rel < best_rel) {
          best_rel = rel;
          numeric = n;
        }
      }
      ++r.checked;
      r.max_rel = std::max(r.max_rel, best_rel);
      if (!pass && r.ok) {
        r.worst = "tensor " + std::to_string(t) + " index " + std::to_string(i) + ": analytic " + std::to_string(a) +
                  " numeric " + std::to_string(numeric);
      }
      if (!pass) r.ok = false;
    }
  }
  return r;
}

}  // namespace wavems::testing
