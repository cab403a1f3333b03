// Copyright 2026 The upwave authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "upwave/resample.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace upwave::dsp {
namespace {

constexpr int kHalfWidth = 64;     // half-support in lower-rate samples (128 taps per phase)
constexpr double kBeta = 14.77;    // ~ -140 dB Kaiser sidelobes
constexpr double kCutoff = 0.96;   // fraction of the lower Nyquist
constexpr int kTableRes = 512;     // kernel table entries per sample spacing

double bessel_i0(double x) {
  const double q = x * x / 4.0;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (k * k);
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum;
}

// Kernel values at v = j / kTableRes, v in lower-rate sample units.
std::vector<double> build_kernel_table() {
  std::vector<double> table(kHalfWidth * kTableRes + 2);
  const double inv_i0 = 1.0 / bessel_i0(kBeta);
  for (std::size_t j = 0; j < table.size(); ++j) {
    const double v = static_cast<double>(j) / kTableRes;
    if (v >= kHalfWidth) {
      table[j] = 0.0;
      continue;
    }
    const double t = v / kHalfWidth;
    const double window = bessel_i0(kBeta * std::sqrt(1.0 - t * t)) * inv_i0;
    const double arg = M_PI * kCutoff * v;
    const double sinc = (v == 0.0) ? 1.0 : std::sin(arg) / arg;
    table[j] = kCutoff * sinc * window;
  }
  return table;
}

}  // namespace

AudioBuffer resample(const AudioBuffer& x, int to_hz) {
  if (to_hz <= 0) throw std::invalid_argument("resample: to_hz must be positive");
  if (x.sample_rate <= 0) throw std::invalid_argument("resample: invalid source rate");
  if (to_hz == x.sample_rate) return x;

  const std::size_t len = x.samples.size();
  AudioBuffer out;
  out.sample_rate = to_hz;
  if (len == 0) return out;

  const double ratio = static_cast<double>(to_hz) / x.sample_rate;
  const double scale = std::min(1.0, ratio);  // kernel stretches when downsampling
  const std::size_t out_len =
      static_cast<std::size_t>(std::llround(static_cast<double>(len) * to_hz / x.sample_rate));
  out.samples.resize(out_len);

  const std::vector<double> table = build_kernel_table();
  const double support = kHalfWidth / scale;  // in source samples

  for (std::size_t m = 0; m < out_len; ++m) {
    const double t = static_cast<double>(m) / ratio;
    const long long n_lo = static_cast<long long>(std::ceil(t - support));
    const long long n_hi = static_cast<long long>(std::floor(t + support));
    const long long lo = std::max<long long>(n_lo, 0);
    const long long hi = std::min<long long>(n_hi, static_cast<long long>(len) - 1);
    double acc = 0.0;
    for (long long n = lo; n <= hi; ++n) {
      const double v = std::abs(n - t) * scale * kTableRes;
      const std::size_t j = static_cast<std::size_t>(v);
      if (j + 1 >= table.size()) continue;
      const double frac = v - static_cast<double>(j);
      const double k = table[j] + frac * (table[j + 1] - table[j]);
      acc += x.samples[n] * k;
    }
    out.samples[m] = acc * scale;
  }
  return out;
}

}  // namespace upwave::dsp
