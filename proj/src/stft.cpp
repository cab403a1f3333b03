// Copyright 2026 The upwave authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "upwave/stft.hpp"

#include <cmath>
#include <stdexcept>

#include "upwave/fft.hpp"

namespace upwave::dsp {

void StftConfig::validate() const {
  if (fft_size < 2) throw std::invalid_argument("StftConfig: fft_size must be >= 2");
  if (hop < 1 || hop >= fft_size || fft_size % hop != 0)
    throw std::invalid_argument("StftConfig: hop must divide fft_size and be smaller than it");
}

std::vector<double> hann_window(int size) {
  if (size < 2) throw std::invalid_argument("hann_window: size must be >= 2");
  std::vector<double> w(static_cast<std::size_t>(size));
  for (int n = 0; n < size; ++n) w[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * n / size);
  return w;
}

std::size_t reflect_index(long long pos, std::size_t n) {
  if (n == 1) return 0;
  const long long period = 2 * (static_cast<long long>(n) - 1);
  long long p = pos % period;
  if (p < 0) p += period;
  if (p >= static_cast<long long>(n)) p = period - p;
  return static_cast<std::size_t>(p);
}

Spectrogram stft(const AudioBuffer& x, const StftConfig& cfg) {
  cfg.validate();
  const std::size_t len = x.samples.size();
  if (len == 0) throw std::invalid_argument("stft: empty input");

  const int n = cfg.fft_size;
  const int pad = n / 2;
  const int frames = static_cast<int>(len / cfg.hop) + 1;
  const std::vector<double> window = hann_window(n);

  Spectrogram s;
  s.freq_bins = cfg.freq_bins();
  s.frames = frames;
  s.config = cfg;
  s.source_length = len;
  s.sample_rate = x.sample_rate;
  s.bins.resize(static_cast<std::size_t>(frames) * s.freq_bins);

  RealFft<double> fft(n);
  std::vector<double> frame(static_cast<std::size_t>(n));
  for (int i = 0; i < frames; ++i) {
    const long long start = static_cast<long long>(i) * cfg.hop - pad;
    for (int m = 0; m < n; ++m) frame[m] = window[m] * x.samples[reflect_index(start + m, len)];
    fft.forward(frame.data(), &s.at(i, 0));
  }
  return s;
}

AudioBuffer istft(const Spectrogram& s) {
  s.config.validate();
  const int n = s.config.fft_size;
  const int hop = s.config.hop;
  if (s.freq_bins != s.config.freq_bins() || s.frames < 1)
    throw std::invalid_argument("istft: spectrogram inconsistent with its config");

  const std::vector<double> window = hann_window(n);
  const std::size_t padded = s.source_length + static_cast<std::size_t>(n);
  std::vector<double> acc(padded, 0.0);
  std::vector<double> den(padded, 0.0);

  RealFft<double> fft(n);
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(s.freq_bins));
  std::vector<double> frame(static_cast<std::size_t>(n));
  const double inv_n = 1.0 / n;
  for (int i = 0; i < s.frames; ++i) {
    for (int k = 0; k < s.freq_bins; ++k) spec[k] = s.at(i, k);
    fft.inverse(spec.data(), frame.data());
    const std::size_t start = static_cast<std::size_t>(i) * hop;
    for (int m = 0; m < n && start + m < padded; ++m) {
      acc[start + m] += window[m] * frame[m] * inv_n;
      den[start + m] += window[m] * window[m];
    }
  }

  constexpr double kDenFloor = 1e-11;
  AudioBuffer out;
  out.sample_rate = s.sample_rate;
  out.samples.resize(s.source_length);
  const std::size_t pad = static_cast<std::size_t>(n) / 2;
  for (std::size_t m = 0; m < s.source_length; ++m)
    out.samples[m] = acc[m + pad] / std::max(den[m + pad], kDenFloor);
  return out;
}

}  // namespace upwave::dsp
