// Copyright 2026 The upwave authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "upwave/audio.hpp"

namespace upwave::dsp {

// Analysis parameters. Hann window of length fft_size (periodic convention),
// reflect padding of fft_size/2 on each side. hop must divide fft_size so the
// overlap-add condition holds for the Hann window.
struct StftConfig {
  int fft_size = 1024;
  int hop = 256;

  void validate() const;
  int freq_bins() const { return fft_size / 2 + 1; }
};

struct Spectrogram {
  // Frame-major layout: bins[frame * freq_bins + bin].
  std::vector<std::complex<double>> bins;
  int freq_bins = 0;
  int frames = 0;
  StftConfig config;
  std::size_t source_length = 0;
  int sample_rate = 48000;

  std::complex<double>& at(int frame, int bin) { return bins[static_cast<std::size_t>(frame) * freq_bins + bin]; }
  const std::complex<double>& at(int frame, int bin) const {
    return bins[static_cast<std::size_t>(frame) * freq_bins + bin];
  }
};

// Periodic Hann window, w[n] = 0.5 - 0.5 cos(2 pi n / size). size >= 2.
std::vector<double> hann_window(int size);

// Centered one-sided STFT; frames = floor(len / hop) + 1.
Spectrogram stft(const AudioBuffer& x, const StftConfig& cfg = {});

// Weighted overlap-add inverse with window-squared normalization, trimmed to
// the source length. Exact round trip for unmodified spectrograms.
AudioBuffer istft(const Spectrogram& s);

// Mirror indexing without edge duplication, used for reflect padding.
std::size_t reflect_index(long long pos, std::size_t n);

}  // namespace upwave::dsp
