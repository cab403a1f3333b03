// Copyright 2026 The upwave authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "upwave/audio.hpp"

namespace upwave::metrics {

struct MetricConfig {
  int fft_size = 2048;
  int hop = 512;
  double power_floor = 1e-10;
};

// 10 log10(|ref|^2 / |ref - est|^2), capped at +300 dB.
double snr_db(std::span<const double> ref, std::span<const double> est);

// log10(|STFT|^2 + floor), frame-major.
struct LogPowerSpectrogram {
  std::vector<double> values;
  int freq_bins = 0;
  int frames = 0;
  int sample_rate = 48000;

  double at(int frame, int bin) const { return values[static_cast<std::size_t>(frame) * freq_bins + bin]; }
};

LogPowerSpectrogram log_power_spectrogram(const AudioBuffer& x, const MetricConfig& cfg = {});

// Mean over frames of the per-frame RMS (over bins) of log-power differences.
double lsd(const AudioBuffer& ref, const AudioBuffer& est, const MetricConfig& cfg = {});

// Same restricted to bins above / at-or-below the cutoff bin; returns
// (lsd_hf, lsd_lf). The boundary bin belongs to the low band.
std::pair<double, double> lsd_banded(const AudioBuffer& ref, const AudioBuffer& est, double cutoff_hz,
                                     const MetricConfig& cfg = {});

struct MetricRow {
  int input_sr = 0;
  double snr_db = 0.0;
  double lsd = 0.0;
  double lsd_hf = 0.0;
  double lsd_lf = 0.0;
  int n_files = 0;
  int n_failed = 0;
};

struct MetricReport {
  std::vector<MetricRow> rows;

  std::string to_csv() const;
  std::string to_table() const;
};

}  // namespace upwave::metrics
