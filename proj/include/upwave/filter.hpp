// Copyright 2026 The upwave authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <vector>

#include "upwave/audio.hpp"

namespace upwave::dsp {

// One second-order section of an IIR cascade, direct form II transposed:
//   y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]
struct SosSection {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct SosFilter {
  std::vector<SosSection> sections;
  int order = 0;
  double ripple_db = 0.0;
  double cutoff_hz = 0.0;
  double sample_rate_hz = 0.0;
};

// Digital Chebyshev Type I low-pass: analog equiripple prototype mapped with
// the bilinear transform after frequency pre-warping, so the -ripple_db point
// lands exactly on cutoff_hz. order in [1, 12], 0 < cutoff_hz < fs/2.
SosFilter design_cheby1_lowpass(int order, double ripple_db, double cutoff_hz, double fs_hz);

// Complex frequency response of the cascade at freq_hz.
std::complex<double> sos_response(const SosFilter& f, double freq_hz);

// Forward pass then time-reversed pass per section, with reflective edge
// padding of 3 * (2 * order) samples. Net phase is zero, magnitude is |H|^2.
AudioBuffer zero_phase_filter(const AudioBuffer& x, const SosFilter& f);

}  // namespace upwave::dsp
