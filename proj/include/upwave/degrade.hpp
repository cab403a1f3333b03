// Copyright 2026 The upwave authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "upwave/audio.hpp"
#include "upwave/filter.hpp"
#include "upwave/rng.hpp"

namespace upwave::dsp {

// Randomized low-pass parameters used when synthesizing training inputs:
// order uniform over {1..10}, ripple log-uniform over [1e-3, 5] dB.
struct FilterParams {
  int order = 8;
  double ripple_db = 0.05;
};

FilterParams draw_training_filter(Rng& rng);

// Chebyshev low-pass at the new Nyquist (clamped just below fs/2 when
// input_sr equals the target rate).
SosFilter design_degrade_filter(int input_sr, int order, double ripple_db, int fs_hz = 48000);

// x_l = resample(resample(zero_phase_filter(x, filter), input_sr), 48 kHz),
// trimmed/padded so the output length equals the input length.
AudioBuffer degrade(const AudioBuffer& x, int input_sr, const SosFilter& filter);

}  // namespace upwave::dsp
