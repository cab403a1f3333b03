// Copyright 2026 The upwave authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "upwave/audio.hpp"

namespace upwave::dsp {

// Arbitrary-ratio band-limited resampling with a Kaiser-windowed sinc kernel
// (128 taps per phase at the lower rate, beta = 14.77, cutoff at 0.96 of the
// lower Nyquist). Output length is round(len * to_hz / from_hz); the identity
// ratio is an exact copy.
AudioBuffer resample(const AudioBuffer& x, int to_hz);

}  // namespace upwave::dsp
