// Copyright 2026 The upwave authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "upwave/degrade.hpp"

#include <cmath>
#include <stdexcept>

#include "upwave/resample.hpp"

namespace upwave::dsp {

FilterParams draw_training_filter(Rng& rng) {
  FilterParams p;
  p.order = static_cast<int>(rng.uniform_int(1, 10));
  const double log_lo = std::log(1e-3);
  const double log_hi = std::log(5.0);
  p.ripple_db = std::exp(rng.uniform(log_lo, log_hi));
  return p;
}

SosFilter design_degrade_filter(int input_sr, int order, double ripple_db, int fs_hz) {
  const double cutoff = std::min(0.5 * input_sr, 0.4995 * fs_hz);
  return design_cheby1_lowpass(order, ripple_db, cutoff, fs_hz);
}

AudioBuffer degrade(const AudioBuffer& x, int input_sr, const SosFilter& filter) {
  if (input_sr < 6000 || input_sr > 48000)
    throw std::invalid_argument("degrade: input_sr must be in [6000, 48000]");
  if (x.sample_rate != 48000) throw std::invalid_argument("degrade: expected a 48 kHz buffer");

  AudioBuffer low = resample(resample(zero_phase_filter(x, filter), input_sr), 48000);
  low.samples.resize(x.samples.size(), 0.0);  // resampling ratios can round off by one sample
  return low;
}

}  // namespace upwave::dsp
