// Copyright 2026 The upwave authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <vector>

namespace upwave {

// Mono waveform. Samples are nominally in [-1, 1]; DSP paths keep them in
// double precision, conversion to float happens at the network boundary.
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 48000;

  std::size_t size() const { return samples.size(); }
};

}  // namespace upwave
