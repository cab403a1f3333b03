// Copyright 2026 The upwave authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstddef>

namespace upwave {

// One-dimensional real FFT backed by FFTW. An instance owns its plans and
// scratch buffers: create one per transform size and reuse it. Instances are
// not shareable across threads; creating them is internally serialized
// (FFTW's planner is not thread-safe).
template <typename Real>
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&& other) noexcept;
  RealFft& operator=(RealFft&& other) noexcept;

  int size() const { return size_; }
  int bins() const { return size_ / 2 + 1; }

  // size() reals -> bins() complex values, unnormalized.
  void forward(const Real* in, std::complex<Real>* out) const;

  // bins() complex values -> size() reals, unnormalized (caller divides by size()).
  void inverse(const std::complex<Real>* in, Real* out) const;

 private:
  int size_ = 0;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
  Real* real_buf_ = nullptr;
  std::complex<Real>* complex_buf_ = nullptr;
};

extern template class RealFft<float>;
extern template class RealFft<double>;

}  // namespace upwave
