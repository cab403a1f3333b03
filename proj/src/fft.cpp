// Copyright 2026 The upwave authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "upwave/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace upwave {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename Real>
struct FftwApi;

template <>
struct FftwApi<double> {
  using Complex = fftw_complex;
  using Plan = fftw_plan;
  static void* malloc(std::size_t n) { return fftw_malloc(n); }
  static void free(void* p) { fftw_free(p); }
  static Plan plan_r2c(int n, double* in, Complex* out) {
    return fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  static Plan plan_c2r(int n, Complex* in, double* out) {
    return fftw_plan_dft_c2r_1d(n, in, out, FFTW_ESTIMATE);
  }
  static void execute(Plan p) { fftw_execute(p); }
  static void destroy(Plan p) { fftw_destroy_plan(p); }
};

template <>
struct FftwApi<float> {
  using Complex = fftwf_complex;
  using Plan = fftwf_plan;
  static void* malloc(std::size_t n) { return fftwf_malloc(n); }
  static void free(void* p) { fftwf_free(p); }
  static Plan plan_r2c(int n, float* in, Complex* out) {
    return fftwf_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  static Plan plan_c2r(int n, Complex* in, float* out) {
    return fftwf_plan_dft_c2r_1d(n, in, out, FFTW_ESTIMATE);
  }
  static void execute(Plan p) { fftwf_execute(p); }
  static void destroy(Plan p) { fftwf_destroy_plan(p); }
};

}  // namespace

template <typename Real>
RealFft<Real>::RealFft(int size) : size_(size) {
  using Api = FftwApi<Real>;
  if (size < 2) throw std::invalid_argument("RealFft: size must be >= 2");
  real_buf_ = static_cast<Real*>(Api::malloc(sizeof(Real) * static_cast<std::size_t>(size)));
  complex_buf_ = static_cast<std::complex<Real>*>(
      Api::malloc(sizeof(std::complex<Real>) * static_cast<std::size_t>(size / 2 + 1)));
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_fwd_ = Api::plan_r2c(size, real_buf_, reinterpret_cast<typename Api::Complex*>(complex_buf_));
  plan_inv_ = Api::plan_c2r(size, reinterpret_cast<typename Api::Complex*>(complex_buf_), real_buf_);
}

template <typename Real>
RealFft<Real>::~RealFft() {
  using Api = FftwApi<Real>;
  if (plan_fwd_ || plan_inv_) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan_fwd_) Api::destroy(static_cast<typename Api::Plan>(plan_fwd_));
    if (plan_inv_) Api::destroy(static_cast<typename Api::Plan>(plan_inv_));
  }
  Api::free(real_buf_);
  Api::free(complex_buf_);
}

template <typename Real>
RealFft<Real>::RealFft(RealFft&& other) noexcept {
  *this = std::move(other);
}

template <typename Real>
RealFft<Real>& RealFft<Real>::operator=(RealFft&& other) noexcept {
  std::swap(size_, other.size_);
  std::swap(plan_fwd_, other.plan_fwd_);
  std::swap(plan_inv_, other.plan_inv_);
  std::swap(real_buf_, other.real_buf_);
  std::swap(complex_buf_, other.complex_buf_);
  return *this;
}

template <typename Real>
void RealFft<Real>::forward(const Real* in, std::complex<Real>* out) const {
  using Api = FftwApi<Real>;
  std::copy(in, in + size_, real_buf_);
  Api::execute(static_cast<typename Api::Plan>(plan_fwd_));
  std::copy(complex_buf_, complex_buf_ + bins(), out);
}

template <typename Real>
void RealFft<Real>::inverse(const std::complex<Real>* in, Real* out) const {
  using Api = FftwApi<Real>;
  std::copy(in, in + bins(), complex_buf_);
  Api::execute(static_cast<typename Api::Plan>(plan_inv_));
  std::copy(real_buf_, real_buf_ + size_, out);
}

template class RealFft<float>;
template class RealFft<double>;

}  // namespace upwave
