// Copyright 2026 The upwave authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "upwave/filter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "upwave/stft.hpp"

namespace upwave::dsp {

SosFilter design_cheby1_lowpass(int order, double ripple_db, double cutoff_hz, double fs_hz) {
  if (order < 1 || order > 12) throw std::invalid_argument("design_cheby1_lowpass: order must be in [1, 12]");
  if (!(ripple_db > 0.0)) throw std::invalid_argument("design_cheby1_lowpass: ripple_db must be positive");
  if (!(fs_hz > 0.0) || !(cutoff_hz > 0.0) || cutoff_hz >= fs_hz / 2.0)
    throw std::invalid_argument("design_cheby1_lowpass: need 0 < cutoff_hz < fs/2");

  // Analog prototype: poles on an ellipse sized by eps, unit passband edge.
  const double eps = std::sqrt(std::pow(10.0, ripple_db / 10.0) - 1.0);
  const double mu = std::asinh(1.0 / eps) / order;
  const double warped = 2.0 * fs_hz * std::tan(M_PI * cutoff_hz / fs_hz);

  std::vector<std::complex<double>> analog_poles(order);
  double gain = 1.0;
  for (int k = 1; k <= order; ++k) {
    const double theta = M_PI * (2 * k - 1) / (2.0 * order);
    std::complex<double> p(-std::sinh(mu) * std::sin(theta), std::cosh(mu) * std::cos(theta));
    p *= warped;
    analog_poles[k - 1] = p;
    gain *= std::abs(p);  // prod(-p_k) is real positive for a conjugate-closed set
  }
  if (order % 2 == 0) gain /= std::sqrt(1.0 + eps * eps);

  // Bilinear transform; n zeros land at z = -1.
  const double fs2 = 2.0 * fs_hz;
  std::vector<std::complex<double>> poles(order);
  std::complex<double> denom_prod(1.0, 0.0);
  for (int k = 0; k < order; ++k) {
    poles[k] = (fs2 + analog_poles[k]) / (fs2 - analog_poles[k]);
    denom_prod *= fs2 - analog_poles[k];
  }
  const double k_digital = gain / denom_prod.real();

  SosFilter f;
  f.order = order;
  f.ripple_db = ripple_db;
  f.cutoff_hz = cutoff_hz;
  f.sample_rate_hz = fs_hz;

  const int nsec = (order + 1) / 2;
  const double g = std::pow(k_digital, 1.0 / nsec);
  // Conjugate pairs are (k, order-1-k); the middle pole of an odd order is real.
  for (int k = 0; k < order / 2; ++k) {
    const std::complex<double> p = poles[k];
    SosSection s;
    s.b0 = g;
    s.b1 = 2.0 * g;
    s.b2 = g;
    s.a1 = -2.0 * p.real();
    s.a2 = std::norm(p);
    f.sections.push_back(s);
  }
  if (order % 2 == 1) {
    const double p = poles[order / 2].real();
    SosSection s;
    s.b0 = g;
    s.b1 = g;
    s.b2 = 0.0;
    s.a1 = -p;
    s.a2 = 0.0;
    f.sections.push_back(s);
  }

  for (const auto& p : poles)
    if (std::abs(p) >= 1.0)
      throw std::runtime_error("design_cheby1_lowpass: produced an unstable pole");
  return f;
}

std::complex<double> sos_response(const SosFilter& f, double freq_hz) {
  const std::complex<double> z1 = std::exp(std::complex<double>(0.0, -2.0 * M_PI * freq_hz / f.sample_rate_hz));
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h(1.0, 0.0);
  for (const auto& s : f.sections)
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return h;
}

namespace {

void run_section_forward(const SosSection& s, std::vector<double>& x) {
  double s1 = 0.0, s2 = 0.0;
  for (double& v : x) {
    const double in = v;
    const double out = s.b0 * in + s1;
    s1 = s.b1 * in - s.a1 * out + s2;
    s2 = s.b2 * in - s.a2 * out;
    v = out;
  }
}

}  // namespace

AudioBuffer zero_phase_filter(const AudioBuffer& x, const SosFilter& f) {
  const std::size_t len = x.samples.size();
  if (len <= static_cast<std::size_t>(3 * f.order))
    throw std::invalid_argument("zero_phase_filter: input shorter than 3 * order");
  if (f.sections.empty()) throw std::invalid_argument("zero_phase_filter: empty filter");

  const std::size_t pad = static_cast<std::size_t>(3 * (2 * f.order));
  std::vector<double> ext(len + 2 * pad);
  for (std::size_t i = 0; i < ext.size(); ++i)
    ext[i] = x.samples[reflect_index(static_cast<long long>(i) - static_cast<long long>(pad), len)];

  for (const auto& s : f.sections) {
    run_section_forward(s, ext);
    std::reverse(ext.begin(), ext.end());
    run_section_forward(s, ext);
    std::reverse(ext.begin(), ext.end());
  }

  AudioBuffer out;
  out.sample_rate = x.sample_rate;
  out.samples.assign(ext.begin() + pad, ext.begin() + pad + len);
  return out;
}

}  // namespace upwave::dsp
