// Copyright 2026 The upwave authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "upwave/network.hpp"

#include <cassert>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "upwave/errors.hpp"
#include "upwave/stft.hpp"

namespace upwave::net {

void ModelConfig::validate() const {
  if (n_layers < 1) throw std::invalid_argument("ModelConfig: n_layers must be >= 1");
  if (channels < 2 || channels % 2 != 0) throw std::invalid_argument("ModelConfig: channels must be even and >= 2");
  if (fft_size < 2 || hop < 1 || hop >= fft_size || fft_size % hop != 0)
    throw std::invalid_argument("ModelConfig: hop must divide fft_size and be smaller than it");
  if (lambda_sin_dim < 2 || lambda_sin_dim % 2 != 0)
    throw std::invalid_argument("ModelConfig: lambda_sin_dim must be even and >= 2");
  if (lambda_hidden < 1 || bsft_hidden < 1) throw std::invalid_argument("ModelConfig: embedding widths must be >= 1");
  if (target_sr < 1) throw std::invalid_argument("ModelConfig: target_sr must be positive");
}

BandwidthEmbedding bandwidth_embedding(int input_sr, const ModelConfig& cfg) {
  if (input_sr <= 0 || input_sr > cfg.target_sr)
    throw std::invalid_argument("bandwidth_embedding: input_sr must be in (0, target_sr]");
  const int f = cfg.freq_bins();
  BandwidthEmbedding e;
  e.freq_bins = f;
  e.cutoff_bin = static_cast<int>(
      std::floor(static_cast<double>(input_sr) / cfg.target_sr * (f - 1) + 0.5));
  e.map.assign(static_cast<std::size_t>(2) * f, 0.0f);
  for (int k = 0; k < f; ++k) e.map[(k <= e.cutoff_bin ? 0u : 1u) * f + k] = 1.0f;
  return e;
}

std::vector<double> sinusoidal_lambda_encoding(double lambda, int dim) {
  if (dim < 2 || dim % 2 != 0) throw std::invalid_argument("sinusoidal_lambda_encoding: dim must be even");
  const int half = dim / 2;
  const double u = lambda / 2.0;
  // periods geometric from 25 (covers lambda in [-25, 25] through u = lambda/2)
  // down to 25e-3
  std::vector<double> enc(static_cast<std::size_t>(dim));
  for (int j = 0; j < half; ++j) {
    const double frac = half > 1 ? static_cast<double>(j) / (half - 1) : 0.0;
    const double period = 25.0 * std::pow(1e-3, frac);
    const double omega = 2.0 * M_PI / period;
    enc[j] = std::sin(u * omega);
    enc[half + j] = std::cos(u * omega);
  }
  return enc;
}

namespace {

template <typename Real>
Mat<Real> swish(const Mat<Real>& x) {
  return (x.array() * ((-x.array()).exp() + Real(1)).inverse()).matrix();
}

template <typename Real>
Vec<Real> swish(const Vec<Real>& x) {
  return (x.array() * ((-x.array()).exp() + Real(1)).inverse()).matrix();
}

// d swish / dx = sig(x) (1 + x (1 - sig(x)))
template <typename Real, typename M>
M swish_backward(const M& pre, const M& g) {
  auto sig = ((-pre.array()).exp() + Real(1)).inverse().eval();
  return (g.array() * sig * (Real(1) + pre.array() * (Real(1) - sig))).matrix();
}

}  // namespace

// --- Conv1x1 ----------------------------------------------------------------

template <typename Real>
void Conv1x1<Real>::resize(int out_ch, int in_ch) {
  w = Mat<Real>::Zero(out_ch, in_ch);
  dw = Mat<Real>::Zero(out_ch, in_ch);
  b = Vec<Real>::Zero(out_ch);
  db = Vec<Real>::Zero(out_ch);
}

template <typename Real>
void Conv1x1<Real>::forward(const Mat<Real>& x, Mat<Real>& y) const {
  y.noalias() = w * x;
  y.colwise() += b;
}

template <typename Real>
void Conv1x1<Real>::backward(const Mat<Real>& x, const Mat<Real>& gy, Mat<Real>* gx) {
  dw.noalias() += gy * x.transpose();
  db.noalias() += gy.rowwise().sum();
  if (gx) gx->noalias() = w.transpose() * gy;
}

// --- Conv3 ------------------------------------------------------------------

template <typename Real>
void Conv3<Real>::resize(int out_channels, int in_channels) {
  in_ch = in_channels;
  out_ch = out_channels;
  w = Mat<Real>::Zero(out_ch, 3 * in_ch);
  dw = Mat<Real>::Zero(out_ch, 3 * in_ch);
  b = Vec<Real>::Zero(out_ch);
  db = Vec<Real>::Zero(out_ch);
}

template <typename Real>
void Conv3<Real>::forward(const Mat<Real>& x, Mat<Real>& y) const {
  const auto t = x.cols();
  y.noalias() = w.middleCols(in_ch, in_ch) * x;
  if (t > 1) {
    y.rightCols(t - 1).noalias() += w.middleCols(0, in_ch) * x.leftCols(t - 1);
    y.leftCols(t - 1).noalias() += w.middleCols(2 * in_ch, in_ch) * x.rightCols(t - 1);
  }
  y.colwise() += b;
}

template <typename Real>
void Conv3<Real>::backward(const Mat<Real>& x, const Mat<Real>& gy, Mat<Real>* gx) {
  const auto t = x.cols();
  dw.middleCols(in_ch, in_ch).noalias() += gy * x.transpose();
  if (t > 1) {
    dw.middleCols(0, in_ch).noalias() += gy.rightCols(t - 1) * x.leftCols(t - 1).transpose();
    dw.middleCols(2 * in_ch, in_ch).noalias() += gy.leftCols(t - 1) * x.rightCols(t - 1).transpose();
  }
  db.noalias() += gy.rowwise().sum();
  if (gx) {
    gx->noalias() = w.middleCols(in_ch, in_ch).transpose() * gy;
    if (t > 1) {
      gx->leftCols(t - 1).noalias() += w.middleCols(0, in_ch).transpose() * gy.rightCols(t - 1);
      gx->rightCols(t - 1).noalias() += w.middleCols(2 * in_ch, in_ch).transpose() * gy.leftCols(t - 1);
    }
  }
}

// --- Linear -----------------------------------------------------------------

template <typename Real>
void Linear<Real>::resize(int out_dim, int in_dim) {
  w = Mat<Real>::Zero(out_dim, in_dim);
  dw = Mat<Real>::Zero(out_dim, in_dim);
  b = Vec<Real>::Zero(out_dim);
  db = Vec<Real>::Zero(out_dim);
}

template <typename Real>
void Linear<Real>::forward(const Vec<Real>& x, Vec<Real>& y) const {
  y.noalias() = w * x + b;
}

template <typename Real>
void Linear<Real>::backward(const Vec<Real>& x, const Vec<Real>& gy, Vec<Real>* gx) {
  dw.noalias() += gy * x.transpose();
  db.noalias() += gy;
  if (gx) gx->noalias() = w.transpose() * gy;
}

// --- batched STFT helpers ---------------------------------------------------

namespace {

// Per-channel centered STFT of x (ch, T); output stacks real parts in rows
// [0, ch) and imaginary parts in rows [ch, 2*ch); column index = frame*F + bin.
template <typename Real>
void stft_stack(const Mat<Real>& x, int fft_size, int hop, const std::vector<Real>& window,
                RealFft<Real>& fft, Mat<Real>& out) {
  const int ch = static_cast<int>(x.rows());
  const int t = static_cast<int>(x.cols());
  const int pad = fft_size / 2;
  const int frames = t / hop + 1;
  const int f = fft_size / 2 + 1;
  out.resize(2 * ch, static_cast<Eigen::Index>(f) * frames);

  std::vector<Real> padded(static_cast<std::size_t>(t) + fft_size);
  std::vector<Real> frame(static_cast<std::size_t>(fft_size));
  std::vector<std::complex<Real>> spec(static_cast<std::size_t>(f));
  for (int c = 0; c < ch; ++c) {
    for (std::size_t p = 0; p < padded.size(); ++p)
      padded[p] = x(c, static_cast<Eigen::Index>(dsp::reflect_index(static_cast<long long>(p) - pad, t)));
    for (int i = 0; i < frames; ++i) {
      const Real* base = padded.data() + static_cast<std::size_t>(i) * hop;
      for (int m = 0; m < fft_size; ++m) frame[m] = window[m] * base[m];
      fft.forward(frame.data(), spec.data());
      Real* re = out.data() + static_cast<std::size_t>(c);
      Real* im = out.data() + static_cast<std::size_t>(ch + c);
      const Eigen::Index stride = out.rows();
      const Eigen::Index col0 = static_cast<Eigen::Index>(i) * f;
      for (int k = 0; k < f; ++k) {
        re[(col0 + k) * stride] = spec[k].real();
        im[(col0 + k) * stride] = spec[k].imag();
      }
    }
  }
}

// Adjoint of stft_stack: propagates a gradient on the stacked spectrum back
// to the waveform channels.
template <typename Real>
void stft_stack_adjoint(const Mat<Real>& gspec, int t, int fft_size, int hop, const std::vector<Real>& window,
                        RealFft<Real>& fft, Mat<Real>& gx) {
  const int ch = static_cast<int>(gspec.rows()) / 2;
  const int pad = fft_size / 2;
  const int frames = t / hop + 1;
  const int f = fft_size / 2 + 1;
  gx.setZero(ch, t);

  std::vector<Real> gpadded(static_cast<std::size_t>(t) + fft_size);
  std::vector<Real> u(static_cast<std::size_t>(fft_size));
  std::vector<std::complex<Real>> h(static_cast<std::size_t>(f));
  for (int c = 0; c < ch; ++c) {
    std::fill(gpadded.begin(), gpadded.end(), Real(0));
    const Real* re = gspec.data() + static_cast<std::size_t>(c);
    const Real* im = gspec.data() + static_cast<std::size_t>(ch + c);
    const Eigen::Index stride = gspec.rows();
    for (int i = 0; i < frames; ++i) {
      const Eigen::Index col0 = static_cast<Eigen::Index>(i) * f;
      for (int k = 0; k < f; ++k) {
        const Real ck = (k == 0 || k == f - 1) ? Real(1) : Real(2);
        h[k] = std::complex<Real>(re[(col0 + k) * stride] / ck, im[(col0 + k) * stride] / ck);
      }
      h[0].imag(Real(0));
      h[f - 1].imag(Real(0));
      fft.inverse(h.data(), u.data());
      Real* base = gpadded.data() + static_cast<std::size_t>(i) * hop;
      for (int m = 0; m < fft_size; ++m) base[m] += window[m] * u[m];
    }
    for (std::size_t p = 0; p < gpadded.size(); ++p)
      gx(c, static_cast<Eigen::Index>(dsp::reflect_index(static_cast<long long>(p) - pad, t))) += gpadded[p];
  }
}

// Overlap-add inverse of a stacked spectrum; D is the shared window-squared
// normalizer over the padded support.
template <typename Real>
std::vector<Real> wola_denominator(int t, int fft_size, int hop, const std::vector<Real>& window) {
  const int frames = t / hop + 1;
  std::vector<Real> d(static_cast<std::size_t>(t) + fft_size, Real(0));
  for (int i = 0; i < frames; ++i) {
    Real* base = d.data() + static_cast<std::size_t>(i) * hop;
    for (int m = 0; m < fft_size; ++m) base[m] += window[m] * window[m];
  }
  const Real floor_val = Real(1e-11);
  for (Real& v : d) v = std::max(v, floor_val);
  return d;
}

template <typename Real>
void istft_stack(const Mat<Real>& spec, int t, int fft_size, int hop, const std::vector<Real>& window,
                 RealFft<Real>& fft, Mat<Real>& y) {
  const int ch = static_cast<int>(spec.rows()) / 2;
  const int pad = fft_size / 2;
  const int frames = t / hop + 1;
  const int f = fft_size / 2 + 1;
  const Real inv_n = Real(1) / fft_size;
  y.resize(ch, t);

  const std::vector<Real> d = wola_denominator<Real>(t, fft_size, hop, window);
  std::vector<Real> acc(static_cast<std::size_t>(t) + fft_size);
  std::vector<Real> frame(static_cast<std::size_t>(fft_size));
  std::vector<std::complex<Real>> h(static_cast<std::size_t>(f));
  for (int c = 0; c < ch; ++c) {
    std::fill(acc.begin(), acc.end(), Real(0));
    const Real* re = spec.data() + static_cast<std::size_t>(c);
    const Real* im = spec.data() + static_cast<std::size_t>(ch + c);
    const Eigen::Index stride = spec.rows();
    for (int i = 0; i < frames; ++i) {
      const Eigen::Index col0 = static_cast<Eigen::Index>(i) * f;
      for (int k = 0; k < f; ++k)
        h[k] = std::complex<Real>(re[(col0 + k) * stride], im[(col0 + k) * stride]);
      h[0].imag(Real(0));
      h[f - 1].imag(Real(0));
      fft.inverse(h.data(), frame.data());
      Real* base = acc.data() + static_cast<std::size_t>(i) * hop;
      for (int m = 0; m < fft_size; ++m) base[m] += window[m] * frame[m] * inv_n;
    }
    for (int n = 0; n < t; ++n) y(c, n) = acc[n + pad] / d[n + pad];
  }
}

template <typename Real>
void istft_stack_adjoint(const Mat<Real>& gy, int fft_size, int hop, const std::vector<Real>& window,
                         RealFft<Real>& fft, Mat<Real>& gspec) {
  const int ch = static_cast<int>(gy.rows());
  const int t = static_cast<int>(gy.cols());
  const int pad = fft_size / 2;
  const int frames = t / hop + 1;
  const int f = fft_size / 2 + 1;
  const Real inv_n = Real(1) / fft_size;
  gspec.resize(2 * ch, static_cast<Eigen::Index>(f) * frames);

  const std::vector<Real> d = wola_denominator<Real>(t, fft_size, hop, window);
  std::vector<Real> gext(static_cast<std::size_t>(t) + fft_size);
  std::vector<Real> v(static_cast<std::size_t>(fft_size));
  std::vector<std::complex<Real>> h(static_cast<std::size_t>(f));
  for (int c = 0; c < ch; ++c) {
    std::fill(gext.begin(), gext.end(), Real(0));
    for (int n = 0; n < t; ++n) gext[n + pad] = gy(c, n) / d[n + pad];
    Real* re = gspec.data() + static_cast<std::size_t>(c);
    Real* im = gspec.data() + static_cast<std::size_t>(ch + c);
    const Eigen::Index stride = gspec.rows();
    for (int i = 0; i < frames; ++i) {
      const Real* base = gext.data() + static_cast<std::size_t>(i) * hop;
      for (int m = 0; m < fft_size; ++m) v[m] = window[m] * base[m] * inv_n;
      fft.forward(v.data(), h.data());
      const Eigen::Index col0 = static_cast<Eigen::Index>(i) * f;
      for (int k = 0; k < f; ++k) {
        const Real ck = (k == 0 || k == f - 1) ? Real(1) : Real(2);
        re[(col0 + k) * stride] = ck * h[k].real();
        im[(col0 + k) * stride] = ck * h[k].imag();
      }
    }
  }
}

}  // namespace

// --- SpectralTransform --------------------------------------------------------

template <typename Real>
void SpectralTransform<Real>::resize(int out_channels, int in_channels, int bsft_hidden, int fft_sz,
                                     int hop_size) {
  in_ch = in_channels;
  out_ch = out_channels;
  fft_size = fft_sz;
  hop = hop_size;
  bsft_shared_conv.resize(bsft_hidden, 2);
  bsft_gamma_conv.resize(2 * in_ch, bsft_hidden);
  bsft_beta_conv.resize(2 * in_ch, bsft_hidden);
  mix_conv.resize(2 * out_ch, 2 * in_ch);
  fft = std::make_shared<RealFft<Real>>(fft_size);
  const std::vector<double> w = dsp::hann_window(fft_size);
  window.assign(w.begin(), w.end());
}

template <typename Real>
void SpectralTransform<Real>::forward(const Mat<Real>& x, const BandwidthEmbedding& e_l, Mat<Real>& y,
                                      Cache* cache) const {
  const int t = static_cast<int>(x.cols());
  const int f = fft_size / 2 + 1;
  if (e_l.freq_bins != f) throw std::invalid_argument("SpectralTransform: bandwidth embedding bin count mismatch");
  assert(t % hop == 0);

  Mat<Real> spec;
  stft_stack(x, fft_size, hop, window, *fft, spec);
  const int frames = t / hop + 1;

  Mat<Real> el_mat(2, f);
  for (int k = 0; k < f; ++k) {
    el_mat(0, k) = static_cast<Real>(e_l.at(0, k));
    el_mat(1, k) = static_cast<Real>(e_l.at(1, k));
  }
  Mat<Real> shared_pre;
  bsft_shared_conv.forward(el_mat, shared_pre);
  Mat<Real> shared_post = swish(shared_pre);
  Mat<Real> gamma, beta;
  bsft_gamma_conv.forward(shared_post, gamma);
  bsft_beta_conv.forward(shared_post, beta);

  Mat<Real> bsft_pre(spec.rows(), spec.cols());
  for (int i = 0; i < frames; ++i)
    bsft_pre.middleCols(static_cast<Eigen::Index>(i) * f, f) =
        (spec.middleCols(static_cast<Eigen::Index>(i) * f, f).array() * gamma.array() + beta.array()).matrix();

  Mat<Real> bsft_post = swish(bsft_pre);
  Mat<Real> mixed;
  mix_conv.forward(bsft_post, mixed);
  istft_stack(mixed, t, fft_size, hop, window, *fft, y);

  if (cache) {
    cache->spec = std::move(spec);
    cache->gamma = std::move(gamma);
    cache->beta = std::move(beta);
    cache->shared_pre = std::move(shared_pre);
    cache->shared_post = std::move(shared_post);
    cache->bsft_pre = std::move(bsft_pre);
    cache->bsft_post = std::move(bsft_post);
    cache->frames = frames;
    cache->length = t;
  }
}

template <typename Real>
void SpectralTransform<Real>::backward(const BandwidthEmbedding& e_l, const Cache& cache, const Mat<Real>& gy,
                                       Mat<Real>& gx) {
  const int t = cache.length;
  const int f = fft_size / 2 + 1;
  const int frames = cache.frames;

  Mat<Real> gmixed;
  istft_stack_adjoint(gy, fft_size, hop, window, *fft, gmixed);

  Mat<Real> gpost;
  mix_conv.backward(cache.bsft_post, gmixed, &gpost);
  Mat<Real> gpre = swish_backward<Real>(cache.bsft_pre, gpost);

  Mat<Real> dgamma = Mat<Real>::Zero(cache.gamma.rows(), cache.gamma.cols());
  Mat<Real> dbeta = Mat<Real>::Zero(cache.beta.rows(), cache.beta.cols());
  Mat<Real> gspec(gpre.rows(), gpre.cols());
  for (int i = 0; i < frames; ++i) {
    const Eigen::Index c0 = static_cast<Eigen::Index>(i) * f;
    dgamma.array() += gpre.middleCols(c0, f).array() * cache.spec.middleCols(c0, f).array();
    dbeta.array() += gpre.middleCols(c0, f).array();
    gspec.middleCols(c0, f) = (gpre.middleCols(c0, f).array() * cache.gamma.array()).matrix();
  }

  Mat<Real> g_shared1, g_shared2;
  bsft_gamma_conv.backward(cache.shared_post, dgamma, &g_shared1);
  bsft_beta_conv.backward(cache.shared_post, dbeta, &g_shared2);
  Mat<Real> g_shared_post = g_shared1 + g_shared2;
  Mat<Real> g_shared_pre = swish_backward<Real>(cache.shared_pre, g_shared_post);

  Mat<Real> el_mat(2, f);
  for (int k = 0; k < f; ++k) {
    el_mat(0, k) = static_cast<Real>(e_l.at(0, k));
    el_mat(1, k) = static_cast<Real>(e_l.at(1, k));
  }
  bsft_shared_conv.backward(el_mat, g_shared_pre, nullptr);

  stft_stack_adjoint(gspec, t, fft_size, hop, window, *fft, gx);
}

// --- StfcBlock ----------------------------------------------------------------

template <typename Real>
void StfcBlock<Real>::resize(int out_channels, int in_channels, int bsft_hidden, int fft, int hop_size) {
  if (in_channels % 2 != 0 || out_channels % 2 != 0)
    throw std::invalid_argument("StfcBlock: channel counts must be even");
  in_ch = in_channels;
  out_ch = out_channels;
  const int g_in = in_ch / 2;
  const int half_out = out_ch / 2;
  conv_ll.resize(half_out, g_in);
  conv_gl.resize(half_out, g_in);
  conv_lg.resize(half_out, g_in);
  spectral.resize(half_out, g_in, bsft_hidden, fft, hop_size);
}

template <typename Real>
void StfcBlock<Real>::forward(const Mat<Real>& x, const BandwidthEmbedding& e_l, Mat<Real>& y,
                              Cache* cache) const {
  const int g = in_ch / 2;
  const int half = out_ch / 2;
  const auto t = x.cols();
  const Mat<Real> x_loc = x.topRows(g);
  const Mat<Real> x_glob = x.bottomRows(g);

  y.resize(out_ch, t);
  Mat<Real> tmp;
  Mat<Real> local;
  conv_ll.forward(x_loc, local);
  conv_gl.forward(x_glob, tmp);
  local += tmp;

  Mat<Real> global;
  conv_lg.forward(x_loc, global);
  Mat<Real> spectral_out;
  spectral.forward(x_glob, e_l, spectral_out, cache ? &cache->spec : nullptr);
  global += spectral_out;

  y.topRows(half) = local;
  y.bottomRows(half) = global;
}

template <typename Real>
void StfcBlock<Real>::backward(const Mat<Real>& x, const BandwidthEmbedding& e_l, const Cache& cache,
                               const Mat<Real>& gy, Mat<Real>& gx) {
  const int g = in_ch / 2;
  const int half = out_ch / 2;
  const Mat<Real> x_loc = x.topRows(g);
  const Mat<Real> x_glob = x.bottomRows(g);
  const Mat<Real> g_local = gy.topRows(half);
  const Mat<Real> g_global = gy.bottomRows(half);

  gx.resize(in_ch, x.cols());
  Mat<Real> ga, gb;
  conv_ll.backward(x_loc, g_local, &ga);
  conv_lg.backward(x_loc, g_global, &gb);
  gx.topRows(g) = ga + gb;

  conv_gl.backward(x_glob, g_local, &ga);
  spectral.backward(e_l, cache.spec, g_global, gb);
  gx.bottomRows(g) = ga + gb;
}

// --- ResidualLayer --------------------------------------------------------------

template <typename Real>
void ResidualLayer<Real>::resize(const ModelConfig& cfg) {
  channels = cfg.channels;
  lambda_proj.resize(channels, cfg.lambda_hidden);
  stfc.resize(2 * channels, channels, cfg.bsft_hidden, cfg.fft_size, cfg.hop);
  out_conv.resize(2 * channels, channels);
}

template <typename Real>
void ResidualLayer<Real>::forward(const Mat<Real>& x, const Vec<Real>& emb, const BandwidthEmbedding& e_l,
                                  Mat<Real>& res, Mat<Real>& skip_acc, Cache* cache) const {
  const int c = channels;
  Vec<Real> proj;
  lambda_proj.forward(emb, proj);
  Mat<Real> y = x;
  y.colwise() += proj;

  Mat<Real> stfc_out;
  stfc.forward(y, e_l, stfc_out, cache ? &cache->stfc_cache : nullptr);

  // Local and global outputs each split into filter/gate halves, paired by
  // concatenation: filter = [loc_f; glob_f], gate = [loc_g; glob_g].
  const int h = c / 2;
  Mat<Real> filt(c, y.cols()), gate(c, y.cols());
  filt.topRows(h) = stfc_out.middleRows(0, h);
  filt.bottomRows(h) = stfc_out.middleRows(c, h);
  gate.topRows(h) = stfc_out.middleRows(h, h);
  gate.bottomRows(h) = stfc_out.middleRows(c + h, h);

  Mat<Real> gated = (filt.array().tanh() * ((-gate.array()).exp() + Real(1)).inverse()).matrix();

  Mat<Real> oc;
  out_conv.forward(gated, oc);
  res = (x + oc.topRows(c)) * Real(M_SQRT1_2);
  skip_acc += oc.bottomRows(c);

  if (cache) {
    cache->y = std::move(y);
    cache->stfc_out = std::move(stfc_out);
    cache->gated = std::move(gated);
  }
}

template <typename Real>
void ResidualLayer<Real>::backward(const Mat<Real>& x, const Vec<Real>& emb, const BandwidthEmbedding& e_l,
                                   const Cache& cache, const Mat<Real>& g_res, const Mat<Real>& g_skip,
                                   Mat<Real>& gx, Vec<Real>& g_emb) {
  const int c = channels;
  const int h = c / 2;
  const auto t = x.cols();

  Mat<Real> g_oc(2 * c, t);
  g_oc.topRows(c) = g_res * Real(M_SQRT1_2);
  g_oc.bottomRows(c) = g_skip;

  Mat<Real> g_gated;
  out_conv.backward(cache.gated, g_oc, &g_gated);

  Mat<Real> filt(c, t), gate(c, t);
  filt.topRows(h) = cache.stfc_out.middleRows(0, h);
  filt.bottomRows(h) = cache.stfc_out.middleRows(c, h);
  gate.topRows(h) = cache.stfc_out.middleRows(h, h);
  gate.bottomRows(h) = cache.stfc_out.middleRows(c + h, h);

  const auto tf = filt.array().tanh().eval();
  const auto sg = ((-gate.array()).exp() + Real(1)).inverse().eval();
  Mat<Real> g_filt = (g_gated.array() * sg * (Real(1) - tf * tf)).matrix();
  Mat<Real> g_gate = (g_gated.array() * tf * sg * (Real(1) - sg)).matrix();

  Mat<Real> g_stfc(2 * c, t);
  g_stfc.middleRows(0, h) = g_filt.topRows(h);
  g_stfc.middleRows(h, h) = g_gate.topRows(h);
  g_stfc.middleRows(c, h) = g_filt.bottomRows(h);
  g_stfc.middleRows(c + h, h) = g_gate.bottomRows(h);

  Mat<Real> g_y;
  stfc.backward(cache.y, e_l, cache.stfc_cache, g_stfc, g_y);

  Vec<Real> g_proj = g_y.rowwise().sum();
  Vec<Real> g_emb_local;
  lambda_proj.backward(emb, g_proj, &g_emb_local);
  g_emb += g_emb_local;

  gx = g_y + g_res * Real(M_SQRT1_2);
}

// --- Model -----------------------------------------------------------------------

template <typename Real>
Model<Real>::Model(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  input_conv_.resize(cfg_.channels, 2);
  fc1_.resize(cfg_.lambda_hidden, cfg_.lambda_sin_dim);
  fc2_.resize(cfg_.lambda_hidden, cfg_.lambda_hidden);
  layers_.resize(static_cast<std::size_t>(cfg_.n_layers));
  for (auto& layer : layers_) layer.resize(cfg_);
  head1_.resize(cfg_.channels, cfg_.channels);
  head2_.resize(1, cfg_.channels);
  register_params();
}

template <typename Real>
void Model<Real>::register_params() {
  auto add = [this](const std::string& name, Mat<Real>& w, Mat<Real>& dw, std::vector<int> shape) {
    store_.push_back({name, w.data(), dw.data(), std::move(shape), static_cast<std::size_t>(w.size())});
  };
  auto addv = [this](const std::string& name, Vec<Real>& v, Vec<Real>& dv) {
    store_.push_back({name, v.data(), dv.data(), {static_cast<int>(v.size())}, static_cast<std::size_t>(v.size())});
  };
  auto add_conv1x1 = [&](const std::string& p, Conv1x1<Real>& c) {
    add(p + ".weight", c.w, c.dw, {static_cast<int>(c.w.rows()), static_cast<int>(c.w.cols())});
    addv(p + ".bias", c.b, c.db);
  };
  auto add_conv3 = [&](const std::string& p, Conv3<Real>& c) {
    add(p + ".weight", c.w, c.dw, {c.out_ch, c.in_ch, 3});
    addv(p + ".bias", c.b, c.db);
  };
  auto add_linear = [&](const std::string& p, Linear<Real>& l) {
    add(p + ".weight", l.w, l.dw, {static_cast<int>(l.w.rows()), static_cast<int>(l.w.cols())});
    addv(p + ".bias", l.b, l.db);
  };

  add_conv1x1("input_conv", input_conv_);
  add_linear("lambda_mlp.fc1", fc1_);
  add_linear("lambda_mlp.fc2", fc2_);
  for (int i = 0; i < cfg_.n_layers; ++i) {
    const std::string p = "layers." + std::to_string(i);
    add_linear(p + ".lambda_proj", layers_[i].lambda_proj);
    add_conv3(p + ".stfc.conv_ll", layers_[i].stfc.conv_ll);
    add_conv3(p + ".stfc.conv_gl", layers_[i].stfc.conv_gl);
    add_conv3(p + ".stfc.conv_lg", layers_[i].stfc.conv_lg);
    add_conv3(p + ".stfc.spectral.bsft_shared_conv", layers_[i].stfc.spectral.bsft_shared_conv);
    add_conv1x1(p + ".stfc.spectral.bsft_gamma_conv", layers_[i].stfc.spectral.bsft_gamma_conv);
    add_conv1x1(p + ".stfc.spectral.bsft_beta_conv", layers_[i].stfc.spectral.bsft_beta_conv);
    add_conv1x1(p + ".stfc.spectral.mix_conv", layers_[i].stfc.spectral.mix_conv);
    add_conv1x1(p + ".out_conv", layers_[i].out_conv);
  }
  add_conv1x1("head.conv1", head1_);
  add_conv1x1("head.conv2", head2_);
}

template <typename Real>
void Model<Real>::init_params(Rng& rng) {
  for (auto& p : store_) {
    const bool is_bias = p.shape.size() == 1;
    const bool is_final = p.name.rfind("head.conv2", 0) == 0;
    if (is_bias || is_final) {
      std::fill(p.value, p.value + p.size, Real(0));
      continue;
    }
    std::size_t fan_in = 1;
    for (std::size_t d = 1; d < p.shape.size(); ++d) fan_in *= static_cast<std::size_t>(p.shape[d]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < p.size; ++i) p.value[i] = static_cast<Real>(rng.uniform(-bound, bound));
  }
}

template <typename Real>
std::size_t Model<Real>::param_count() const {
  std::size_t n = 0;
  for (const auto& p : store_) n += p.size;
  return n;
}

template <typename Real>
void Model<Real>::zero_grads() {
  for (auto& p : store_) std::fill(p.grad, p.grad + p.size, Real(0));
}

template <typename Real>
std::vector<Real> Model<Real>::forward(std::span<const Real> z_t, std::span<const Real> x_l,
                                       const BandwidthEmbedding& e_l, double lambda, Cache* cache) {
  if (z_t.size() != x_l.size()) throw std::invalid_argument("Model::forward: length mismatch");
  if (z_t.empty()) throw std::invalid_argument("Model::forward: empty input");
  if (e_l.freq_bins != cfg_.freq_bins())
    throw std::invalid_argument("Model::forward: bandwidth embedding bin count mismatch");

  const std::size_t raw = z_t.size();
  const int hop = cfg_.hop;
  const int padded = static_cast<int>((raw + hop - 1) / hop * hop);

  Mat<Real> input = Mat<Real>::Zero(2, padded);
  for (std::size_t i = 0; i < raw; ++i) {
    input(0, static_cast<Eigen::Index>(i)) = z_t[i];
    input(1, static_cast<Eigen::Index>(i)) = x_l[i];
  }

  const std::vector<double> enc = sinusoidal_lambda_encoding(lambda, cfg_.lambda_sin_dim);
  Vec<Real> sin_enc(cfg_.lambda_sin_dim);
  for (int i = 0; i < cfg_.lambda_sin_dim; ++i) sin_enc[i] = static_cast<Real>(enc[i]);
  Vec<Real> fc1_pre, fc2_pre;
  fc1_.forward(sin_enc, fc1_pre);
  Vec<Real> fc1_post = swish(fc1_pre);
  fc2_.forward(fc1_post, fc2_pre);
  Vec<Real> emb = swish(fc2_pre);

  Mat<Real> stem;
  input_conv_.forward(input, stem);

  Mat<Real> skip_acc = Mat<Real>::Zero(cfg_.channels, padded);
  Mat<Real> cur = stem;
  if (cache) {
    cache->valid = false;
    cache->raw_length = raw;
    cache->padded_length = padded;
    cache->e_l = e_l;
    cache->sin_enc = sin_enc;
    cache->fc1_pre = fc1_pre;
    cache->fc1_post = fc1_post;
    cache->fc2_pre = fc2_pre;
    cache->emb = emb;
    cache->input = input;
    cache->stem = stem;
    cache->layer_inputs.assign(static_cast<std::size_t>(cfg_.n_layers), Mat<Real>());
    cache->layers.assign(static_cast<std::size_t>(cfg_.n_layers), typename ResidualLayer<Real>::Cache{});
  }
  Mat<Real> next;
  for (int i = 0; i < cfg_.n_layers; ++i) {
    if (cache) cache->layer_inputs[i] = cur;
    layers_[i].forward(cur, emb, e_l, next, skip_acc, cache ? &cache->layers[i] : nullptr);
    cur.swap(next);
    assert(cur.allFinite());
  }

  skip_acc *= Real(1.0 / std::sqrt(static_cast<double>(cfg_.n_layers)));
  Mat<Real> head1_pre;
  head1_.forward(skip_acc, head1_pre);
  Mat<Real> head1_post = swish(head1_pre);
  Mat<Real> out;
  head2_.forward(head1_post, out);

  if (cache) {
    cache->skip_sum = std::move(skip_acc);
    cache->head1_pre = std::move(head1_pre);
    cache->head1_post = std::move(head1_post);
    cache->valid = true;
  }

  std::vector<Real> eps_hat(raw);
  for (std::size_t i = 0; i < raw; ++i) eps_hat[i] = out(0, static_cast<Eigen::Index>(i));
  return eps_hat;
}

template <typename Real>
void Model<Real>::backward(const Cache& cache, std::span<const Real> d_eps_hat) {
  if (!cache.valid) throw upwave::InvalidState("Model::backward: no cached forward pass");
  if (d_eps_hat.size() != cache.raw_length)
    throw std::invalid_argument("Model::backward: gradient length mismatch");

  const int padded = cache.padded_length;
  Mat<Real> g_out = Mat<Real>::Zero(1, padded);
  for (std::size_t i = 0; i < cache.raw_length; ++i) g_out(0, static_cast<Eigen::Index>(i)) = d_eps_hat[i];

  Mat<Real> g_h1post;
  head2_.backward(cache.head1_post, g_out, &g_h1post);
  Mat<Real> g_h1pre = swish_backward<Real>(cache.head1_pre, g_h1post);
  Mat<Real> g_skipsum;
  head1_.backward(cache.skip_sum, g_h1pre, &g_skipsum);
  const Mat<Real> g_skip_each = g_skipsum * Real(1.0 / std::sqrt(static_cast<double>(cfg_.n_layers)));

  Mat<Real> g_res = Mat<Real>::Zero(cfg_.channels, padded);
  Vec<Real> g_emb = Vec<Real>::Zero(cfg_.lambda_hidden);
  Mat<Real> gx;
  for (int i = cfg_.n_layers - 1; i >= 0; --i) {
    layers_[i].backward(cache.layer_inputs[i], cache.emb, cache.e_l, cache.layers[i], g_res, g_skip_each, gx,
                        g_emb);
    g_res.swap(gx);
  }
  input_conv_.backward(cache.input, g_res, nullptr);

  Vec<Real> g_fc2pre = swish_backward<Real>(cache.fc2_pre, g_emb);
  Vec<Real> g_fc1post;
  fc2_.backward(cache.fc1_post, g_fc2pre, &g_fc1post);
  Vec<Real> g_fc1pre = swish_backward<Real>(cache.fc1_pre, g_fc1post);
  fc1_.backward(cache.sin_enc, g_fc1pre, nullptr);
}

std::size_t param_count(const ModelConfig& cfg) {
  Model<float> probe(cfg);
  return probe.param_count();
}

template struct Conv1x1<float>;
template struct Conv1x1<double>;
template struct Conv3<float>;
template struct Conv3<double>;
template struct Linear<float>;
template struct Linear<double>;
template struct SpectralTransform<float>;
template struct SpectralTransform<double>;
template struct StfcBlock<float>;
template struct StfcBlock<double>;
template struct ResidualLayer<float>;
template struct ResidualLayer<double>;
template class Model<float>;
template class Model<double>;

}  // namespace upwave::net
