// Copyright 2026 The upwave authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "upwave/fft.hpp"
#include "upwave/rng.hpp"

namespace upwave::net {

struct ModelConfig {
  int n_layers = 15;
  int channels = 64;  // C; split in half between the local and global branches
  int fft_size = 1024;
  int hop = 256;
  int lambda_sin_dim = 128;  // sinusoidal encoding width
  int lambda_hidden = 512;   // width of the two embedding affine layers
  int bsft_hidden = 64;      // hidden width of the gamma/beta generator
  int target_sr = 48000;

  int freq_bins() const { return fft_size / 2 + 1; }
  void validate() const;
};

// One-hot 2 x F map; row 0 marks bins present in the low-resolution input,
// row 1 marks bins the model must generate. Row 0 is a prefix.
struct BandwidthEmbedding {
  std::vector<float> map;  // row-major, 2 rows x freq_bins
  int freq_bins = 0;
  int cutoff_bin = 0;

  float at(int row, int bin) const { return map[static_cast<std::size_t>(row) * freq_bins + bin]; }
};

BandwidthEmbedding bandwidth_embedding(int input_sr, const ModelConfig& cfg);

// First dim/2 entries sin, last dim/2 cos, of (lambda/2) at geometrically
// spaced frequencies whose longest period covers lambda in [-25, 25].
std::vector<double> sinusoidal_lambda_encoding(double lambda, int dim);

template <typename Real>
struct ParamRef {
  std::string name;
  Real* value = nullptr;
  Real* grad = nullptr;
  std::vector<int> shape;
  std::size_t size = 0;
};

template <typename Real>
using ParameterStore = std::vector<ParamRef<Real>>;

template <typename Real>
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

// ---------------------------------------------------------------------------
// Building blocks. Each owns its parameters and matching gradient buffers;
// backward() accumulates into the gradients and returns/; fills the input
// gradient. Registration in a ParameterStore is done by the owning Model.
// ---------------------------------------------------------------------------

template <typename Real>
struct Conv1x1 {
  Mat<Real> w, dw;  // (out, in)
  Vec<Real> b, db;

  void resize(int out_ch, int in_ch);
  void forward(const Mat<Real>& x, Mat<Real>& y) const;
  void backward(const Mat<Real>& x, const Mat<Real>& gy, Mat<Real>* gx);
};

// Kernel-3 convolution along the column axis with zero padding. Weights are
// stored as one (out, 3*in) matrix; tap d acts on columns shifted by d - 1.
template <typename Real>
struct Conv3 {
  Mat<Real> w, dw;  // (out, 3*in)
  Vec<Real> b, db;
  int in_ch = 0, out_ch = 0;

  void resize(int out_channels, int in_channels);
  void forward(const Mat<Real>& x, Mat<Real>& y) const;
  void backward(const Mat<Real>& x, const Mat<Real>& gy, Mat<Real>* gx);
};

template <typename Real>
struct Linear {
  Mat<Real> w, dw;
  Vec<Real> b, db;

  void resize(int out_dim, int in_dim);
  void forward(const Vec<Real>& x, Vec<Real>& y) const;
  void backward(const Vec<Real>& x, const Vec<Real>& gy, Vec<Real>* gx);
};

// Spectral half of an STFC: per-channel STFT, real/imag channel stacking,
// bandwidth-conditioned affine modulation, swish, 1x1 mixing, inverse STFT.
template <typename Real>
struct SpectralTransform {
  int in_ch = 0, out_ch = 0;
  int fft_size = 1024, hop = 256;
  Conv3<Real> bsft_shared_conv;   // 2 -> hidden, along frequency
  Conv1x1<Real> bsft_gamma_conv;  // hidden -> 2*in_ch
  Conv1x1<Real> bsft_beta_conv;
  Conv1x1<Real> mix_conv;  // 2*in_ch -> 2*out_ch

  struct Cache {
    Mat<Real> spec;          // stacked re/im after the STFT, (2*in_ch, F*frames)
    Mat<Real> gamma, beta;   // (2*in_ch, F)
    Mat<Real> shared_pre;    // BSFT generator pre-activation, (hidden, F)
    Mat<Real> shared_post;   // after swish
    Mat<Real> bsft_pre;      // gamma (.) spec + beta, before swish
    Mat<Real> bsft_post;     // after swish; input of mix_conv
    int frames = 0;
    int length = 0;
  };

  void resize(int out_channels, int in_channels, int bsft_hidden, int fft, int hop_size);
  void forward(const Mat<Real>& x, const BandwidthEmbedding& e_l, Mat<Real>& y, Cache* cache) const;
  void backward(const BandwidthEmbedding& e_l, const Cache& cache, const Mat<Real>& gy, Mat<Real>& gx);

  std::shared_ptr<RealFft<Real>> fft;  // shared scratch plan for this transform size
  std::vector<Real> window;
};

// Four-path fast-Fourier-convolution fusion: the input splits in half into a
// local and a global stream; kernel-3 convolutions carry local->local,
// global->local and local->global, the spectral transform carries
// global->global. Outputs concatenate back to out_ch channels.
template <typename Real>
struct StfcBlock {
  int in_ch = 0, out_ch = 0;
  Conv3<Real> conv_ll, conv_gl, conv_lg;
  SpectralTransform<Real> spectral;

  struct Cache {
    typename SpectralTransform<Real>::Cache spec;
  };

  void resize(int out_channels, int in_channels, int bsft_hidden, int fft, int hop_size);
  void forward(const Mat<Real>& x, const BandwidthEmbedding& e_l, Mat<Real>& y, Cache* cache) const;
  void backward(const Mat<Real>& x, const BandwidthEmbedding& e_l, const Cache& cache, const Mat<Real>& gy,
                Mat<Real>& gx);
};

template <typename Real>
struct ResidualLayer {
  int channels = 0;
  Linear<Real> lambda_proj;  // embedding -> C, broadcast over time
  StfcBlock<Real> stfc;      // C -> 2C
  Conv1x1<Real> out_conv;    // C -> 2C, split into residual and skip

  struct Cache {
    Mat<Real> y;         // input + broadcast lambda projection
    Mat<Real> stfc_out;  // (2C, T)
    Mat<Real> gated;     // tanh(filter) (.) sigmoid(gate), (C, T)
    typename StfcBlock<Real>::Cache stfc_cache;
  };

  void resize(const ModelConfig& cfg);
  // Returns residual output in `res` ((x + residual)/sqrt(2)) and adds the
  // skip half into `skip_acc`.
  void forward(const Mat<Real>& x, const Vec<Real>& emb, const BandwidthEmbedding& e_l, Mat<Real>& res,
               Mat<Real>& skip_acc, Cache* cache) const;
  // g_res is the gradient w.r.t. the residual output, g_skip w.r.t. this
  // layer's skip contribution; returns the input gradient and accumulates the
  // embedding gradient.
  void backward(const Mat<Real>& x, const Vec<Real>& emb, const BandwidthEmbedding& e_l, const Cache& cache,
                const Mat<Real>& g_res, const Mat<Real>& g_skip, Mat<Real>& gx, Vec<Real>& g_emb);
};

// The noise-prediction network eps_theta(z_t, x_l, e_l, lambda).
template <typename Real>
class Model {
 public:
  explicit Model(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }

  // Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] weights, zero biases, and a
  // zero-initialized final convolution so eps_hat == 0 at step 0.
  void init_params(Rng& rng);

  ParameterStore<Real>& params() { return store_; }
  const ParameterStore<Real>& params() const { return store_; }
  std::size_t param_count() const;

  struct Cache;

  // z_t and x_l must have equal length; inputs are zero-padded internally to
  // a hop multiple and the output is trimmed back.
  std::vector<Real> forward(std::span<const Real> z_t, std::span<const Real> x_l,
                            const BandwidthEmbedding& e_l, double lambda, Cache* cache = nullptr);

  void zero_grads();

  // Accumulates parameter gradients for d(loss)/d(eps_hat). Requires the
  // cache filled by a prior forward() call.
  void backward(const Cache& cache, std::span<const Real> d_eps_hat);

  struct Cache {
    bool valid = false;
    std::size_t raw_length = 0;
    int padded_length = 0;
    BandwidthEmbedding e_l;
    Vec<Real> sin_enc;
    Vec<Real> fc1_pre, fc1_post, fc2_pre, emb;
    Mat<Real> input;      // (2, T)
    Mat<Real> stem;       // after input_conv
    std::vector<Mat<Real>> layer_inputs;
    std::vector<typename ResidualLayer<Real>::Cache> layers;
    Mat<Real> skip_sum;   // scaled by 1/sqrt(n_layers); input of head1
    Mat<Real> head1_pre;  // before swish
    Mat<Real> head1_post;
  };

 private:
  void register_params();

  ModelConfig cfg_;
  Conv1x1<Real> input_conv_;
  Linear<Real> fc1_, fc2_;
  std::vector<ResidualLayer<Real>> layers_;
  Conv1x1<Real> head1_, head2_;
  ParameterStore<Real> store_;
};

// Learnable scalar count at a given configuration.
std::size_t param_count(const ModelConfig& cfg);

extern template struct Conv1x1<float>;
extern template struct Conv1x1<double>;
extern template struct Conv3<float>;
extern template struct Conv3<double>;
extern template struct Linear<float>;
extern template struct Linear<double>;
extern template struct SpectralTransform<float>;
extern template struct SpectralTransform<double>;
extern template struct StfcBlock<float>;
extern template struct StfcBlock<double>;
extern template struct ResidualLayer<float>;
extern template struct ResidualLayer<double>;
extern template class Model<float>;
extern template class Model<double>;

}  // namespace upwave::net
