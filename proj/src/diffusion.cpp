// Copyright 2026 The upwave authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "upwave/diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace upwave::diffusion {

ScheduleParams ScheduleParams::make(double lambda0, double lambda1) {
  if (!(lambda0 > lambda1)) throw std::invalid_argument("ScheduleParams: lambda0 must exceed lambda1");
  ScheduleParams p;
  p.lambda0 = lambda0;
  p.lambda1 = lambda1;
  p.b = std::atan(std::exp(-lambda0 / 2.0));
  p.a = std::atan(std::exp(-lambda1 / 2.0)) - p.b;
  return p;
}

void InferenceSchedule::validate() const {
  if (lambdas.empty()) throw std::invalid_argument("InferenceSchedule: empty lambda list");
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] > lambdas[i - 1]))
      throw std::invalid_argument("InferenceSchedule: lambdas must be strictly increasing");
  if (!(terminal_lambda > lambdas.back()))
    throw std::invalid_argument("InferenceSchedule: terminal lambda must exceed the last entry");
}

TimePoint schedule_at(const ScheduleParams& p, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("schedule_at: t must be in [0, 1]");
  const double theta = p.a * t + p.b;
  TimePoint tp;
  tp.t = t;
  tp.lambda = -2.0 * std::log(std::tan(theta));
  tp.alpha = std::cos(theta);
  tp.sigma = std::sin(theta);
  return tp;
}

std::pair<double, double> lambda_to_coeffs(double lambda) {
  if (!std::isfinite(lambda)) throw std::invalid_argument("lambda_to_coeffs: lambda must be finite");
  // sigmoid via exp of the negative magnitude so neither branch overflows
  const double e = std::exp(-std::abs(lambda));
  const double sig_pos = 1.0 / (1.0 + e);  // sigmoid(|lambda|)
  const double sig_neg = e / (1.0 + e);    // sigmoid(-|lambda|)
  const double alpha_sq = lambda >= 0.0 ? sig_pos : sig_neg;
  const double sigma_sq = lambda >= 0.0 ? sig_neg : sig_pos;
  return {std::sqrt(alpha_sq), std::sqrt(sigma_sq)};
}

std::vector<double> diffuse(std::span<const double> x, const TimePoint& tp, std::span<const double> eps) {
  if (x.size() != eps.size()) throw std::invalid_argument("diffuse: shape mismatch");
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = tp.alpha * x[i] + tp.sigma * eps[i];
  return z;
}

std::vector<double> sample_times(double u, int k) {
  if (k < 1) throw std::invalid_argument("sample_times: k must be >= 1");
  std::vector<double> t(static_cast<std::size_t>(k));
  for (int i = 1; i <= k; ++i) {
    double v = u + static_cast<double>(i) / k;
    v -= std::floor(v);
    t[i - 1] = v;
  }
  return t;
}

double loss_l1(std::span<const double> eps, std::span<const double> eps_hat) {
  if (eps.size() != eps_hat.size()) throw std::invalid_argument("loss_l1: shape mismatch");
  if (eps.empty()) throw std::invalid_argument("loss_l1: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) sum += std::abs(eps[i] - eps_hat[i]);
  return sum / static_cast<double>(eps.size());
}

std::vector<double> ddim_step(std::span<const double> z_t, std::span<const double> eps_hat, double lam_t,
                              double lam_s) {
  if (z_t.size() != eps_hat.size()) throw std::invalid_argument("ddim_step: shape mismatch");
  if (!(lam_s > lam_t)) throw std::invalid_argument("ddim_step: lam_s must exceed lam_t");
  const auto [alpha_t, sigma_t] = lambda_to_coeffs(lam_t);
  const auto [alpha_s, sigma_s] = lambda_to_coeffs(lam_s);
  std::vector<double> z_s(z_t.size());
  for (std::size_t i = 0; i < z_t.size(); ++i) {
    const double x_hat = (z_t[i] - sigma_t * eps_hat[i]) / alpha_t;
    z_s[i] = alpha_s * x_hat + sigma_s * eps_hat[i];
  }
  return z_s;
}

std::vector<double> sample(const NoisePredictor& model, std::size_t length, const InferenceSchedule& sched,
                           Rng& rng) {
  sched.validate();
  std::vector<double> z(length);
  for (double& v : z) v = rng.normal();

  const std::size_t n = sched.lambdas.size();
  std::vector<double> x_hat(length);
  for (std::size_t i = 0; i < n; ++i) {
    const double lam = sched.lambdas[i];
    const std::vector<double> eps_hat = model(z, lam);
    if (eps_hat.size() != length) throw std::runtime_error("sample: model returned a wrong-sized prediction");
    const auto [alpha, sigma] = lambda_to_coeffs(lam);
    for (std::size_t j = 0; j < length; ++j) x_hat[j] = (z[j] - sigma * eps_hat[j]) / alpha;
    if (i + 1 < n) {
      const auto [alpha_s, sigma_s] = lambda_to_coeffs(sched.lambdas[i + 1]);
      for (std::size_t j = 0; j < length; ++j) z[j] = alpha_s * x_hat[j] + sigma_s * eps_hat[j];
    }
  }
  // The terminal hop to lambda0 would only rescale x_hat by ~sigma(lambda0);
  // the clean estimate itself is returned.
  return x_hat;
}

std::pair<double, double> ode_coeffs(const ScheduleParams& p, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("ode_coeffs: t must be in [0, 1]");
  const double tn = std::tan(p.a * t + p.b);
  return {-p.a * tn, 2.0 * p.a * tn};
}

}  // namespace upwave::diffusion
