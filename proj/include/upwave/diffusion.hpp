// Copyright 2026 The upwave authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "upwave/rng.hpp"

namespace upwave::diffusion {

// Variance-preserving noise schedule lambda(t) = -2 log tan(a t + b) with
// alpha = cos(a t + b), sigma = sin(a t + b). The endpoints pin the log-SNR
// range: lambda(0) = lambda0, lambda(1) = lambda1.
struct ScheduleParams {
  double lambda0 = 20.0;
  double lambda1 = -20.0;
  double a = 0.0;
  double b = 0.0;

  static ScheduleParams make(double lambda0 = 20.0, double lambda1 = -20.0);
};

struct TimePoint {
  double t = 0.0;
  double lambda = 0.0;
  double alpha = 1.0;
  double sigma = 0.0;
};

// Log-SNR values visited in sampling order (noisiest first), with a terminal
// hop to lambda0 for the final clean read-out.
struct InferenceSchedule {
  std::vector<double> lambdas = {-2.6, -0.8, 2.0, 6.4, 9.8, 12.9, 14.4, 17.2};
  double terminal_lambda = 20.0;

  void validate() const;
};

TimePoint schedule_at(const ScheduleParams& p, double t);

// alpha = sqrt(sigmoid(lambda)), sigma = sqrt(sigmoid(-lambda)); stable for
// |lambda| up to ~40.
std::pair<double, double> lambda_to_coeffs(double lambda);

// z_t = alpha x + sigma eps, elementwise.
std::vector<double> diffuse(std::span<const double> x, const TimePoint& tp, std::span<const double> eps);

// Stratified times t_i = mod(u + i/k, 1), i = 1..k.
std::vector<double> sample_times(double u, int k);

double loss_l1(std::span<const double> eps, std::span<const double> eps_hat);

// One DDIM update from log-SNR lam_t to the cleaner lam_s (> lam_t):
//   x_hat = (z_t - sigma_t eps_hat) / alpha_t;  z_s = alpha_s x_hat + sigma_s eps_hat.
std::vector<double> ddim_step(std::span<const double> z_t, std::span<const double> eps_hat, double lam_t,
                              double lam_s);

// Noise predictor interface: eps_hat = model(z, lambda). Conditioning inputs
// (x_l, bandwidth embedding) are bound by the caller.
using NoisePredictor = std::function<std::vector<double>(std::span<const double> z, double lambda)>;

// DDIM sampling through the schedule; exactly sched.lambdas.size() model
// evaluations; returns the final x_theta estimate.
std::vector<double> sample(const NoisePredictor& model, std::size_t length, const InferenceSchedule& sched,
                           Rng& rng);

// Probability-flow ODE coefficients in closed form:
//   f = d log(alpha)/dt = -a tan(a t + b),   g^2 = d(sigma^2)/dt - 2 f sigma^2 = 2 a tan(a t + b).
std::pair<double, double> ode_coeffs(const ScheduleParams& p, double t);

}  // namespace upwave::diffusion
