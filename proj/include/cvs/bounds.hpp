#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "cvs/spectra.hpp"

namespace cvs {

struct BetaResult {
  double value = 0.0;
  std::size_t argmin = 0;  // minimizing M in [2, N]
};

// beta_N = min_{M in [2, N]} r_M / ((N - M + 1) sigma_N), r_M = sum_{m > M} sigma_m,
// taken over the untruncated family with the upper end of the tail bracket.
BetaResult beta_N(const SpectralModel& model, std::size_t N);

// sigma_N (1 + beta_N); dominates eps_1.
double thm1_upper(const SpectralModel& model, std::size_t N);

// N-width lower bound sigma_{N+1} on the worst-case squared error of any
// N-node design.
double nwidth_lower_bound(const SpectralModel& model, std::size_t N);

// Uniform bound on beta_N:
//   SobolevPaper(s)  (1 + 1/(2s-1)) (1 + 1/(2s-1))^{2s-1}   (tends to e as s grows)
//   Geometric(alpha) alpha / (1 - alpha)
// Throws UnsupportedFamily otherwise.
double prop2_constant(const SpectralModel& model);

// ||Sigma^{-r} mu||_F^2 = sum_m sigma_m^{-2r} <mu, e_m^F>^2.
double sobolev_norm_sq(const SpectralModel& model, const CoefficientVector& mu, double r);

// (2 + B) sigma_N^{2r} ||Sigma^{-r} mu||_F^2 for r in [0, 1/2]. B defaults to
// prop2_constant(model).
double thm2_bound(const SpectralModel& model, double r, double sobolev_norm, std::size_t N,
                  std::optional<double> B = std::nullopt);

// (1 + B) sum_{m <= N} (sigma_N / sigma_m) <mu, e_m^F>^2 + sum_{m > N} <mu, e_m^F>^2.
// Homogeneous of degree two in mu, so no normalization is needed.
double delayed_bound(const SpectralModel& model, const CoefficientVector& mu, std::size_t N,
                     std::optional<double> B = std::nullopt);

struct BoundReport {
  std::size_t N = 0;
  double beta_N = 0.0;
  std::size_t argmin_M = 0;
  double upper_bound_thm1 = 0.0;
  double lower_bound_nwidth = 0.0;
  std::optional<double> prop2_constant;
  Interval tail_rN;
  double epsilon_1 = 0.0;  // closed form at the model's truncation
};

BoundReport bound_report(const SpectralModel& model, std::size_t N);

}  // namespace cvs
