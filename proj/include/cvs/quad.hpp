#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "cvs/gram.hpp"
#include "cvs/spectra.hpp"

namespace cvs {

// Kernel quadrature for integrals of the form int f g domega with optimal
// weights w = K(x)^{-1} mu_g(x).
class QuadratureRule {
 public:
  QuadratureRule(const SpectralModel& model, Design design, CoefficientVector g);

  const Design& design() const { return system_.design(); }
  const Eigen::VectorXd& weights() const { return weights_; }
  const CoefficientVector& target() const { return g_; }
  const InterpolationSystem& system() const { return system_; }

  // sum_i w_i f(x_i).
  double estimate(const CoefficientVector& f) const;
  // E(mu_g; x)^2, the squared interpolation error of the embedding.
  double embedding_error_sq() const { return embedding_error_sq_; }

 private:
  InterpolationSystem system_;
  CoefficientVector g_;
  Eigen::VectorXd weights_;
  double embedding_error_sq_;
};

double quadrature_estimate(const QuadratureRule& rule, const CoefficientVector& f);

// int f g domega = sum_n f_n g_n, both read in the L2 basis.
double exact_integral(const SpectralModel& model, const CoefficientVector& f,
                      const CoefficientVector& g);

// E_VS(int f g - sum w_i f(x_i)) = sum_n f_n g_n (1 - E tau_n). Inputs must be
// supported inside the truncation; anything else is rejected.
double bias_closed_form(const SpectralModel& model, const CoefficientVector& f,
                        const CoefficientVector& g, std::size_t N);

// ||f||_F E(mu_g; x): dominates |int f g - sum w_i f(x_i)| for every f of that norm.
double uniform_error_bound(const SpectralModel& model, const Design& design,
                           const CoefficientVector& g, double f_norm);
double uniform_error_bound(const QuadratureRule& rule, double f_norm);

}  // namespace cvs
