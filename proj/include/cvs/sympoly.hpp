#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cvs/spectra.hpp"

namespace cvs {

// log(exp(a) + exp(b)), with -inf as the log of zero.
double log_add(double a, double b);
// log(exp(a) - exp(b)) for a >= b; -inf when a == b.
double log_sub(double a, double b);

// Elementary symmetric polynomials of every prefix of a positive sequence,
// stored as logarithms:
//   log_value(i, k) = log p_k(lambda_1, ..., lambda_i),  0 <= i <= M, 0 <= k <= N.
// Built with p_k^{(i)} = p_k^{(i-1)} + lambda_i p_{k-1}^{(i-1)} in O(MN).
class EspTable {
 public:
  EspTable(std::span<const double> lambda, std::size_t order);

  std::size_t size() const { return M_; }
  std::size_t order() const { return N_; }

  // Returns -inf for k > i (no subsets) and for k > order().
  double log_value(std::size_t i, std::size_t k) const;
  double value(std::size_t i, std::size_t k) const;
  // Over the whole sequence.
  double log_p(std::size_t k) const { return log_value(M_, k); }

 private:
  std::size_t M_;
  std::size_t N_;
  std::vector<double> logp_;  // (M+1) x (N+1), row-major
};

EspTable esp_table(std::span<const double> lambda, std::size_t order);

// Closed-form volume-sampling expectations for a fixed spectrum and N.
//
// With p_k = p_k(sigma_1..sigma_M) and sigma^{-m} the spectrum with index m
// removed:
//   E tau_m   = sigma_m p_{N-1}(sigma^{-m}) / p_N(sigma)
//   eps_m     = sigma_m p_N(sigma^{-m}) / p_N(sigma) = sigma_m (1 - E tau_m)
//
// The leave-one-out polynomials come from the downdate
// q_k = p_k - sigma_m q_{k-1}; when a step keeps less than 1e-6 of p_k, or the
// propagated relative error of the downdate exceeds 1e-12, the table is
// rebuilt without index m instead.
class VsExpectations {
 public:
  VsExpectations(std::span<const double> sigma, std::size_t N);
  VsExpectations(const SpectralModel& model, std::size_t N);

  std::size_t size() const { return sigma_.size(); }
  std::size_t order() const { return N_; }
  const EspTable& table() const { return table_; }

  // log Z_N = log N! + log p_N(sigma).
  double log_normalization() const;

  double leverage(std::size_t m) const;
  double eig_error(std::size_t m) const;
  // sigma_m (1 - E tau_m); the second route used for cross-checking.
  double eig_error_via_leverage(std::size_t m) const;
  // 1 - E tau_m computed without cancellation.
  double leverage_complement(std::size_t m) const;

  struct LeaveOneOut {
    double log_p_prev;  // log p_{N-1}(sigma^{-m})
    double log_p;       // log p_N(sigma^{-m})
    bool rebuilt;       // downdate rejected, table recomputed
  };
  LeaveOneOut leave_one_out(std::size_t m) const;

  // prod_{u in U} sigma_u / p_N(sigma), U given as 1-based indices.
  double mixture_weight(std::span<const std::size_t> subset) const;
  // Weight of U = {1..N}.
  double delta() const;

 private:
  void check_index(std::size_t m) const;

  std::vector<double> sigma_;
  std::size_t N_;
  EspTable table_;
};

double normalization_log_ZN(const SpectralModel& model, std::size_t N);
double expected_leverage(const SpectralModel& model, std::size_t m, std::size_t N);
// Always 0 for m1 != m2; throws DomainError on the diagonal.
double expected_cross_leverage(std::size_t m1, std::size_t m2);
double expected_eig_error(const SpectralModel& model, std::size_t m, std::size_t N);
// sum_m g_m^2 eps_m for g in the L2 basis with support inside the truncation.
double expected_embedding_error(const SpectralModel& model, const CoefficientVector& g,
                                std::size_t N);
double mixture_weight(const SpectralModel& model, std::span<const std::size_t> subset,
                      std::size_t N);
double delta_N(const SpectralModel& model, std::size_t N);
// sigma_N / r_N with r_N = sum_{N < m <= M} sigma_m over the truncated spectrum.
double delta_N_bound(const SpectralModel& model, std::size_t N);

}  // namespace cvs
