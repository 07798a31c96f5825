#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "cvs/spectra.hpp"

namespace cvs {

enum class Origin { ExactSampler, Mcmc, Iid, Manual };

std::string to_string(Origin origin);
Origin origin_from_string(const std::string& s);

// Ordered nodes in [0,1]. Order is kept as sampled.
struct Design {
  std::vector<double> nodes;
  Origin origin = Origin::Manual;

  std::size_t size() const { return nodes.size(); }
  bool has_duplicates() const;
};

// Cholesky factorization of a Gram matrix.
//
// Jitter policy: try the bare matrix, then add 1e-12 * mean(diag) to the
// diagonal and escalate by x10 up to 1e-6 * mean(diag). If every attempt
// fails the design is reported as SingularDesign.
class GramFactor {
 public:
  explicit GramFactor(Eigen::MatrixXd K);

  const Eigen::MatrixXd& matrix() const { return K_; }
  // Relative jitter actually applied (multiple of the mean diagonal), 0 if none.
  double jitter() const { return jitter_; }
  double log_det() const { return log_det_; }
  const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return llt_.solve(b); }
  // L^{-1} B, so that (L^{-1}a).(L^{-1}b) = a^T K^{-1} b.
  Eigen::MatrixXd whiten(const Eigen::MatrixXd& B) const;

 private:
  Eigen::MatrixXd K_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_ = 0.0;
  double log_det_ = 0.0;
};

// e_m(x_i) for every node (rows) and m = 1..modes (columns).
Eigen::MatrixXd feature_matrix(const SpectralModel& model, std::span<const double> nodes,
                               std::size_t modes);
// K(x) = (k(x_i, x_j)) for the truncated Mercer kernel.
Eigen::MatrixXd gram_matrix(const SpectralModel& model, std::span<const double> nodes);

GramFactor gram(const SpectralModel& model, const Design& design);

// A value that must be nonnegative, with roundoff negatives in
// [-1e-9 * scale, 0) clamped to zero. Anything more negative raises
// ConsistencyError.
struct ClampedValue {
  double value = 0.0;
  bool clamped = false;
};

struct Lemma2Result {
  double value = 0.0;     // leverage-score decomposition
  double direct = 0.0;    // ||mu||^2 - mu(x)^T K^{-1} mu(x)
  double residual = 0.0;  // value - direct
};

// Everything that depends on one (model, design) pair: the factorized Gram
// matrix, the node features, and the quantities built from them.
class InterpolationSystem {
 public:
  InterpolationSystem(const SpectralModel& model, Design design);

  const SpectralModel& model() const { return model_; }
  const Design& design() const { return design_; }
  const GramFactor& factor() const { return factor_; }
  // N x M matrix of e_m(x_i).
  const Eigen::MatrixXd& features() const { return features_; }

  // w = K^{-1} mu(x).
  Eigen::VectorXd optimal_weights(const Eigen::VectorXd& mu_values) const;

  // <mu, k(x_i, .)>_F for each node. Equals mu(x_i) when mu lives in the span
  // of the first M modes; modes beyond the truncation are orthogonal to every
  // kernel translate.
  Eigen::VectorXd reproduce(const CoefficientVector& mu) const;

  // ||mu - Pi mu||_F^2 = ||mu||_F^2 - mu(x)^T K^{-1} mu(x).
  ClampedValue interpolation_error_sq(const CoefficientVector& mu) const;

  // tau_m = e_m^F(x)^T K^{-1} e_m^F(x).
  double leverage(std::size_t m) const;
  double cross_leverage(std::size_t m1, std::size_t m2) const;
  // (tau_{m1,m2}) for m1, m2 in 1..modes.
  Eigen::MatrixXd leverage_matrix(std::size_t modes) const;

  // p(y; x) = sqrt(k(y,y) - k_x(y)^T K^{-1} k_x(y)).
  ClampedValue power_function(double y) const;
  ClampedValue power_function_sq(double y) const;

  Lemma2Result lemma2_decomposition(const CoefficientVector& g, std::size_t mode_cutoff) const;

  // sup over ||g|| <= 1 supported on modes 1..modes of E(mu_g; x)^2, i.e. the
  // top eigenvalue of D^{1/2} (I - T) D^{1/2} with T the leverage matrix.
  double worst_case_embedding_error(std::size_t modes) const;

 private:
  void check_mode(std::size_t m) const;

  SpectralModel model_;
  Design design_;
  Eigen::MatrixXd features_;
  GramFactor factor_;
};

Eigen::VectorXd optimal_weights(const GramFactor& factor, const Eigen::VectorXd& mu_values);
ClampedValue interpolation_error_sq(const SpectralModel& model, const CoefficientVector& mu,
                                    const Design& design);
double leverage(const SpectralModel& model, const Design& design, std::size_t m);
double cross_leverage(const SpectralModel& model, const Design& design, std::size_t m1,
                      std::size_t m2);
ClampedValue power_function(const SpectralModel& model, const Design& design, double y);
Lemma2Result lemma2_decomposition(const SpectralModel& model, const CoefficientVector& g,
                                  const Design& design, std::size_t mode_cutoff);

// Design CSV: header "origin,seed,node_1,...,node_N", one design per row.
void write_designs_csv(std::ostream& out, std::span<const Design> designs, std::uint64_t seed);
std::vector<Design> read_designs_csv(std::istream& in);

}  // namespace cvs
