#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cvs/gram.hpp"
#include "cvs/spectra.hpp"
#include "cvs/sympoly.hpp"

namespace cvs {

// Deterministic random stream keyed by (master seed, stream index). Each
// replicate owns its stream, so results do not depend on thread scheduling.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  // Uniform on [0,1) with 53 random bits.
  double uniform();

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::mt19937_64 engine_;
};

// Draws U subset of {1..M}, |U| = N, with P(U) proportional to prod_{u in U} sigma_u.
// Index i is included with probability sigma_i p_{k-1}(sigma_{i+1..M}) / p_k(sigma_{i..M}),
// k being the number of slots still open.
class SubsetSampler {
 public:
  SubsetSampler(std::span<const double> sigma, std::size_t N);

  std::size_t order() const { return N_; }
  std::vector<std::size_t> sample(RngStream& rng) const;

 private:
  std::vector<double> log_sigma_;
  std::size_t N_;
  EspTable suffix_;  // row r holds the ESPs of the last r eigenvalues
};

std::vector<std::size_t> sample_subset(const SpectralModel& model, std::size_t N, RngStream& rng);

inline constexpr std::size_t kRejectionCap = 10'000'000;

// Projection DPP with kernel K_U(x,y) = sum_{u in U} e_u(x) e_u(y), sampled by
// the chain rule. Each conditional density ||(I - P) Phi(x)||^2 / (|U| - i) is
// drawn by rejection from the uniform proposal with envelope
// basis_sup_sq() * |U|.
Design sample_projection_dpp(const SpectralModel& model, std::span<const std::size_t> subset,
                             RngStream& rng, std::size_t max_attempts = kRejectionCap);

// Exact volume sampling for the truncated kernel: subset, then projection DPP.
class ExactVsSampler {
 public:
  ExactVsSampler(const SpectralModel& model, std::size_t N);

  Design sample(RngStream& rng) const;
  std::size_t order() const { return subsets_.order(); }

 private:
  SpectralModel model_;
  SubsetSampler subsets_;
};

Design sample_vs_exact(const SpectralModel& model, std::size_t N, RngStream& rng);

// N i.i.d. uniform nodes.
Design sample_iid(std::size_t N, RngStream& rng);

using KernelFunction = std::function<double(double, double)>;

// Current MCMC design with the inverse Gram matrix kept up to date, so that a
// single-site move x_i -> y costs O(N^2) kernel-free algebra plus N kernel
// evaluations.
class MetropolisState {
 public:
  MetropolisState(KernelFunction kernel, std::vector<double> nodes);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  double log_det() const { return log_det_; }

  // det K(x with x_i replaced by y) / det K(x)
  //   = p(y; x_{-i})^2 / p(x_i; x_{-i})^2.
  double acceptance_ratio(std::size_t i, double y) const;
  void move(std::size_t i, double y);
  // Rebuilds the inverse and log-determinant from scratch.
  void refresh();

 private:
  struct Conditional {
    double schur;       // p(y; x_{-i})^2
    Eigen::VectorXd z;  // K_{-i}^{-1} k_{-i}(y), zero at i
  };
  Conditional conditional(std::size_t i, double y) const;

  KernelFunction kernel_;
  std::vector<double> nodes_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd inverse_;
  double log_det_ = 0.0;
};

struct McmcOptions {
  std::size_t samples = 1000;  // kept designs
  std::size_t burn_in = 0;     // sweeps; 0 selects 1000 * N
  std::size_t thin = 10;       // sweeps between kept designs
  std::size_t refresh_every = 100;  // sweeps between full refactorizations
  double stall_rate = 1e-4;
  std::size_t stall_window = 10000;  // proposals
};

struct McmcDiagnostics {
  std::vector<double> acceptance_per_coordinate;
  double acceptance_rate = 0.0;
  std::vector<double> logdet_trace;  // one entry per kept design
  std::size_t burn_in = 0;
  std::size_t thin = 0;
  std::size_t sweeps = 0;
  std::size_t init_attempts = 0;
};

struct McmcRun {
  std::vector<Design> designs;
  McmcDiagnostics diagnostics;
};

// Metropolis-within-Gibbs targeting density proportional to det K(x): sweep the
// coordinates in order, propose x_i' uniform on [0,1], accept with
// min(1, det K(x') / det K(x)). Needs only pointwise kernel evaluations.
McmcRun sample_vs_mcmc(const KernelFunction& kernel, std::size_t N, const McmcOptions& options,
                       RngStream& rng);

}  // namespace cvs
