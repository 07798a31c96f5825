#include "cvs/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Cholesky>

#include "cvs/errors.hpp"

namespace cvs {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

std::vector<double> reversed(std::span<const double> v) { return {v.rbegin(), v.rend()}; }

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(make_engine(seed, stream)) {}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return engine_();
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

SubsetSampler::SubsetSampler(std::span<const double> sigma, std::size_t N)
    : N_(N), suffix_(reversed(sigma), N) {
  log_sigma_.reserve(sigma.size());
  for (double s : sigma) log_sigma_.push_back(std::log(s));
}

std::vector<std::size_t> SubsetSampler::sample(RngStream& rng) const {
  const std::size_t M = log_sigma_.size();
  std::vector<std::size_t> subset;
  subset.reserve(N_);
  std::size_t k = N_;
  for (std::size_t i = 1; i <= M && k > 0; ++i) {
    const std::size_t remaining = M - i + 1;  // items i..M
    if (remaining == k) {
      for (std::size_t j = i; j <= M; ++j) subset.push_back(j);
      break;
    }
    const double p = std::exp(log_sigma_[i - 1] + suffix_.log_value(remaining - 1, k - 1) -
                              suffix_.log_value(remaining, k));
    if (rng.uniform() < p) {
      subset.push_back(i);
      --k;
    }
  }
  return subset;
}

std::vector<std::size_t> sample_subset(const SpectralModel& model, std::size_t N, RngStream& rng) {
  return SubsetSampler(model.eigenvalues(), N).sample(rng);
}

Design sample_projection_dpp(const SpectralModel& model, std::span<const std::size_t> subset,
                             RngStream& rng, std::size_t max_attempts) {
  const std::size_t N = subset.size();
  if (N == 0) throw DomainError("projection DPP needs a nonempty index set");
  const double envelope = model.basis_sup_sq() * static_cast<double>(N);

  Design design;
  design.origin = Origin::ExactSampler;
  design.nodes.reserve(N);
  Eigen::MatrixXd Q(static_cast<Eigen::Index>(N), 0);
  Eigen::VectorXd phi(static_cast<Eigen::Index>(N));

  for (std::size_t i = 0; i < N; ++i) {
    std::size_t attempts = 0;
    while (true) {
      if (++attempts > max_attempts) {
        throw SamplerStall("projection DPP rejection loop exceeded " +
                           std::to_string(max_attempts) + " proposals at node " +
                           std::to_string(i + 1) + " of " + std::to_string(N));
      }
      const double x = rng.uniform();
      for (std::size_t u = 0; u < N; ++u) {
        phi(static_cast<Eigen::Index>(u)) = model.eigenfunction(static_cast<long>(subset[u]), x);
      }
      Eigen::VectorXd r = phi - Q * (Q.transpose() * phi);
      r -= Q * (Q.transpose() * r);
      const double mass = r.squaredNorm();
      if (rng.uniform() * envelope < mass) {
        Q.conservativeResize(Eigen::NoChange, Q.cols() + 1);
        Q.col(Q.cols() - 1) = r / std::sqrt(mass);
        design.nodes.push_back(x);
        break;
      }
    }
  }
  return design;
}

ExactVsSampler::ExactVsSampler(const SpectralModel& model, std::size_t N)
    : model_(model), subsets_(model.eigenvalues(), N) {
  if (N < 1) throw DomainError("N must be >= 1");
}

Design ExactVsSampler::sample(RngStream& rng) const {
  const std::vector<std::size_t> subset = subsets_.sample(rng);
  return sample_projection_dpp(model_, subset, rng);
}

Design sample_vs_exact(const SpectralModel& model, std::size_t N, RngStream& rng) {
  return ExactVsSampler(model, N).sample(rng);
}

Design sample_iid(std::size_t N, RngStream& rng) {
  Design d;
  d.origin = Origin::Iid;
  d.nodes.resize(N);
  for (double& x : d.nodes) x = rng.uniform();
  return d;
}

MetropolisState::MetropolisState(KernelFunction kernel, std::vector<double> nodes)
    : kernel_(std::move(kernel)), nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw DomainError("MCMC state needs at least one node");
  Design d{nodes_, Origin::Mcmc};
  if (d.has_duplicates()) throw SingularDesign("MCMC state has duplicate nodes");
  refresh();
}

void MetropolisState::refresh() {
  const auto n = static_cast<Eigen::Index>(nodes_.size());
  gram_.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      gram_(i, j) = gram_(j, i) = kernel_(nodes_[static_cast<std::size_t>(i)],
                                          nodes_[static_cast<std::size_t>(j)]);
    }
  }
  const GramFactor factor(gram_);
  inverse_ = factor.llt().solve(Eigen::MatrixXd::Identity(n, n));
  log_det_ = factor.log_det();
}

MetropolisState::Conditional MetropolisState::conditional(std::size_t i, double y) const {
  const auto n = static_cast<Eigen::Index>(nodes_.size());
  const auto ii = static_cast<Eigen::Index>(i);
  Eigen::VectorXd u(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    u(j) = j == ii ? 0.0 : kernel_(nodes_[static_cast<std::size_t>(j)], y);
  }
  // K_{-i}^{-1}, padded with a zero row and column at i, is
  // C = B - B e_i e_i^T B / B_ii with B = K^{-1}.
  const Eigen::VectorXd b = inverse_.col(ii);
  const double bii = inverse_(ii, ii);
  auto apply_c = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd w = inverse_ * v - b * (b.dot(v) / bii);
    w(ii) = 0.0;
    return w;
  };
  Eigen::VectorXd z = apply_c(u);
  // One refinement step against the stored Gram matrix: C is only
  // approximately K_{-i}^{-1} once the Schur complements get small.
  Eigen::VectorXd r = u - gram_ * z + gram_.col(ii) * z(ii);
  r(ii) = 0.0;
  z += apply_c(r);
  return {kernel_(y, y) - u.dot(z), std::move(z)};
}

double MetropolisState::acceptance_ratio(std::size_t i, double y) const {
  if (i >= nodes_.size()) throw DomainError("coordinate index out of range");
  // p(y; x_{-i})^2 / p(x_i; x_{-i})^2.
  const double current = conditional(i, nodes_[i]).schur;
  return std::max(conditional(i, y).schur, 0.0) / current;
}

void MetropolisState::move(std::size_t i, double y) {
  if (i >= nodes_.size()) throw DomainError("coordinate index out of range");
  const auto ii = static_cast<Eigen::Index>(i);
  Conditional c = conditional(i, y);
  if (!(c.schur > 0.0)) throw SingularDesign("move would make the Gram matrix singular");
  const double ratio = c.schur / conditional(i, nodes_[i]).schur;
  // New inverse: C + zt zt^T / s where C is the padded K_{-i}^{-1} and
  // zt equals z with -1 at position i.
  const Eigen::VectorXd b = inverse_.col(ii);
  inverse_ -= b * (b.transpose() / b(ii));
  c.z(ii) = -1.0;
  inverse_ += c.z * (c.z.transpose() / c.schur);
  nodes_[i] = y;
  for (Eigen::Index j = 0; j < gram_.rows(); ++j) {
    gram_(ii, j) = gram_(j, ii) = kernel_(y, nodes_[static_cast<std::size_t>(j)]);
  }
  log_det_ += std::log(ratio);
}

McmcRun sample_vs_mcmc(const KernelFunction& kernel, std::size_t N, const McmcOptions& options,
                       RngStream& rng) {
  if (N < 1) throw DomainError("N must be >= 1");
  if (options.thin < 1) throw DomainError("thinning must be >= 1");

  std::optional<MetropolisState> state;
  std::size_t attempts = 0;
  while (!state) {
    if (++attempts > 100) {
      throw SingularDesign("could not find a nonsingular initial design in 100 draws");
    }
    try {
      state.emplace(kernel, sample_iid(N, rng).nodes);
    } catch (const SingularDesign&) {
    }
  }

  McmcRun run;
  McmcDiagnostics& diag = run.diagnostics;
  diag.burn_in = options.burn_in == 0 ? 1000 * N : options.burn_in;
  diag.thin = options.thin;
  diag.init_attempts = attempts;
  diag.acceptance_per_coordinate.assign(N, 0.0);

  std::vector<std::size_t> accepted(N, 0);
  std::size_t proposals = 0;
  std::size_t window_proposals = 0;
  std::size_t window_accepts = 0;
  const std::size_t total_sweeps = diag.burn_in + options.samples * options.thin;

  for (std::size_t sweep = 1; sweep <= total_sweeps; ++sweep) {
    for (std::size_t i = 0; i < N; ++i) {
      const double y = rng.uniform();
      const double ratio = state->acceptance_ratio(i, y);
      ++proposals;
      ++window_proposals;
      if (ratio >= 1.0 || rng.uniform() < ratio) {
        try {
          state->move(i, y);
          ++accepted[i];
          ++window_accepts;
        } catch (const SingularDesign&) {
          state->refresh();
        }
      }
      if (window_proposals == options.stall_window) {
        const double rate =
            static_cast<double>(window_accepts) / static_cast<double>(window_proposals);
        if (rate < options.stall_rate) {
          throw SamplerStall("MCMC acceptance rate " + std::to_string(rate) +
                             " below threshold over the last " +
                             std::to_string(window_proposals) + " proposals");
        }
        window_proposals = 0;
        window_accepts = 0;
      }
    }
    if (options.refresh_every > 0 && sweep % options.refresh_every == 0) state->refresh();
    if (sweep > diag.burn_in && (sweep - diag.burn_in) % options.thin == 0) {
      run.designs.push_back(Design{state->nodes(), Origin::Mcmc});
      diag.logdet_trace.push_back(state->log_det());
    }
  }

  diag.sweeps = total_sweeps;
  std::size_t total_accepted = 0;
  for (std::size_t i = 0; i < N; ++i) {
    diag.acceptance_per_coordinate[i] =
        static_cast<double>(accepted[i]) / static_cast<double>(total_sweeps);
    total_accepted += accepted[i];
  }
  diag.acceptance_rate = static_cast<double>(total_accepted) / static_cast<double>(proposals);
  return run;
}

}  // namespace cvs
