#include "cvs/sympoly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "cvs/errors.hpp"

namespace cvs {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// The downdate q_k = p_k - sigma q_{k-1} amplifies earlier rounding by
// sigma q_{k-1} / q_k at every step; once the propagated relative error
// estimate passes this tolerance the table is rebuilt without mode m.
constexpr double kDowndateTolerance = 1e-12;
constexpr double kLogRounding = 4.0 * std::numeric_limits<double>::epsilon();
// A single step keeping less than this fraction of p_k also forces a rebuild.
const double kLogDowndateFloor = std::log(1e-6);

}  // namespace

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

double log_sub(double a, double b) {
  if (b == kNegInf) return a;
  if (a < b) return std::numeric_limits<double>::quiet_NaN();
  if (a == b) return kNegInf;
  return a + std::log1p(-std::exp(b - a));
}

EspTable::EspTable(std::span<const double> lambda, std::size_t order)
    : M_(lambda.size()), N_(order), logp_((lambda.size() + 1) * (order + 1), kNegInf) {
  if (order > M_) {
    throw DomainError("ESP order " + std::to_string(order) + " exceeds sequence length " +
                      std::to_string(M_));
  }
  for (double l : lambda) {
    if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("ESP inputs must be finite and positive");
  }
  const std::size_t width = N_ + 1;
  logp_[0] = 0.0;
  for (std::size_t i = 1; i <= M_; ++i) {
    const double log_l = std::log(lambda[i - 1]);
    double* row = &logp_[i * width];
    const double* prev = &logp_[(i - 1) * width];
    row[0] = 0.0;
    const std::size_t kmax = std::min(i, N_);
    for (std::size_t k = 1; k <= kmax; ++k) row[k] = log_add(prev[k], log_l + prev[k - 1]);
  }
}

double EspTable::log_value(std::size_t i, std::size_t k) const {
  if (i > M_) throw DomainError("ESP row out of range");
  if (k > N_ || k > i) return kNegInf;
  return logp_[i * (N_ + 1) + k];
}

double EspTable::value(std::size_t i, std::size_t k) const { return std::exp(log_value(i, k)); }

EspTable esp_table(std::span<const double> lambda, std::size_t order) {
  return EspTable(lambda, order);
}

VsExpectations::VsExpectations(std::span<const double> sigma, std::size_t N)
    : sigma_(sigma.begin(), sigma.end()), N_(N), table_(sigma, N) {
  if (N < 1) throw DomainError("number of nodes N must be >= 1");
}

VsExpectations::VsExpectations(const SpectralModel& model, std::size_t N)
    : VsExpectations(model.eigenvalues(), N) {}

void VsExpectations::check_index(std::size_t m) const {
  if (m < 1 || m > sigma_.size()) {
    throw DomainError("mode index " + std::to_string(m) + " outside [1, " +
                      std::to_string(sigma_.size()) + "]");
  }
}

double VsExpectations::log_normalization() const {
  return std::lgamma(static_cast<double>(N_) + 1.0) + table_.log_p(N_);
}

VsExpectations::LeaveOneOut VsExpectations::leave_one_out(std::size_t m) const {
  check_index(m);
  const std::size_t M = sigma_.size();
  const double log_s = std::log(sigma_[m - 1]);

  std::vector<double> q(N_ + 1, kNegInf);
  q[0] = 0.0;
  bool ok = true;
  double rel = 0.0;
  for (std::size_t k = 1; k <= N_ && ok; ++k) {
    if (k > M - 1) {
      q[k] = kNegInf;  // no k-subset of M-1 items
      continue;
    }
    const double log_pk = table_.log_p(k);
    q[k] = log_sub(log_pk, log_s + q[k - 1]);
    if (!std::isfinite(q[k])) {
      ok = false;
      break;
    }
    rel = kLogRounding * std::exp(log_pk - q[k]) + std::exp(log_s + q[k - 1] - q[k]) * rel;
    ok = rel <= kDowndateTolerance && q[k] - log_pk >= kLogDowndateFloor;
  }
  if (ok) return {q[N_ - 1], q[N_], false};

  std::vector<double> rest;
  rest.reserve(M - 1);
  for (std::size_t i = 0; i < M; ++i) {
    if (i != m - 1) rest.push_back(sigma_[i]);
  }
  const EspTable loo(rest, std::min(N_, M - 1));
  return {loo.log_p(N_ - 1), loo.log_p(N_), true};
}

double VsExpectations::leverage(std::size_t m) const {
  const LeaveOneOut loo = leave_one_out(m);
  const double v = std::exp(std::log(sigma_[m - 1]) + loo.log_p_prev - table_.log_p(N_));
  return std::clamp(v, 0.0, 1.0);
}

double VsExpectations::leverage_complement(std::size_t m) const {
  const LeaveOneOut loo = leave_one_out(m);
  return std::min(1.0, std::exp(loo.log_p - table_.log_p(N_)));
}

double VsExpectations::eig_error(std::size_t m) const {
  return sigma_[m - 1] * leverage_complement(m);
}

double VsExpectations::eig_error_via_leverage(std::size_t m) const {
  return sigma_[m - 1] * (1.0 - leverage(m));
}

double VsExpectations::mixture_weight(std::span<const std::size_t> subset) const {
  if (subset.size() != N_) {
    throw DomainError("subset has " + std::to_string(subset.size()) + " elements, expected " +
                      std::to_string(N_));
  }
  std::set<std::size_t> seen;
  double log_w = -table_.log_p(N_);
  for (std::size_t u : subset) {
    check_index(u);
    if (!seen.insert(u).second) throw DomainError("subset has repeated indices");
    log_w += std::log(sigma_[u - 1]);
  }
  return std::exp(log_w);
}

double VsExpectations::delta() const {
  std::vector<std::size_t> first(N_);
  for (std::size_t i = 0; i < N_; ++i) first[i] = i + 1;
  return mixture_weight(first);
}

double normalization_log_ZN(const SpectralModel& model, std::size_t N) {
  return VsExpectations(model, N).log_normalization();
}

double expected_leverage(const SpectralModel& model, std::size_t m, std::size_t N) {
  return VsExpectations(model, N).leverage(m);
}

double expected_cross_leverage(std::size_t m1, std::size_t m2) {
  if (m1 < 1 || m2 < 1) throw DomainError("mode indices must be >= 1");
  if (m1 == m2) throw DomainError("cross leverage needs m1 != m2; use expected_leverage");
  return 0.0;
}

double expected_eig_error(const SpectralModel& model, std::size_t m, std::size_t N) {
  return VsExpectations(model, N).eig_error(m);
}

double expected_embedding_error(const SpectralModel& model, const CoefficientVector& g,
                                std::size_t N) {
  if (g.basis() != Basis::L2) throw BasisMismatch("expected error takes an L2 vector g");
  if (g.max_index() > model.truncation()) {
    throw DomainError("support of g exceeds the truncation");
  }
  const VsExpectations ex(model, N);
  double total = 0.0;
  for (const auto& [m, c] : g.coeffs()) total += c * c * ex.eig_error(m);
  return total;
}

double mixture_weight(const SpectralModel& model, std::span<const std::size_t> subset,
                      std::size_t N) {
  return VsExpectations(model, N).mixture_weight(subset);
}

double delta_N(const SpectralModel& model, std::size_t N) {
  return VsExpectations(model, N).delta();
}

double delta_N_bound(const SpectralModel& model, std::size_t N) {
  const auto sigma = model.eigenvalues();
  if (N < 1 || N > sigma.size()) throw DomainError("N outside [1, M]");
  double r = 0.0;
  for (std::size_t m = sigma.size(); m > N; --m) r += sigma[m - 1];
  if (r == 0.0) return std::numeric_limits<double>::infinity();
  return sigma[N - 1] / r;
}

}  // namespace cvs
