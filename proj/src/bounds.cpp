#include "cvs/bounds.hpp"

#include <cmath>
#include <limits>

#include "cvs/errors.hpp"
#include "cvs/sympoly.hpp"

namespace cvs {

BetaResult beta_N(const SpectralModel& model, std::size_t N) {
  if (N < 2) throw DomainError("beta_N needs N >= 2");
  BetaResult best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t M = 2; M <= N; ++M) {
    const double v =
        model.tail_over_eigenvalue(M, N).hi / static_cast<double>(N - M + 1);
    if (v < best.value) best = {v, M};
  }
  return best;
}

double thm1_upper(const SpectralModel& model, std::size_t N) {
  return model.eigenvalue(static_cast<long>(N)) * (1.0 + beta_N(model, N).value);
}

double nwidth_lower_bound(const SpectralModel& model, std::size_t N) {
  return model.eigenvalue(static_cast<long>(N) + 1);
}

double prop2_constant(const SpectralModel& model) {
  switch (model.family()) {
    case Family::SobolevPaper: {
      const double a = 1.0 + 1.0 / (2.0 * model.smoothness() - 1.0);
      return a * std::pow(a, 2.0 * model.smoothness() - 1.0);
    }
    case Family::Geometric:
      return model.alpha() / (1.0 - model.alpha());
    default:
      throw UnsupportedFamily("no uniform beta_N constant for family " +
                              to_string(model.family()));
  }
}

double sobolev_norm_sq(const SpectralModel& model, const CoefficientVector& mu, double r) {
  const CoefficientVector c = to_rkhs(model, mu);
  double total = 0.0;
  for (const auto& [m, v] : c.coeffs()) {
    total += std::pow(model.eigenvalue(static_cast<long>(m)), -2.0 * r) * v * v;
  }
  return total;
}

double thm2_bound(const SpectralModel& model, double r, double sobolev_norm, std::size_t N,
                  std::optional<double> B) {
  if (!(r >= 0.0 && r <= 0.5)) throw DomainError("smoothness exponent r must lie in [0, 1/2]");
  if (N < 1) throw DomainError("N must be >= 1");
  const double b = B ? *B : prop2_constant(model);
  return (2.0 + b) * std::pow(model.eigenvalue(static_cast<long>(N)), 2.0 * r) * sobolev_norm *
         sobolev_norm;
}

double delayed_bound(const SpectralModel& model, const CoefficientVector& mu, std::size_t N,
                     std::optional<double> B) {
  if (N < 1) throw DomainError("N must be >= 1");
  const double b = B ? *B : prop2_constant(model);
  const double sigma_N = model.eigenvalue(static_cast<long>(N));
  const CoefficientVector c = to_rkhs(model, mu);
  double head = 0.0;
  double tail = 0.0;
  for (const auto& [m, v] : c.coeffs()) {
    if (m <= N) {
      head += sigma_N / model.eigenvalue(static_cast<long>(m)) * v * v;
    } else {
      tail += v * v;
    }
  }
  return (1.0 + b) * head + tail;
}

BoundReport bound_report(const SpectralModel& model, std::size_t N) {
  BoundReport report;
  report.N = N;
  const BetaResult beta = beta_N(model, N);
  report.beta_N = beta.value;
  report.argmin_M = beta.argmin;
  report.upper_bound_thm1 = thm1_upper(model, N);
  report.lower_bound_nwidth = nwidth_lower_bound(model, N);
  if (model.family() == Family::SobolevPaper || model.family() == Family::Geometric) {
    report.prop2_constant = prop2_constant(model);
  }
  report.tail_rN = model.tail_mass(N);
  report.epsilon_1 = expected_eig_error(model, 1, N);
  return report;
}

}  // namespace cvs
