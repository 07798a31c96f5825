#pragma once
// Brute-force references the library is checked against. Everything here is
// deliberately naive: exponential enumeration, dense determinants, composite
// Simpson quadrature.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cvs/spectra.hpp"

namespace oracle {

// Calls fn(subset) for every k-subset of {1..n}, subsets as sorted 1-based indices.
inline void for_each_subset(std::size_t n, std::size_t k,
                            const std::function<void(const std::vector<std::size_t>&)>& fn) {
  if (k > n) return;
  std::vector<std::size_t> s(k);
  for (std::size_t i = 0; i < k; ++i) s[i] = i + 1;
  while (true) {
    fn(s);
    std::size_t i = k;
    while (i > 0 && s[i - 1] == n - k + i) --i;
    if (i == 0) return;
    ++s[i - 1];
    for (std::size_t j = i; j < k; ++j) s[j] = s[j - 1] + 1;
  }
}

inline double subset_product(std::span<const double> lambda, const std::vector<std::size_t>& s) {
  double p = 1.0;
  for (std::size_t u : s) p *= lambda[u - 1];
  return p;
}

// e_k(lambda_1..lambda_n) by enumeration.
inline double esp(std::span<const double> lambda, std::size_t k) {
  if (k == 0) return 1.0;
  double total = 0.0;
  for_each_subset(lambda.size(), k, [&](const auto& s) { total += subset_product(lambda, s); });
  return total;
}

inline std::vector<double> without(std::span<const double> lambda, std::size_t m) {
  std::vector<double> out;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (i + 1 != m) out.push_back(lambda[i]);
  }
  return out;
}

// sigma_m sum_{U not containing m} prod sigma_u / p_N.
inline double eig_error(std::span<const double> sigma, std::size_t m, std::size_t N) {
  return sigma[m - 1] * esp(without(sigma, m), N) / esp(sigma, N);
}

inline double leverage(std::span<const double> sigma, std::size_t m, std::size_t N) {
  return sigma[m - 1] * esp(without(sigma, m), N - 1) / esp(sigma, N);
}

// Dense Mercer-sum kernel without any of the library's trigonometric shortcuts.
inline double mercer_kernel(const cvs::SpectralModel& model, double x, double y) {
  double k = 0.0;
  for (std::size_t m = model.truncation(); m >= 1; --m) {
    const long mm = static_cast<long>(m);
    k += model.eigenvalue(mm) * model.eigenfunction(mm, x) * model.eigenfunction(mm, y);
  }
  return k;
}

inline Eigen::MatrixXd mercer_gram(const cvs::SpectralModel& model, std::span<const double> x) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      K(i, j) = mercer_kernel(model, x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]);
    }
  }
  return K;
}

// Determinant by partial-pivot LU, independent of the Cholesky path.
inline double det(const Eigen::MatrixXd& A) { return A.partialPivLu().determinant(); }

// E_U(x): N x N matrix of e_u(x_i), u in U.
inline Eigen::MatrixXd eigen_block(const cvs::SpectralModel& model, std::span<const double> x,
                                   const std::vector<std::size_t>& U) {
  Eigen::MatrixXd E(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(U.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < U.size(); ++j) {
      E(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          model.eigenfunction(static_cast<long>(U[j]), x[i]);
    }
  }
  return E;
}

// sum_{|U| = N} prod sigma_u det(E_U(x))^2.
inline double cauchy_binet(const cvs::SpectralModel& model, std::span<const double> x) {
  const auto sigma = model.eigenvalues();
  double total = 0.0;
  for_each_subset(sigma.size(), x.size(), [&](const auto& U) {
    const double d = det(eigen_block(model, x, U));
    total += subset_product(sigma, U) * d * d;
  });
  return total;
}

// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      std::size_t n = 2000) {
  if (n % 2 == 1) ++n;
  const double h = (b - a) / static_cast<double>(n);
  double s = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) {
    s += (i % 2 == 1 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  }
  return s * h / 3.0;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace oracle
