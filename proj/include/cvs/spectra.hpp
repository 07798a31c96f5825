#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace cvs {

enum class Family { SobolevPaper, Geometric, SobolevClassical, Custom };

std::string to_string(Family family);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return lo <= v && v <= hi; }
  Interval scaled(double c) const { return {lo * c, hi * c}; }
};

// Mercer kernel on [0,1] with the uniform reference measure.
//
// Eigenfunctions are the Fourier system in a fixed order:
//   e_1 = 1, e_{2j}(x) = sqrt(2) cos(2 pi j x), e_{2j+1}(x) = sqrt(2) sin(2 pi j x).
// The eigenvalue attached to index m depends on the family:
//   SobolevPaper(s)      sigma_m = m^{-2s}
//   Geometric(alpha)     sigma_m = alpha^m
//   SobolevClassical(s)  sigma_1 = 1, sigma_{2j} = sigma_{2j+1} = j^{-2s}
//   Custom(list)         sigma_m = list[m-1]
// The kernel itself is the Mercer sum truncated at `truncation()` terms.
class SpectralModel {
 public:
  static SpectralModel sobolev_paper(int s, std::size_t truncation);
  static SpectralModel geometric(double alpha, std::size_t truncation);
  static SpectralModel sobolev_classical(int s, std::size_t truncation);
  static SpectralModel custom(std::vector<double> eigenvalues, std::size_t truncation);

  Family family() const { return family_; }
  int smoothness() const { return smoothness_; }
  double alpha() const { return alpha_; }
  std::size_t truncation() const { return sigma_.size(); }

  // Same family and parameter, different number of Mercer terms.
  SpectralModel with_truncation(std::size_t truncation) const;

  // Family eigenvalue for any index m >= 1 (not limited to the truncation).
  double eigenvalue(long m) const;
  // sigma_1 .. sigma_M of the truncated kernel.
  std::span<const double> eigenvalues() const { return sigma_; }
  // Sum of the truncated eigenvalues.
  double trace() const { return trace_; }

  // Bracket of sum_{m > M} sigma_m for the untruncated family.
  Interval tail_mass(std::size_t M) const;
  // Bracket of tail_mass(M) / sigma_N, evaluated without forming the two
  // factors separately when the family allows it.
  Interval tail_over_eigenvalue(std::size_t M, std::size_t N) const;

  // sup_x |e_m(x)|^2 over every basis function; the rejection envelope for
  // projection DPP sampling is this times the number of modes.
  double basis_sup_sq() const { return 2.0; }

  double eigenfunction(long m, double x) const;
  // e_1(x) .. e_{out.size()}(x).
  void eigenfunctions(double x, std::span<double> out) const;

  double kernel(double x, double y) const;
  // 1 + (-1)^{s-1} (2 pi)^{2s} / (2s)! B_{2s}({x - y}); SobolevClassical only.
  double kernel_closed_form(double x, double y) const;

  std::string tag() const;
  nlohmann::json to_json() const;
  static SpectralModel from_json(const nlohmann::json& j);

 private:
  SpectralModel(Family family, int s, double alpha, std::vector<double> custom,
                std::size_t truncation);

  Family family_;
  int smoothness_ = 0;
  double alpha_ = 0.0;
  std::vector<double> custom_;
  std::vector<double> sigma_;
  double trace_ = 0.0;
};

// Default Mercer truncation used when a caller does not fix one.
std::size_t default_truncation(std::size_t N);

enum class Basis { L2, RKHS };

// Finitely supported coefficients of a function on [0,1].
//   L2 basis:   f = sum_m c_m e_m
//   RKHS basis: f = sum_m c_m e_m^F,  e_m^F = sqrt(sigma_m) e_m
class CoefficientVector {
 public:
  explicit CoefficientVector(Basis basis = Basis::L2) : basis_(basis) {}
  CoefficientVector(Basis basis, std::map<std::size_t, double> coeffs);

  static CoefficientVector unit(Basis basis, std::size_t m);

  Basis basis() const { return basis_; }
  const std::map<std::size_t, double>& coeffs() const { return coeffs_; }
  double operator[](std::size_t m) const;
  void set(std::size_t m, double value);
  // Largest index with a nonzero coefficient, 0 when empty.
  std::size_t max_index() const;
  bool empty() const { return max_index() == 0; }

  // Sum of squared coefficients: the L2 norm for an L2 vector, the RKHS norm
  // for an RKHS vector.
  double coeff_norm_sq() const;

  CoefficientVector scaled(double c) const;

 private:
  Basis basis_;
  std::map<std::size_t, double> coeffs_;
};

// mu_g = sum_m sqrt(sigma_m) g_m e_m^F; requires an L2 vector.
CoefficientVector embed(const SpectralModel& model, const CoefficientVector& g);
// Re-express the same function in the other basis.
CoefficientVector to_rkhs(const SpectralModel& model, const CoefficientVector& v);
CoefficientVector to_l2(const SpectralModel& model, const CoefficientVector& v);
double rkhs_norm_sq(const SpectralModel& model, const CoefficientVector& v);
double evaluate(const SpectralModel& model, const CoefficientVector& v, double x);
// sum_m sigma_m g_m e_m(x); throws BasisMismatch on an RKHS vector.
double embedding_eval(const SpectralModel& model, const CoefficientVector& g, double x);

}  // namespace cvs
