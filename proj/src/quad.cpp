#include "cvs/quad.hpp"

#include <cmath>

#include "cvs/errors.hpp"
#include "cvs/sympoly.hpp"

namespace cvs {

QuadratureRule::QuadratureRule(const SpectralModel& model, Design design, CoefficientVector g)
    : system_(model, std::move(design)), g_(std::move(g)) {
  if (g_.basis() != Basis::L2) throw BasisMismatch("quadrature target g must be an L2 vector");
  if (g_.max_index() > model.truncation()) {
    throw DomainError("quadrature target is supported beyond the truncation");
  }
  const CoefficientVector mu = embed(model, g_);
  weights_ = system_.optimal_weights(system_.reproduce(mu));
  embedding_error_sq_ = system_.interpolation_error_sq(mu).value;
}

double QuadratureRule::estimate(const CoefficientVector& f) const {
  const auto& nodes = system_.design().nodes;
  double total = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    total += weights_(static_cast<Eigen::Index>(i)) * evaluate(system_.model(), f, nodes[i]);
  }
  return total;
}

double quadrature_estimate(const QuadratureRule& rule, const CoefficientVector& f) {
  return rule.estimate(f);
}

double exact_integral(const SpectralModel& model, const CoefficientVector& f,
                      const CoefficientVector& g) {
  const CoefficientVector fl = to_l2(model, f);
  const CoefficientVector gl = to_l2(model, g);
  double total = 0.0;
  for (const auto& [n, fn] : fl.coeffs()) total += fn * gl[n];
  return total;
}

double bias_closed_form(const SpectralModel& model, const CoefficientVector& f,
                        const CoefficientVector& g, std::size_t N) {
  const CoefficientVector fl = to_l2(model, f);
  const CoefficientVector gl = to_l2(model, g);
  if (fl.max_index() > model.truncation() || gl.max_index() > model.truncation()) {
    throw DomainError("bias closed form needs f and g supported inside the truncation");
  }
  const VsExpectations ex(model, N);
  double total = 0.0;
  for (const auto& [n, fn] : fl.coeffs()) {
    const double gn = gl[n];
    if (gn == 0.0) continue;
    total += fn * gn * ex.leverage_complement(n);
  }
  return total;
}

double uniform_error_bound(const QuadratureRule& rule, double f_norm) {
  return f_norm * std::sqrt(rule.embedding_error_sq());
}

double uniform_error_bound(const SpectralModel& model, const Design& design,
                           const CoefficientVector& g, double f_norm) {
  return uniform_error_bound(QuadratureRule(model, design, g), f_norm);
}

}  // namespace cvs
