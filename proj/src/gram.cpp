#include "cvs/gram.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>

#include "cvs/csv.hpp"
#include "cvs/errors.hpp"

namespace cvs {

namespace {

constexpr double kClampTolerance = 1e-9;

ClampedValue clamp_nonnegative(double v, double scale, const char* what) {
  if (v >= 0.0) return {v, false};
  if (v >= -kClampTolerance * std::max(scale, 0.0)) return {0.0, true};
  throw ConsistencyError(std::string(what) + " is negative beyond roundoff: " + csv::format(v));
}

}  // namespace

std::string to_string(Origin origin) {
  switch (origin) {
    case Origin::ExactSampler: return "exact-sampler";
    case Origin::Mcmc: return "mcmc";
    case Origin::Iid: return "iid";
    case Origin::Manual: return "manual";
  }
  return "manual";
}

Origin origin_from_string(const std::string& s) {
  if (s == "exact-sampler") return Origin::ExactSampler;
  if (s == "mcmc") return Origin::Mcmc;
  if (s == "iid") return Origin::Iid;
  if (s == "manual") return Origin::Manual;
  throw DomainError("unknown design origin '" + s + "'");
}

bool Design::has_duplicates() const {
  std::vector<double> sorted = nodes;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

GramFactor::GramFactor(Eigen::MatrixXd K) : K_(std::move(K)) {
  if (K_.rows() == 0 || K_.rows() != K_.cols()) {
    throw SingularDesign("Gram matrix must be square and nonempty");
  }
  const double mean_diag = K_.diagonal().mean();
  if (!(mean_diag > 0.0) || !std::isfinite(mean_diag)) {
    throw SingularDesign("Gram matrix has a non-positive diagonal");
  }
  const Eigen::Index n = K_.rows();
  double level = 0.0;
  while (true) {
    Eigen::MatrixXd A = K_;
    if (level > 0.0) A.diagonal().array() += level * mean_diag;
    llt_.compute(A);
    if (llt_.info() == Eigen::Success) {
      const auto diag = llt_.matrixLLT().diagonal();
      if ((diag.array() > 0.0).all() && diag.allFinite()) break;
    }
    level = level == 0.0 ? 1e-12 : level * 10.0;
    if (level > 1e-6 * (1.0 + 1e-9)) {
      throw SingularDesign("Gram matrix of " + std::to_string(n) +
                           " nodes is singular beyond the jitter budget");
    }
  }
  jitter_ = level;
  log_det_ = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd GramFactor::whiten(const Eigen::MatrixXd& B) const {
  return llt_.matrixL().solve(B);
}

Eigen::MatrixXd feature_matrix(const SpectralModel& model, std::span<const double> nodes,
                               std::size_t modes) {
  Eigen::MatrixXd F(static_cast<Eigen::Index>(nodes.size()), static_cast<Eigen::Index>(modes));
  std::vector<double> row(modes);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    model.eigenfunctions(nodes[i], row);
    for (std::size_t m = 0; m < modes; ++m) F(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = row[m];
  }
  return F;
}

namespace {

Eigen::MatrixXd gram_from_features(const SpectralModel& model, const Eigen::MatrixXd& F) {
  const auto sigma = model.eigenvalues();
  const Eigen::Map<const Eigen::VectorXd> s(sigma.data(), static_cast<Eigen::Index>(sigma.size()));
  Eigen::MatrixXd K = F * s.asDiagonal() * F.transpose();
  // Exact symmetry.
  K = 0.5 * (K + K.transpose()).eval();
  return K;
}

void check_design(const SpectralModel& model, const Design& design) {
  if (design.size() == 0) throw DomainError("design must have at least one node");
  if (design.has_duplicates()) throw SingularDesign("design has duplicate nodes");
  if (design.size() > model.truncation()) {
    throw SingularDesign("more nodes than Mercer terms: Gram matrix has rank <= " +
                         std::to_string(model.truncation()));
  }
}

}  // namespace

Eigen::MatrixXd gram_matrix(const SpectralModel& model, std::span<const double> nodes) {
  return gram_from_features(model, feature_matrix(model, nodes, model.truncation()));
}

GramFactor gram(const SpectralModel& model, const Design& design) {
  check_design(model, design);
  return GramFactor(gram_matrix(model, design.nodes));
}

InterpolationSystem::InterpolationSystem(const SpectralModel& model, Design design)
    : model_(model),
      design_(std::move(design)),
      features_(feature_matrix(model, design_.nodes, model.truncation())),
      factor_((check_design(model_, design_), gram_from_features(model_, features_))) {}

void InterpolationSystem::check_mode(std::size_t m) const {
  if (m < 1) throw DomainError("mode index must be >= 1");
}

Eigen::VectorXd InterpolationSystem::optimal_weights(const Eigen::VectorXd& mu_values) const {
  return cvs::optimal_weights(factor_, mu_values);
}

Eigen::VectorXd InterpolationSystem::reproduce(const CoefficientVector& mu) const {
  const CoefficientVector c = to_rkhs(model_, mu);
  const auto sigma = model_.eigenvalues();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(features_.rows());
  for (const auto& [m, v] : c.coeffs()) {
    if (m > sigma.size()) continue;
    r += (v * std::sqrt(sigma[m - 1])) * features_.col(static_cast<Eigen::Index>(m - 1));
  }
  return r;
}

ClampedValue InterpolationSystem::interpolation_error_sq(const CoefficientVector& mu) const {
  const double norm_sq = rkhs_norm_sq(model_, mu);
  const Eigen::VectorXd w = factor_.whiten(reproduce(mu));
  return clamp_nonnegative(norm_sq - w.squaredNorm(), norm_sq, "interpolation error");
}

double InterpolationSystem::leverage(std::size_t m) const { return cross_leverage(m, m); }

double InterpolationSystem::cross_leverage(std::size_t m1, std::size_t m2) const {
  check_mode(m1);
  check_mode(m2);
  const auto sigma = model_.eigenvalues();
  if (m1 > sigma.size() || m2 > sigma.size()) return 0.0;
  const Eigen::VectorXd a =
      factor_.whiten(std::sqrt(sigma[m1 - 1]) * features_.col(static_cast<Eigen::Index>(m1 - 1)));
  if (m1 == m2) return a.squaredNorm();
  const Eigen::VectorXd b =
      factor_.whiten(std::sqrt(sigma[m2 - 1]) * features_.col(static_cast<Eigen::Index>(m2 - 1)));
  return a.dot(b);
}

Eigen::MatrixXd InterpolationSystem::leverage_matrix(std::size_t modes) const {
  const auto sigma = model_.eigenvalues();
  if (modes < 1 || modes > sigma.size()) throw DomainError("mode count outside [1, M]");
  const Eigen::Map<const Eigen::VectorXd> s(sigma.data(), static_cast<Eigen::Index>(modes));
  const Eigen::MatrixXd phi =
      features_.leftCols(static_cast<Eigen::Index>(modes)) * s.cwiseSqrt().asDiagonal();
  const Eigen::MatrixXd W = factor_.whiten(phi);
  return W.transpose() * W;
}

ClampedValue InterpolationSystem::power_function_sq(double y) const {
  const auto sigma = model_.eigenvalues();
  const std::size_t M = sigma.size();
  std::vector<double> fy(M);
  model_.eigenfunctions(y, fy);
  const Eigen::Map<const Eigen::VectorXd> f(fy.data(), static_cast<Eigen::Index>(M));
  const Eigen::Map<const Eigen::VectorXd> s(sigma.data(), static_cast<Eigen::Index>(M));
  const Eigen::VectorXd sf = s.cwiseProduct(f);
  const double kyy = f.dot(sf);
  const Eigen::VectorXd kx = features_ * sf;
  const double p2 = kyy - factor_.whiten(kx).squaredNorm();
  return clamp_nonnegative(p2, kyy, "power function");
}

ClampedValue InterpolationSystem::power_function(double y) const {
  ClampedValue v = power_function_sq(y);
  v.value = std::sqrt(v.value);
  return v;
}

Lemma2Result InterpolationSystem::lemma2_decomposition(const CoefficientVector& g,
                                                       std::size_t mode_cutoff) const {
  if (g.basis() != Basis::L2) throw BasisMismatch("decomposition expects g in the L2 basis");
  if (mode_cutoff > model_.truncation()) throw DomainError("mode cutoff exceeds the truncation");
  if (g.max_index() > mode_cutoff) throw DomainError("g is supported beyond the mode cutoff");
  const auto sigma = model_.eigenvalues();
  const Eigen::MatrixXd T = leverage_matrix(mode_cutoff);

  Lemma2Result out;
  double diagonal = 0.0;
  double cross = 0.0;
  for (const auto& [m1, g1] : g.coeffs()) {
    const auto i = static_cast<Eigen::Index>(m1 - 1);
    diagonal += g1 * g1 * sigma[m1 - 1] * (1.0 - T(i, i));
    for (const auto& [m2, g2] : g.coeffs()) {
      if (m1 == m2) continue;
      const auto j = static_cast<Eigen::Index>(m2 - 1);
      cross += g1 * g2 * std::sqrt(sigma[m1 - 1]) * std::sqrt(sigma[m2 - 1]) * T(i, j);
    }
  }
  out.value = diagonal - cross;

  const CoefficientVector mu = embed(model_, g);
  out.direct = mu.coeff_norm_sq() - factor_.whiten(reproduce(mu)).squaredNorm();
  out.residual = out.value - out.direct;
  return out;
}

double InterpolationSystem::worst_case_embedding_error(std::size_t modes) const {
  const auto sigma = model_.eigenvalues();
  const Eigen::MatrixXd T = leverage_matrix(modes);
  const Eigen::Map<const Eigen::VectorXd> s(sigma.data(), static_cast<Eigen::Index>(modes));
  const Eigen::VectorXd root = s.cwiseSqrt();
  const auto n = static_cast<Eigen::Index>(modes);
  const Eigen::MatrixXd A =
      root.asDiagonal() * (Eigen::MatrixXd::Identity(n, n) - T) * root.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

Eigen::VectorXd optimal_weights(const GramFactor& factor, const Eigen::VectorXd& mu_values) {
  if (mu_values.size() != factor.matrix().rows()) {
    throw DomainError("mu(x) has the wrong length for this Gram matrix");
  }
  return factor.solve(mu_values);
}

ClampedValue interpolation_error_sq(const SpectralModel& model, const CoefficientVector& mu,
                                    const Design& design) {
  return InterpolationSystem(model, design).interpolation_error_sq(mu);
}

double leverage(const SpectralModel& model, const Design& design, std::size_t m) {
  return InterpolationSystem(model, design).leverage(m);
}

double cross_leverage(const SpectralModel& model, const Design& design, std::size_t m1,
                      std::size_t m2) {
  return InterpolationSystem(model, design).cross_leverage(m1, m2);
}

ClampedValue power_function(const SpectralModel& model, const Design& design, double y) {
  return InterpolationSystem(model, design).power_function(y);
}

Lemma2Result lemma2_decomposition(const SpectralModel& model, const CoefficientVector& g,
                                  const Design& design, std::size_t mode_cutoff) {
  return InterpolationSystem(model, design).lemma2_decomposition(g, mode_cutoff);
}

void write_designs_csv(std::ostream& out, std::span<const Design> designs, std::uint64_t seed) {
  const std::size_t N = designs.empty() ? 0 : designs.front().size();
  std::vector<std::string> header{"origin", "seed"};
  for (std::size_t i = 1; i <= N; ++i) header.push_back("node_" + std::to_string(i));
  csv::write_row(out, header);
  for (const Design& d : designs) {
    if (d.size() != N) throw DomainError("designs in one CSV must share N");
    std::vector<std::string> row{to_string(d.origin), csv::format(seed)};
    for (double x : d.nodes) row.push_back(csv::format(x));
    csv::write_row(out, row);
  }
}

std::vector<Design> read_designs_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return {};
  const auto header = csv::split_row(line);
  if (header.size() < 2 || header[0] != "origin" || header[1] != "seed") {
    throw DomainError("design CSV header must start with origin,seed");
  }
  std::vector<Design> designs;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split_row(line);
    if (fields.size() != header.size()) throw DomainError("design CSV row has the wrong width");
    Design d;
    d.origin = origin_from_string(fields[0]);
    for (std::size_t i = 2; i < fields.size(); ++i) d.nodes.push_back(csv::parse_double(fields[i]));
    designs.push_back(std::move(d));
  }
  return designs;
}

}  // namespace cvs
