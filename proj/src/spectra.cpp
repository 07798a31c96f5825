#include "cvs/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include "cvs/errors.hpp"

namespace cvs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// sum_{j > J} j^{-p}, p > 1, bracketed by the integrals over [J+1, inf) and [J, inf).
Interval power_tail(std::size_t J, double p) {
  if (J == 0) {
    const Interval rest = power_tail(1, p);
    return {1.0 + rest.lo, 1.0 + rest.hi};
  }
  const double j = static_cast<double>(J);
  return {std::pow(j + 1.0, 1.0 - p) / (p - 1.0), std::pow(j, 1.0 - p) / (p - 1.0)};
}

void check_unit_interval(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("node " + std::to_string(x) + " outside [0,1]");
  }
}

double bernoulli_number(int n) {
  if (n == 0) return 1.0;
  if (n == 1) return -0.5;
  if (n % 2 == 1) return 0.0;
  return boost::math::bernoulli_b2n<double>(n / 2);
}

double bernoulli_polynomial(int n, double t) {
  double value = 0.0;
  for (int k = 0; k <= n; ++k) {
    value += boost::math::binomial_coefficient<double>(n, k) * bernoulli_number(k) *
             std::pow(t, n - k);
  }
  return value;
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::SobolevPaper: return "sobolev_paper";
    case Family::Geometric: return "geometric";
    case Family::SobolevClassical: return "sobolev_classical";
    case Family::Custom: return "custom";
  }
  return "unknown";
}

std::size_t default_truncation(std::size_t N) { return std::max<std::size_t>(4 * N, 128); }

SpectralModel::SpectralModel(Family family, int s, double alpha, std::vector<double> custom,
                             std::size_t truncation)
    : family_(family), smoothness_(s), alpha_(alpha), custom_(std::move(custom)) {
  if (truncation < 1) throw DomainError("truncation must be >= 1");
  sigma_.resize(truncation);
  for (std::size_t m = 1; m <= truncation; ++m) sigma_[m - 1] = eigenvalue(static_cast<long>(m));
  // Summed smallest first.
  trace_ = 0.0;
  for (auto it = sigma_.rbegin(); it != sigma_.rend(); ++it) trace_ += *it;
}

SpectralModel SpectralModel::sobolev_paper(int s, std::size_t truncation) {
  if (s < 1) throw DomainError("smoothness s must be >= 1");
  return SpectralModel(Family::SobolevPaper, s, 0.0, {}, truncation);
}

SpectralModel SpectralModel::geometric(double alpha, std::size_t truncation) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  return SpectralModel(Family::Geometric, 0, alpha, {}, truncation);
}

SpectralModel SpectralModel::sobolev_classical(int s, std::size_t truncation) {
  if (s < 1) throw DomainError("smoothness s must be >= 1");
  return SpectralModel(Family::SobolevClassical, s, 0.0, {}, truncation);
}

SpectralModel SpectralModel::custom(std::vector<double> eigenvalues, std::size_t truncation) {
  if (eigenvalues.empty()) throw DomainError("custom spectrum is empty");
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    if (!(eigenvalues[i] > 0.0) || !std::isfinite(eigenvalues[i])) {
      throw DomainError("custom eigenvalues must be finite and positive");
    }
    if (i > 0 && eigenvalues[i] > eigenvalues[i - 1]) {
      throw DomainError("custom eigenvalues must be non-increasing");
    }
  }
  if (truncation > eigenvalues.size()) {
    throw DomainError("truncation exceeds the length of the custom spectrum");
  }
  return SpectralModel(Family::Custom, 0, 0.0, std::move(eigenvalues), truncation);
}

SpectralModel SpectralModel::with_truncation(std::size_t truncation) const {
  if (family_ == Family::Custom) return custom(custom_, truncation);
  return SpectralModel(family_, smoothness_, alpha_, custom_, truncation);
}

double SpectralModel::eigenvalue(long m) const {
  if (m < 1) throw DomainError("eigenvalue index must be >= 1, got " + std::to_string(m));
  switch (family_) {
    case Family::SobolevPaper:
      return std::pow(static_cast<double>(m), -2.0 * smoothness_);
    case Family::Geometric:
      return std::pow(alpha_, static_cast<double>(m));
    case Family::SobolevClassical:
      if (m == 1) return 1.0;
      return std::pow(static_cast<double>(m / 2), -2.0 * smoothness_);
    case Family::Custom:
      if (static_cast<std::size_t>(m) > custom_.size()) {
        throw DomainError("index beyond the custom spectrum");
      }
      return custom_[static_cast<std::size_t>(m - 1)];
  }
  return 0.0;
}

Interval SpectralModel::tail_mass(std::size_t M) const {
  if (M < 1) throw DomainError("tail_mass needs M >= 1");
  const double p = 2.0 * smoothness_;
  switch (family_) {
    case Family::SobolevPaper:
      return power_tail(M, p);
    case Family::Geometric: {
      const double t = std::pow(alpha_, static_cast<double>(M + 1)) / (1.0 - alpha_);
      return {t, t};
    }
    case Family::SobolevClassical: {
      // Indices 2j and 2j+1 share frequency j.
      const std::size_t J = M / 2;
      const Interval pairs = power_tail(J, p).scaled(2.0);
      if (M % 2 == 1) return pairs;
      const double single = std::pow(static_cast<double>(J), -p);
      return {single + pairs.lo, single + pairs.hi};
    }
    case Family::Custom: {
      double t = 0.0;
      for (std::size_t m = custom_.size(); m > M; --m) t += custom_[m - 1];
      return {t, t};
    }
  }
  return {};
}

Interval SpectralModel::tail_over_eigenvalue(std::size_t M, std::size_t N) const {
  if (family_ == Family::Geometric) {
    if (M < 1) throw DomainError("tail_mass needs M >= 1");
    const double r = std::pow(alpha_, static_cast<double>(M + 1) - static_cast<double>(N)) /
                     (1.0 - alpha_);
    return {r, r};
  }
  return tail_mass(M).scaled(1.0 / eigenvalue(static_cast<long>(N)));
}

double SpectralModel::eigenfunction(long m, double x) const {
  if (m < 1) throw DomainError("eigenfunction index must be >= 1");
  check_unit_interval(x);
  if (m == 1) return 1.0;
  const double j = static_cast<double>(m / 2);
  const double angle = kTwoPi * j * x;
  return std::numbers::sqrt2 * (m % 2 == 0 ? std::cos(angle) : std::sin(angle));
}

void SpectralModel::eigenfunctions(double x, std::span<double> out) const {
  check_unit_interval(x);
  for (std::size_t m = 1; m <= out.size(); ++m) {
    if (m == 1) {
      out[0] = 1.0;
      continue;
    }
    const double angle = kTwoPi * static_cast<double>(m / 2) * x;
    out[m - 1] = std::numbers::sqrt2 * (m % 2 == 0 ? std::cos(angle) : std::sin(angle));
  }
}

double SpectralModel::kernel(double x, double y) const {
  check_unit_interval(x);
  check_unit_interval(y);
  // For each frequency j the cos/sin pair contributes
  //   2 s_c cos(a)cos(b) + 2 s_s sin(a)sin(b)
  //     = (s_c + s_s) cos(a - b) + (s_c - s_s) cos(a + b).
  const std::size_t M = sigma_.size();
  const double diff = x - y;
  const double sum = x + y;
  double value = 0.0;
  for (std::size_t j = M / 2; j >= 1; --j) {
    const std::size_t mc = 2 * j;
    const std::size_t ms = 2 * j + 1;
    const double sc = mc <= M ? sigma_[mc - 1] : 0.0;
    const double ss = ms <= M ? sigma_[ms - 1] : 0.0;
    const double f = static_cast<double>(j);
    value += (sc + ss) * std::cos(kTwoPi * f * diff) + (sc - ss) * std::cos(kTwoPi * f * sum);
  }
  return value + sigma_[0];
}

double SpectralModel::kernel_closed_form(double x, double y) const {
  if (family_ != Family::SobolevClassical) {
    throw UnsupportedFamily("closed-form kernel exists only for sobolev_classical");
  }
  check_unit_interval(x);
  check_unit_interval(y);
  const int s = smoothness_;
  double t = x - y;
  t -= std::floor(t);
  const double sign = (s % 2 == 1) ? 1.0 : -1.0;
  const double scale = std::pow(kTwoPi, 2 * s) / std::tgamma(2.0 * s + 1.0);
  return 1.0 + sign * scale * bernoulli_polynomial(2 * s, t);
}

std::string SpectralModel::tag() const {
  std::ostringstream os;
  os << to_string(family_);
  switch (family_) {
    case Family::SobolevPaper:
    case Family::SobolevClassical: os << "_s" << smoothness_; break;
    case Family::Geometric: os << "_a" << alpha_; break;
    case Family::Custom: os << "_L" << custom_.size(); break;
  }
  return os.str();
}

nlohmann::json SpectralModel::to_json() const {
  nlohmann::json j;
  j["family"] = to_string(family_);
  switch (family_) {
    case Family::SobolevPaper:
    case Family::SobolevClassical: j["param"] = smoothness_; break;
    case Family::Geometric: j["param"] = alpha_; break;
    case Family::Custom: j["param"] = custom_; break;
  }
  j["truncation"] = truncation();
  return j;
}

SpectralModel SpectralModel::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("model descriptor must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "family" && key != "param" && key != "truncation") {
      throw DomainError("unknown model descriptor key '" + key + "'");
    }
  }
  if (!j.contains("family") || !j.contains("param")) {
    throw DomainError("model descriptor needs 'family' and 'param'");
  }
  const std::string family = j.at("family").get<std::string>();
  const auto& param = j.at("param");
  std::size_t truncation = 128;
  if (j.contains("truncation") && !j.at("truncation").is_null()) {
    const long t = j.at("truncation").get<long>();
    if (t < 1) throw DomainError("truncation must be >= 1");
    truncation = static_cast<std::size_t>(t);
  }
  if (family == "sobolev_paper" || family == "sobolev_classical") {
    if (!param.is_number_integer()) throw DomainError("smoothness 'param' must be an integer");
    const int s = param.get<int>();
    return family == "sobolev_paper" ? sobolev_paper(s, truncation)
                                     : sobolev_classical(s, truncation);
  }
  if (family == "geometric") {
    if (!param.is_number()) throw DomainError("geometric 'param' must be a number");
    return geometric(param.get<double>(), truncation);
  }
  if (family == "custom") {
    if (!param.is_array()) throw DomainError("custom 'param' must be an array");
    auto values = param.get<std::vector<double>>();
    if (!j.contains("truncation") || j.at("truncation").is_null()) truncation = values.size();
    return custom(std::move(values), truncation);
  }
  throw DomainError("unknown model family '" + family + "'");
}

CoefficientVector::CoefficientVector(Basis basis, std::map<std::size_t, double> coeffs)
    : basis_(basis) {
  for (const auto& [m, c] : coeffs) set(m, c);
}

CoefficientVector CoefficientVector::unit(Basis basis, std::size_t m) {
  CoefficientVector v(basis);
  v.set(m, 1.0);
  return v;
}

double CoefficientVector::operator[](std::size_t m) const {
  const auto it = coeffs_.find(m);
  return it == coeffs_.end() ? 0.0 : it->second;
}

void CoefficientVector::set(std::size_t m, double value) {
  if (m < 1) throw DomainError("coefficient index must be >= 1");
  if (value == 0.0) {
    coeffs_.erase(m);
  } else {
    coeffs_[m] = value;
  }
}

std::size_t CoefficientVector::max_index() const {
  return coeffs_.empty() ? 0 : coeffs_.rbegin()->first;
}

double CoefficientVector::coeff_norm_sq() const {
  double s = 0.0;
  for (const auto& [m, c] : coeffs_) s += c * c;
  return s;
}

CoefficientVector CoefficientVector::scaled(double c) const {
  CoefficientVector out(basis_);
  for (const auto& [m, v] : coeffs_) out.set(m, c * v);
  return out;
}

CoefficientVector embed(const SpectralModel& model, const CoefficientVector& g) {
  if (g.basis() != Basis::L2) throw BasisMismatch("embedding expects an L2 coefficient vector");
  CoefficientVector mu(Basis::RKHS);
  for (const auto& [m, c] : g.coeffs()) {
    mu.set(m, std::sqrt(model.eigenvalue(static_cast<long>(m))) * c);
  }
  return mu;
}

CoefficientVector to_rkhs(const SpectralModel& model, const CoefficientVector& v) {
  if (v.basis() == Basis::RKHS) return v;
  CoefficientVector out(Basis::RKHS);
  for (const auto& [m, c] : v.coeffs()) {
    out.set(m, c / std::sqrt(model.eigenvalue(static_cast<long>(m))));
  }
  return out;
}

CoefficientVector to_l2(const SpectralModel& model, const CoefficientVector& v) {
  if (v.basis() == Basis::L2) return v;
  CoefficientVector out(Basis::L2);
  for (const auto& [m, c] : v.coeffs()) {
    out.set(m, c * std::sqrt(model.eigenvalue(static_cast<long>(m))));
  }
  return out;
}

double rkhs_norm_sq(const SpectralModel& model, const CoefficientVector& v) {
  return to_rkhs(model, v).coeff_norm_sq();
}

double evaluate(const SpectralModel& model, const CoefficientVector& v, double x) {
  const CoefficientVector f = to_l2(model, v);
  double value = 0.0;
  for (const auto& [m, c] : f.coeffs()) value += c * model.eigenfunction(static_cast<long>(m), x);
  return value;
}

double embedding_eval(const SpectralModel& model, const CoefficientVector& g, double x) {
  if (g.basis() != Basis::L2) throw BasisMismatch("embedding expects an L2 coefficient vector");
  if (g.max_index() > model.truncation()) {
    throw DomainError("embedding support exceeds the truncation");
  }
  double value = 0.0;
  for (const auto& [m, c] : g.coeffs()) {
    value += model.eigenvalues()[m - 1] * c * model.eigenfunction(static_cast<long>(m), x);
  }
  return value;
}

}  // namespace cvs
