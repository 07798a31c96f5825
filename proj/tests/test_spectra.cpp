#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "cvs/errors.hpp"
#include "cvs/gram.hpp"
#include "cvs/spectra.hpp"
#include "oracles.hpp"

using namespace cvs;
using doctest::Approx;

TEST_CASE("eigenvalues per family") {
  CHECK(SpectralModel::sobolev_paper(3, 10).eigenvalue(2) == 0.015625);
  CHECK(SpectralModel::geometric(0.5, 10).eigenvalue(1) == 0.5);
  const auto classical = SpectralModel::sobolev_classical(2, 10);
  CHECK(classical.eigenvalue(1) == 1.0);
  CHECK(classical.eigenvalue(2) == 1.0);
  CHECK(classical.eigenvalue(3) == 1.0);
  CHECK(classical.eigenvalue(4) == Approx(1.0 / 16));
  CHECK(classical.eigenvalue(5) == Approx(1.0 / 16));
  const auto custom = SpectralModel::custom({1.0, 0.3, 0.1}, 3);
  CHECK(custom.eigenvalue(2) == 0.3);

  for (const auto& m : {SpectralModel::sobolev_paper(1, 5), SpectralModel::geometric(0.3, 5),
                        classical, custom}) {
    CHECK_THROWS_AS(m.eigenvalue(0), DomainError);
    CHECK_THROWS_AS(m.eigenvalue(-3), DomainError);
  }
}

TEST_CASE("eigenvalues are positive and non-increasing") {
  for (const auto& m : {SpectralModel::sobolev_paper(2, 300), SpectralModel::geometric(0.7, 300),
                        SpectralModel::sobolev_classical(1, 300)}) {
    for (long i = 1; i < 300; ++i) {
      CHECK(m.eigenvalue(i) > 0.0);
      CHECK(m.eigenvalue(i) >= m.eigenvalue(i + 1));
    }
  }
  CHECK_THROWS_AS(SpectralModel::custom({0.5, 0.7}, 2), DomainError);
  CHECK_THROWS_AS(SpectralModel::custom({0.5, -1.0}, 2), DomainError);
  CHECK_THROWS_AS(SpectralModel::geometric(1.0, 2), DomainError);
  CHECK_THROWS_AS(SpectralModel::sobolev_paper(0, 2), DomainError);
}

TEST_CASE("eigenfunctions") {
  const auto m = SpectralModel::sobolev_paper(1, 20);
  CHECK(m.eigenfunction(1, 0.37) == 1.0);
  CHECK(m.eigenfunction(2, 0.0) == Approx(std::numbers::sqrt2));
  CHECK(m.eigenfunction(3, 0.25) == Approx(std::numbers::sqrt2));
  CHECK_THROWS_AS(m.eigenfunction(2, -0.1), DomainError);
  CHECK_THROWS_AS(m.eigenfunction(2, 1.1), DomainError);

  std::vector<double> all(20);
  m.eigenfunctions(0.61, all);
  for (long i = 1; i <= 20; ++i) CHECK(all[static_cast<std::size_t>(i - 1)] == Approx(m.eigenfunction(i, 0.61)));

  const double e23 = oracle::simpson([&](double x) { return m.eigenfunction(2, x) * m.eigenfunction(3, x); }, 0, 1);
  CHECK(std::abs(e23) < 1e-10);
}

TEST_CASE("basis is orthonormal under quadrature") {
  const auto m = SpectralModel::sobolev_paper(1, 20);
  for (long i = 1; i <= 20; ++i) {
    for (long j = i; j <= 20; ++j) {
      const double v = oracle::simpson(
          [&](double x) { return m.eigenfunction(i, x) * m.eigenfunction(j, x); }, 0, 1, 4000);
      CHECK(std::abs(v - (i == j ? 1.0 : 0.0)) < 1e-8);
    }
  }
}

TEST_CASE("kernel agrees with the Mercer sum") {
  const auto m = SpectralModel::sobolev_paper(3, 200);
  CHECK(m.kernel(0.1, 0.9) == Approx(oracle::mercer_kernel(m, 0.1, 0.9)).epsilon(1e-12));
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& model : {SpectralModel::geometric(0.5, 37), SpectralModel::sobolev_classical(2, 41),
                            SpectralModel::custom({1, 0.5, 0.5, 0.1, 0.1, 0.01}, 6)}) {
    for (int t = 0; t < 50; ++t) {
      const double x = u(gen), y = u(gen);
      CHECK(std::abs(model.kernel(x, y) - oracle::mercer_kernel(model, x, y)) < 1e-12);
      CHECK(model.kernel(x, y) == model.kernel(y, x));
    }
  }
}

TEST_CASE("Bernoulli closed form of the classical Sobolev kernel") {
  const auto s1 = SpectralModel::sobolev_classical(1, 401);
  CHECK(s1.kernel_closed_form(0.3, 0.3) == Approx(1.0 + std::numbers::pi * std::numbers::pi / 3.0));
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 1; s <= 3; ++s) {
    for (std::size_t M : {21u, 101u, 400u}) {
      const auto model = SpectralModel::sobolev_classical(s, M);
      const double slack = 2.0 * model.tail_mass(M).hi;
      for (int t = 0; t < 30; ++t) {
        const double x = u(gen), y = u(gen);
        CHECK(std::abs(model.kernel_closed_form(x, y) - model.kernel(x, y)) <= slack + 1e-12);
      }
    }
  }
  CHECK_THROWS_AS(SpectralModel::sobolev_paper(1, 10).kernel_closed_form(0.1, 0.2), UnsupportedFamily);
}

TEST_CASE("Gram matrices are positive semidefinite") {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto model = SpectralModel::sobolev_paper(1, 64);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(12);
    for (double& v : x) v = u(gen);
    const Eigen::MatrixXd K = gram_matrix(model, x);
    const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues().minCoeff();
    CHECK(lo >= -1e-10 * K.trace());
  }
}

TEST_CASE("tail mass") {
  CHECK(SpectralModel::geometric(0.5, 10).tail_mass(3).hi == Approx(0.125));
  CHECK(SpectralModel::geometric(0.5, 10).tail_mass(3).lo == Approx(0.125));
  CHECK(SpectralModel::custom({1, 0.5, 0.2}, 3).tail_mass(3).hi == 0.0);
  CHECK(SpectralModel::custom({1, 0.5, 0.2}, 3).tail_mass(1).hi == Approx(0.7));

  double direct = 0.0;  // sum_{m > 10} m^-2 = pi^2/6 - H_10^(2)
  for (int m = 1; m <= 10; ++m) direct += 1.0 / (m * m);
  direct = std::numbers::pi * std::numbers::pi / 6.0 - direct;
  const Interval t = SpectralModel::sobolev_paper(1, 10).tail_mass(10);
  CHECK(t.contains(direct));
  CHECK(direct == Approx(0.095166).epsilon(1e-5));

  // Brute-force partial sums (plus an integral remainder) for other cases.
  for (int s = 1; s <= 4; ++s) {
    const auto paper = SpectralModel::sobolev_paper(s, 10);
    const auto classical = SpectralModel::sobolev_classical(s, 10);
    for (std::size_t M : {1u, 2u, 5u, 10u, 31u}) {
      double pt = 0.0, ct = 0.0;
      for (long m = static_cast<long>(M) + 1; m <= 2000000; ++m) {
        pt += paper.eigenvalue(m);
        ct += classical.eigenvalue(m);
      }
      if (s >= 2) {
        CHECK(paper.tail_mass(M).contains(pt));
        CHECK(classical.tail_mass(M).contains(ct));
      } else {
        // Remainder beyond 2e6 is ~5e-7 for s = 1; lower end still applies.
        CHECK(paper.tail_mass(M).hi >= pt);
        CHECK(classical.tail_mass(M).hi >= ct);
      }
    }
  }
  CHECK_THROWS_AS(SpectralModel::sobolev_paper(1, 10).tail_mass(0), DomainError);
}

TEST_CASE("model descriptor JSON round trip") {
  const auto m = SpectralModel::sobolev_paper(3, 64);
  const auto back = SpectralModel::from_json(m.to_json());
  CHECK(back.family() == Family::SobolevPaper);
  CHECK(back.smoothness() == 3);
  CHECK(back.truncation() == 64);
  CHECK(m.tag() == "sobolev_paper_s3");

  const auto g = SpectralModel::from_json(nlohmann::json::parse(R"({"family":"geometric","param":0.2})"));
  CHECK(g.alpha() == 0.2);
  CHECK(g.truncation() == default_truncation(1));

  const auto c = SpectralModel::from_json(nlohmann::json::parse(R"({"family":"custom","param":[1,0.5,0.25]})"));
  CHECK(c.truncation() == 3);
  CHECK(c.eigenvalue(3) == 0.25);

  CHECK_THROWS(SpectralModel::from_json(nlohmann::json::parse(R"({"family":"gaussian","param":1})")));
  CHECK_THROWS(SpectralModel::from_json(nlohmann::json::parse(R"({"family":"geometric","param":0.5,"extra":1})")));
  CHECK_THROWS(SpectralModel::from_json(nlohmann::json::parse(R"({"family":"geometric","param":1.5})")));
  CHECK(default_truncation(10) == 128);
  CHECK(default_truncation(50) == 200);
}

TEST_CASE("coefficient vectors, embeddings and norms") {
  const auto model = SpectralModel::sobolev_paper(2, 16);
  const auto e3 = CoefficientVector::unit(Basis::L2, 3);
  for (double x : {0.0, 0.2, 0.77}) {
    CHECK(embedding_eval(model, e3, x) == Approx(model.eigenvalue(3) * model.eigenfunction(3, x)));
    CHECK(embedding_eval(model, CoefficientVector(Basis::L2), x) == 0.0);
  }
  CHECK_THROWS_AS(embedding_eval(model, CoefficientVector::unit(Basis::RKHS, 1), 0.5), BasisMismatch);
  CHECK_THROWS_AS(embed(model, CoefficientVector::unit(Basis::RKHS, 1)), BasisMismatch);

  CoefficientVector g(Basis::L2, {{1, 0.3}, {2, -0.5}, {7, 1.2}});
  const auto mu = embed(model, g);
  CHECK(mu.basis() == Basis::RKHS);
  double expected = 0.0;
  for (const auto& [m, c] : g.coeffs()) expected += model.eigenvalue(static_cast<long>(m)) * c * c;
  CHECK(rkhs_norm_sq(model, mu) == Approx(expected));
  CHECK(mu.coeff_norm_sq() == Approx(expected));
  for (double x : {0.1, 0.5, 0.93}) {
    CHECK(evaluate(model, mu, x) == Approx(embedding_eval(model, g, x)));
    CHECK(evaluate(model, to_l2(model, mu), x) == Approx(evaluate(model, mu, x)));
  }
  const auto back = to_rkhs(model, to_l2(model, mu));
  for (const auto& [m, c] : mu.coeffs()) CHECK(back[m] == Approx(c));

  // ||mu_g||^2 equals the Gram-based quadratic form g^T diag(sigma) g.
  CHECK(rkhs_norm_sq(model, embed(model, e3)) == Approx(model.eigenvalue(3)));

  CoefficientVector v;
  v.set(4, 2.0);
  v.set(4, 0.0);
  CHECK(v.empty());
  CHECK(v.max_index() == 0);
}
