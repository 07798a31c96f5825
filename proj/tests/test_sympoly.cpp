#include <doctest.h>

#include <cmath>
#include <random>

#include "cvs/errors.hpp"
#include "cvs/sympoly.hpp"
#include "oracles.hpp"

using namespace cvs;
using doctest::Approx;

namespace {

std::vector<double> random_spectrum(std::mt19937_64& gen, std::size_t max_len, double decades) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_real_distribution<double> expo(-decades, 0.0);
  std::vector<double> v(len(gen));
  for (double& x : v) x = std::pow(10.0, expo(gen));
  return v;
}

}  // namespace

TEST_CASE("ESP table small examples") {
  const std::vector<double> l{1.0, 0.5, 0.25};
  const EspTable t(l, 2);
  CHECK(t.value(3, 2) == Approx(0.875));
  CHECK(t.value(3, 0) == 1.0);
  CHECK(t.value(0, 0) == 1.0);
  CHECK(t.value(1, 2) == 0.0);
  CHECK(t.log_value(2, 3) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(EspTable(l, 4), DomainError);
  CHECK_THROWS_AS(EspTable(std::vector<double>{1.0, 0.0}, 1), DomainError);
  CHECK_THROWS_AS(EspTable(std::vector<double>{1.0, -2.0}, 1), DomainError);
}

TEST_CASE("ESP table matches subset enumeration") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto l = random_spectrum(gen, 12, 6.0);
    const EspTable t(l, l.size());
    for (std::size_t i = 0; i <= l.size(); ++i) {
      const std::span<const double> prefix(l.data(), i);
      for (std::size_t k = 0; k <= i; ++k) {
        CHECK(oracle::rel_diff(t.value(i, k), oracle::esp(prefix, k)) < 1e-10);
      }
    }
    // MacLaurin: p_M <= (sum lambda)^M.
    double s = 0.0;
    for (double x : l) s += x;
    CHECK(t.value(l.size(), l.size()) <= std::pow(s, static_cast<double>(l.size())) * (1 + 1e-12));
  }
}

TEST_CASE("normalization constant") {
  const std::vector<double> l{1.0, 0.5, 0.25};
  CHECK(std::exp(VsExpectations(l, 2).log_normalization()) == Approx(1.75));
  const auto model = SpectralModel::sobolev_paper(1, 20);
  CHECK(std::exp(normalization_log_ZN(model, 1)) == Approx(model.trace()));
  const auto small = SpectralModel::geometric(0.5, 6);
  double prod = 1.0;
  for (double s : small.eigenvalues()) prod *= s;
  CHECK(std::exp(normalization_log_ZN(small, 6)) == Approx(720.0 * prod));
}

TEST_CASE("expected leverage closed forms") {
  const auto g = SpectralModel::geometric(0.5, 60);
  CHECK(std::abs(expected_leverage(g, 1, 1) - 0.5) < 1e-15 + std::pow(2.0, -60));

  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto l = random_spectrum(gen, 10, 6.0);
    for (std::size_t N = 1; N <= l.size(); ++N) {
      const VsExpectations ex(l, N);
      double total = 0.0;
      for (std::size_t m = 1; m <= l.size(); ++m) {
        const double tau = ex.leverage(m);
        CHECK(tau >= 0.0);
        CHECK(tau <= 1.0);
        CHECK(std::abs(tau - oracle::leverage(l, m, N)) < 1e-10);
        CHECK(oracle::rel_diff(ex.eig_error(m), oracle::eig_error(l, m, N)) < 1e-9);
        total += tau;
        if (N < l.size()) CHECK(VsExpectations(l, N + 1).leverage(m) >= tau - 1e-12);
      }
      CHECK(total == Approx(static_cast<double>(N)).epsilon(1e-10));
    }
  }

  const auto full = SpectralModel::sobolev_paper(2, 8);
  for (std::size_t m = 1; m <= 8; ++m) {
    CHECK(expected_leverage(full, m, 8) == Approx(1.0));
    CHECK(expected_eig_error(full, m, 8) == 0.0);
  }
}

TEST_CASE("leave-one-out downdate stays accurate on steep spectra") {
  // Spectra decaying like m^-6 or faster lose the downdate to cancellation;
  // the closed forms must still agree with a direct rebuild.
  for (const auto& model : {SpectralModel::sobolev_paper(3, 64), SpectralModel::sobolev_paper(5, 128),
                            SpectralModel::geometric(0.2, 128)}) {
    for (std::size_t N : {1u, 2u, 5u, 8u, 10u, 17u, 30u}) {
      const VsExpectations ex(model, N);
      for (std::size_t m = 1; m <= 12; ++m) {
        const auto rest = oracle::without(model.eigenvalues(), m);
        const EspTable loo(rest, N);
        const double direct =
            model.eigenvalues()[m - 1] * std::exp(loo.log_p(N) - ex.table().log_p(N));
        CHECK(oracle::rel_diff(ex.eig_error(m), direct) < 1e-9);
      }
    }
  }
}

TEST_CASE("expected errors: routes agree, monotone in m, bounded by sigma") {
  const auto g = SpectralModel::geometric(0.5, 200);
  CHECK(expected_eig_error(g, 1, 1) == Approx(0.25));
  for (std::size_t m = 1; m <= 10; ++m) {
    const double s = std::pow(0.5, static_cast<double>(m));
    CHECK(expected_eig_error(g, m, 1) == Approx(s * (1 - s)));
  }
  const auto g20 = SpectralModel::geometric(0.5, 20);
  CHECK(oracle::rel_diff(expected_eig_error(g20, 1, 1), oracle::eig_error(g20.eigenvalues(), 1, 1)) < 1e-12);

  for (const auto& model : {SpectralModel::sobolev_paper(1, 128), SpectralModel::sobolev_paper(3, 128),
                            SpectralModel::geometric(0.7, 128), SpectralModel::sobolev_classical(2, 128)}) {
    for (std::size_t N : {1u, 2u, 3u, 10u, 25u}) {
      const VsExpectations ex(model, N);
      for (std::size_t m = 1; m <= 40; ++m) {
        const double e = ex.eig_error(m);
        CHECK(e <= model.eigenvalues()[m - 1]);
        CHECK(e >= ex.eig_error(m + 1) * (1 - 1e-12));
        // Both routes agree where 1 - tau is not swamped by cancellation.
        if (ex.leverage(m) < 0.5) CHECK(oracle::rel_diff(e, ex.eig_error_via_leverage(m)) < 1e-10);
      }
    }
  }
}

TEST_CASE("expected embedding error") {
  const auto model = SpectralModel::sobolev_paper(2, 64);
  const std::size_t N = 4;
  const VsExpectations ex(model, N);
  CHECK(expected_embedding_error(model, CoefficientVector::unit(Basis::L2, 1), N) == Approx(ex.eig_error(1)));
  CoefficientVector g(Basis::L2, {{1, 0.5}, {2, 0.5}, {3, 0.5}, {4, 0.5}});
  CHECK(expected_embedding_error(model, g, N) ==
        Approx((ex.eig_error(1) + ex.eig_error(2) + ex.eig_error(3) + ex.eig_error(4)) / 4));
  CoefficientVector h(Basis::L2, {{2, 0.6}, {9, -0.8}});
  CHECK(expected_embedding_error(model, h, N) <= ex.eig_error(1));
  CHECK_THROWS_AS(expected_embedding_error(model, CoefficientVector::unit(Basis::RKHS, 1), N), BasisMismatch);
}

TEST_CASE("cross leverage target") {
  CHECK(expected_cross_leverage(1, 2) == 0.0);
  CHECK(expected_cross_leverage(5, 3) == 0.0);
  CHECK_THROWS_AS(expected_cross_leverage(2, 2), DomainError);
}

TEST_CASE("mixture weights and delta_N") {
  for (std::size_t M = 2; M <= 10; ++M) {
    const auto model = SpectralModel::sobolev_paper(1, M);
    for (std::size_t N = 1; N <= M; ++N) {
      const VsExpectations ex(model, N);
      double total = 0.0;
      oracle::for_each_subset(M, N, [&](const auto& U) { total += ex.mixture_weight(U); });
      CHECK(total == Approx(1.0).epsilon(1e-12));
      CHECK(delta_N(model, N) <= delta_N_bound(model, N) * (1 + 1e-12));
    }
    CHECK(delta_N(model, M) == Approx(1.0));
  }
  const auto g = SpectralModel::geometric(0.5, 128);
  const double p2 = std::exp(VsExpectations(g, 2).table().log_p(2));
  CHECK(delta_N(g, 2) == Approx(0.5 * 0.25 / p2));
  CHECK(delta_N_bound(g, 2) == Approx(1.0));
  CHECK(delta_N(g, 2) <= 1.0);

  const std::vector<std::size_t> wrong{1, 2, 3};
  CHECK_THROWS_AS(mixture_weight(g, wrong, 2), DomainError);
  const std::vector<std::size_t> repeated{2, 2};
  CHECK_THROWS_AS(mixture_weight(g, repeated, 2), DomainError);
}

TEST_CASE("log-domain helpers") {
  CHECK(log_add(std::log(2.0), std::log(3.0)) == Approx(std::log(5.0)));
  CHECK(log_sub(std::log(5.0), std::log(3.0)) == Approx(std::log(2.0)));
  CHECK(std::isnan(log_sub(0.0, 1.0)));
}
