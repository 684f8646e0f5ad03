#include <cmath>

#include "doctest.h"
#include "gtv/errors.hpp"
#include "gtv/legendre.hpp"
#include "gtv/sphere.hpp"

using namespace gtv;

TEST_CASE("eigenspace multiplicities") {
  CHECK(multiplicity(3, 0) == 1);
  CHECK(multiplicity(3, 5) == 11);
  CHECK(multiplicity(2, 7) == 2);
  CHECK(multiplicity(2, 0) == 1);
  CHECK_THROWS_AS(multiplicity(1, 3), InputError);
  for (int n = 0; n <= 100; ++n) CHECK(multiplicity(3, n) == 2 * n + 1);
  // N_4(n) = (n+1)^2
  for (int n = 0; n <= 50; ++n) CHECK(multiplicity(4, n) == (n + 1) * (n + 1));
}

TEST_CASE("multiplicity grows like n^(d-2)") {
  for (int d : {2, 3, 4}) {
    const double ratio = double(multiplicity(d, 2000)) / double(multiplicity(d, 1000));
    CHECK(ratio == doctest::Approx(std::pow(2.0, d - 2)).epsilon(2e-3));
  }
}

TEST_CASE("legendre recurrence values") {
  auto p = legendre_all(4, 0.5);
  REQUIRE(p.size() == 5);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == doctest::Approx(0.5));
  CHECK(p[2] == doctest::Approx(-0.125));
  CHECK(p[3] == doctest::Approx((5 * 0.125 - 3 * 0.5) / 2));
  CHECK(p[4] == doctest::Approx((35 * 0.0625 - 30 * 0.25 + 3) / 8));
  for (double v : legendre_all(200, 1.0)) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS_AS(legendre_all(3, 1.01), InputError);
}

TEST_CASE("legendre polynomials are bounded by one") {
  for (int i = 0; i <= 1000; ++i) {
    const double t = -1.0 + 2.0 * i / 1000.0;
    for (double v : legendre_all(64, t)) CHECK(std::abs(v) <= 1.0 + 1e-13);
  }
}

TEST_CASE("gauss-legendre rules") {
  auto q1 = gauss_legendre(1);
  REQUIRE(q1.size() == 1);
  CHECK(std::abs(q1.nodes[0]) < 1e-15);
  CHECK(q1.weights[0] == doctest::Approx(2.0));

  auto q2 = gauss_legendre(2);
  CHECK(q2.nodes[0] == doctest::Approx(-1 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(q2.nodes[1] == doctest::Approx(1 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(q2.weights[0] == doctest::Approx(1.0));
  CHECK(q2.weights[1] == doctest::Approx(1.0));

  auto q3 = gauss_legendre(3);
  double s = 0.0;
  for (std::size_t i = 0; i < q3.size(); ++i) s += q3.weights[i] * std::pow(q3.nodes[i], 4);
  CHECK(s == doctest::Approx(0.4).epsilon(1e-15));

  CHECK_THROWS_AS(gauss_legendre(0), InputError);

  for (int q : {5, 50, 600}) {
    auto r = gauss_legendre(q);
    double w = 0.0;
    for (double x : r.weights) {
      CHECK(x > 0.0);
      w += x;
    }
    CHECK(std::abs(w - 2.0) < 1e-12);
    // exact for degree 2q - 1
    double m = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) m += r.weights[i] * std::pow(r.nodes[i], 2 * (q - 1));
    CHECK(m == doctest::Approx(2.0 / (2 * q - 1)).epsilon(1e-12));
  }
}

TEST_CASE("mapped rule integrates on an interval") {
  auto r = gauss_legendre(6).mapped(1.0, 3.0);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * r.nodes[i] * r.nodes[i];
  CHECK(s == doctest::Approx((27.0 - 1.0) / 3.0).epsilon(1e-14));
}

TEST_CASE("legendre orthogonality by quadrature") {
  auto q = gauss_legendre(80);
  for (int m = 0; m <= 20; ++m)
    for (int n = 0; n <= 20; ++n) {
      double s = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        auto p = legendre_all(20, q.nodes[i]);
        s += q.weights[i] * p[m] * p[n];
      }
      const double expect = m == n ? 2.0 / (2 * n + 1) : 0.0;
      CHECK(std::abs(s - expect) < 1e-10);
    }
}

TEST_CASE("fourier-legendre of elementary functions") {
  auto one = fourier_legendre([](double) { return 1.0; }, 10, 20);
  CHECK(one.coeffs[0] == doctest::Approx(4 * kPi).epsilon(1e-14));
  for (int n = 1; n <= 10; ++n) CHECK(std::abs(one.coeffs[n]) < 1e-12);

  auto lin = fourier_legendre([](double t) { return t; }, 10, 20);
  CHECK(lin.coeffs[1] == doctest::Approx(4 * kPi / 3).epsilon(1e-14));
  for (int n = 0; n <= 10; ++n)
    if (n != 1) CHECK(std::abs(lin.coeffs[n]) < 1e-12);

  CHECK_THROWS_AS(fourier_legendre([](double) { return 1.0; }, 39, 20), ConfigurationError);
  CHECK_NOTHROW(fourier_legendre([](double) { return 1.0; }, 38, 20));
}

TEST_CASE("resynthesis of single modes") {
  LegendreSeries s;
  s.coeffs = {4 * kPi};
  for (double t : {-1.0, -0.3, 0.0, 0.8, 1.0}) CHECK(resynthesize(s, t) == doctest::Approx(1.0));
  LegendreSeries l;
  l.coeffs = {0.0, 4 * kPi / 3};
  for (double t : {-1.0, -0.3, 0.0, 0.8, 1.0}) CHECK(resynthesize(l, t) == doctest::Approx(t));
  CHECK_THROWS_AS(resynthesize(l, 1.5), InputError);
  CHECK(l(0.25) == doctest::Approx(0.25));
}

TEST_CASE("transform and resynthesis invert each other on polynomials") {
  auto f = [](double t) { return 0.3 - 1.2 * t + 2.0 * std::pow(t, 5) - 0.7 * std::pow(t, 11); };
  auto s = fourier_legendre(f, 11, 12);
  for (int i = 0; i <= 200; ++i) {
    const double t = -1.0 + i / 100.0;
    CHECK(std::abs(resynthesize(s, t) - f(t)) < 1e-10);
  }
}

TEST_CASE("split quadrature handles a kink") {
  // (t - 0.5)_+^2 has a kink in its second derivative at 0.5
  auto f = [](double t) { return t > 0.5 ? (t - 0.5) * (t - 0.5) : 0.0; };
  auto plain = fourier_legendre(f, 0, 8);
  auto split = fourier_legendre(f, 0, 8, 0.5);
  const double exact = 2 * kPi * std::pow(0.5, 3) / 3;
  CHECK(split.coeffs[0] == doctest::Approx(exact).epsilon(1e-14));
  CHECK(std::abs(plain.coeffs[0] - exact) > std::abs(split.coeffs[0] - exact));
}
