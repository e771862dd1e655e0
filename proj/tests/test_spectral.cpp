#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "ostrovsky/errors.hpp"
#include "ostrovsky/spectral.hpp"

using namespace ostrovsky;
using std::numbers::pi;

namespace {

const GridSpec kTorus = GridSpec::make(2 * pi, 8);

FourierField random_field(const GridSpec& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  FourierField f(g);
  for (auto& c : f.coefficients()) c = Complex(n(rng), n(rng));
  return f;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK(kTorus.points == 32);
  CHECK_THROWS_AS(GridSpec::make(0.0, 4), PreconditionError);
  CHECK_THROWS_AS(GridSpec::make(2 * pi, 0), PreconditionError);
  CHECK_THROWS_AS(GridSpec::make(2 * pi, 8, 31), PreconditionError);
}

TEST_CASE("to_physical matches a direct evaluation") {
  const auto zero = to_physical(FourierField(kTorus));
  for (double v : zero) CHECK(v == 0.0);

  FourierField c(kTorus);
  c.set_coefficient(1, 0.5);
  const auto xs = grid_points(kTorus);
  const auto cs = to_physical(c);
  for (std::size_t j = 0; j < xs.size(); ++j) CHECK(cs[j] == doctest::Approx(std::cos(xs[j])).epsilon(1e-14));

  const auto f = random_field(kTorus, 3);
  const auto u = to_physical(f);
  for (std::size_t j = 0; j < xs.size(); ++j)
    CHECK(std::abs(u[j] - oracle::eval(f, xs[j])) < 1e-12);
}

TEST_CASE("from_physical") {
  const auto xs = grid_points(kTorus);
  std::vector<double> s(xs.size(), 3.0);
  const auto flat = from_physical(s, kTorus);
  for (auto c : flat.coefficients()) CHECK(std::abs(c) < 1e-15);

  for (std::size_t j = 0; j < xs.size(); ++j) s[j] = std::cos(xs[j]);
  const auto f = from_physical(s, kTorus);
  CHECK(std::abs(f.coefficient(1) - Complex(0.5)) < 1e-15);
  CHECK(std::abs(f.coefficient(-1) - Complex(0.5)) < 1e-15);
  for (int k = 2; k <= 8; ++k) CHECK(std::abs(f.coefficient(k)) < 1e-15);

  for (std::size_t j = 0; j < xs.size(); ++j) s[j] = std::cos(9 * xs[j]);
  const auto high = from_physical(s, kTorus);
  for (auto c : high.coefficients()) CHECK(std::abs(c) < 1e-14);

  const auto g = random_field(kTorus, 5);
  CHECK(oracle::max_diff(from_physical(to_physical(g), kTorus), g) < 1e-12);

  s[3] = std::nan("");
  CHECK_THROWS_AS(from_physical(s, kTorus), PreconditionError);
}

TEST_CASE("dx and dx_inv") {
  const auto c = trigonometric_mode(kTorus, 1, 1.0);
  const auto s = trigonometric_mode(kTorus, 1, 1.0, true);
  CHECK(oracle::max_diff(dx_inv(c), s) < 1e-15);
  CHECK(oracle::max_diff(dx(s), c) < 1e-15);
  const auto f = random_field(GridSpec::make(3.7, 12), 7);
  CHECK(oracle::max_diff(dx_inv(dx(f)), f) < 1e-12);
  CHECK(oracle::max_diff(dx(dx_inv(f)), f) < 1e-12);
}

TEST_CASE("project") {
  const auto f = random_field(kTorus, 9);
  CHECK(project(f, 8) == f);
  auto two = trigonometric_mode(kTorus, 1, 1.0);
  two.set_coefficient(2, 0.5);
  CHECK(oracle::max_diff(project(two, 1), trigonometric_mode(kTorus, 1, 1.0)) == 0.0);
  CHECK(l2_norm(project(f, 3)) <= l2_norm(f));
  CHECK(project(project(f, 3), 3) == project(f, 3));
  const auto g = random_field(kTorus, 10);
  CHECK(inner_product(project(f, 4), g) == doctest::Approx(inner_product(f, project(g, 4))));
  CHECK_THROWS_AS(project(f, 0), PreconditionError);
}

TEST_CASE("dispersion") {
  CHECK(dispersion(1, kTorus) == 0.0);
  CHECK(dispersion(2, kTorus) == 7.5);
  for (int k = 1; k <= 8; ++k) CHECK(dispersion(-k, kTorus) == -dispersion(k, kTorus));
  CHECK_THROWS_AS(dispersion(0, kTorus), PreconditionError);
}

TEST_CASE("norms") {
  CHECK(l2_norm(FourierField(kTorus)) == 0.0);
  const auto c = trigonometric_mode(kTorus, 1, 1.0);
  CHECK(l2_norm(c) == doctest::Approx(std::sqrt(pi)).epsilon(1e-15));
  CHECK(sobolev_norm(c, 0.0) == l2_norm(c));

  const auto f = random_field(GridSpec::make(5.0, 10), 11);
  CHECK(sobolev_norm(f, -0.5) <= sobolev_norm(f, 0.0));
  CHECK(sobolev_norm(f, 0.0) <= sobolev_norm(f, 1.0));

  // Parseval against an independent quadrature of u^2.
  const double quad = oracle::integrate(f, [](double u) { return u * u; }, 50);
  CHECK(std::abs(l2_norm(f) * l2_norm(f) - quad) <= 1e-10 * quad);
  CHECK(std::abs(quadrature_l2_squared(f) - quad) <= 1e-10 * quad);
}

TEST_CASE("cubic functionals and energies") {
  const FourierField zero(kTorus);
  CHECK(hamiltonian(zero) == 0.0);
  CHECK(cubic_g(zero) == 0.0);

  const auto c = trigonometric_mode(kTorus, 1, 1.0);
  CHECK(std::abs(cubic_g(c)) < 1e-15);
  CHECK(positive_quadratic_energy(c) == doctest::Approx(pi).epsilon(1e-14));
  // On cos(x) the dispersive and rotational energies cancel.
  CHECK(std::abs(hamiltonian(c)) < 1e-14);

  const auto f = random_field(GridSpec::make(2 * pi, 6), 13);
  const double cube = oracle::integrate(f, [](double u) { return u * u * u; }, 40);
  CHECK(cubic_integral(f) == doctest::Approx(cube).epsilon(1e-12));
  CHECK(cubic_g(f) == doctest::Approx(cube / 6.0).epsilon(1e-12));

  // quadratic_energy = 1/2 int u_x^2 - 1/2 int (dx^-1 u)^2, by quadrature.
  const auto ux = dx(f), w = dx_inv(f);
  const double e = 0.5 * oracle::integrate(ux, [](double u) { return u * u; }, 40) -
                   0.5 * oracle::integrate(w, [](double u) { return u * u; }, 40);
  CHECK(quadratic_energy(f) == doctest::Approx(e).epsilon(1e-12));
  CHECK(hamiltonian(f) == doctest::Approx(e + cube / 6.0).epsilon(1e-12));
  CHECK(positive_quadratic_energy(f) >= 0.0);
}

TEST_CASE("real coordinates") {
  const auto f = random_field(GridSpec::make(3.0, 5), 17);
  const auto a = to_coordinates(f);
  REQUIRE(a.size() == 10);
  double s = 0.0;
  for (double x : a) s += x * x;
  CHECK(s == doctest::Approx(l2_norm(f) * l2_norm(f)).epsilon(1e-13));
  CHECK(oracle::max_diff(from_coordinates(a, f.grid()), f) < 1e-14);

  // e_1 = sqrt(2/A) sin(xi_1 x) has a_0 = 1.
  std::vector<double> e(10, 0.0);
  e[0] = 1.0;
  const auto u = from_coordinates(e, f.grid());
  const double x = 0.4;
  CHECK(oracle::eval(u, x) ==
        doctest::Approx(std::sqrt(2.0 / 3.0) * std::sin(2 * pi * x / 3.0)).epsilon(1e-14));
}

TEST_CASE("smooth_random_field") {
  const auto g = GridSpec::make(2 * pi, 32);
  const auto f = smooth_random_field(g, 4.0, 1.0, 7, 3);
  CHECK(l2_norm(f) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f == smooth_random_field(g, 4.0, 1.0, 7, 3));
  CHECK(!(f == smooth_random_field(g, 4.0, 1.0, 7, 4)));
  CHECK(std::abs(f.coefficient(32)) < 1e-12);
}
