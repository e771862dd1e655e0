#pragma once

// Zero-mean periodic fields on [0, A) represented by their truncated
// Fourier coefficients, plus the multipliers and conserved functionals of
//
//     u_t - u_xxx + dx^{-1} u + u u_x = 0.
//
// Conventions used throughout the library:
//
//   u(x) = sum_{0 < |k| <= m} c_k exp(i xi_k x),   xi_k = 2 pi k / A,
//
// with c_{-k} = conj(c_k). Only c_1 ... c_m are stored. The L2 pairing is
// the physical one, (u, v) = int_0^A u v dx = A sum_{k != 0} c_k conj(d_k),
// so l2_norm(cos) = sqrt(pi) on A = 2 pi. The real coordinates a_j used by
// the Gaussian measures are the coefficients in the orthonormal basis
//
//   e_{2k-1} = sqrt(2/A) sin(xi_k x),   e_{2k} = sqrt(2/A) cos(xi_k x),
//
// stored 0-based as a[2(k-1)] (sine) and a[2(k-1)+1] (cosine).

#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace ostrovsky {

using Complex = std::complex<double>;

struct GridSpec {
  double length = 2.0 * std::numbers::pi;  // A
  int modes = 8;                           // m
  int points = 32;                         // N, quadrature points

  /// Validated constructor. points == 0 selects the alias-free N = 4m.
  static GridSpec make(double length, int modes, int points = 0);

  /// Same length, different truncation (N = 4m').
  GridSpec with_modes(int modes) const { return make(length, modes, 0); }

  double wavenumber(int k) const {
    return 2.0 * std::numbers::pi * k / length;
  }

  void validate() const;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

class FourierField {
 public:
  explicit FourierField(GridSpec grid);
  FourierField(GridSpec grid, std::vector<Complex> coefficients);

  const GridSpec& grid() const { return grid_; }
  int modes() const { return grid_.modes; }

  /// c_k for 0 < |k| <= m (Hermitian extension for k < 0); zero outside.
  Complex coefficient(int k) const;
  void set_coefficient(int k, Complex value);

  /// c_1 ... c_m.
  std::span<const Complex> coefficients() const { return coeff_; }
  std::span<Complex> coefficients() { return coeff_; }

  friend bool operator==(const FourierField&, const FourierField&) = default;

 private:
  GridSpec grid_;
  std::vector<Complex> coeff_;
};

// Transforms ------------------------------------------------------------------

std::vector<double> to_physical(const FourierField& f);
/// Samples at the grid's N points x_j = j A / N.
FourierField from_physical(std::span<const double> samples, const GridSpec& grid);

/// Quadrature nodes x_j = j A / N.
std::vector<double> grid_points(const GridSpec& grid);

// Multipliers -----------------------------------------------------------------

FourierField dx(const FourierField& f);
FourierField dx_inv(const FourierField& f);
/// Zeroes |k| > m'. Throws PreconditionError unless 0 < m' <= m.
FourierField project(const FourierField& f, int keep_modes);
/// Re-expresses f on a grid with a different number of retained modes,
/// truncating or zero-padding. Same length A required.
FourierField resample(const FourierField& f, const GridSpec& grid);

/// m(xi) = xi^3 - 1/xi at xi = 2 pi k / A; the evolution is
/// c_k(t) = exp(-i m(xi_k) t) c_k(0) for the linear part.
double dispersion(int k, const GridSpec& grid);

// Functionals -----------------------------------------------------------------

double l2_norm(const FourierField& f);
/// sqrt(A sum <xi_k>^{2s} |c_k|^2); sobolev_norm(f, 0) == l2_norm(f).
double sobolev_norm(const FourierField& f, double s);
double inner_product(const FourierField& f, const FourierField& g);
/// int_0^A u^2 dx by trapezoidal quadrature on the physical samples.
double quadrature_l2_squared(const FourierField& f);
/// int_0^A u^3 dx, alias-free for N > 3m.
double cubic_integral(const FourierField& f);

/// Cubic part of the conserved Hamiltonian: (1/6) int u^3.
double cubic_g(const FourierField& f);
/// 1/2 int u_x^2 - 1/2 int (dx^{-1} u)^2.
double quadratic_energy(const FourierField& f);
/// H(u) = quadratic_energy(u) + cubic_g(u); conserved by the flow above.
double hamiltonian(const FourierField& f);
/// 1/2 (S u, u) with S = -Delta + Delta^{-1} positive: 1/2 int u_x^2 + 1/2 int (dx^{-1} u)^2.
/// Not conserved; it is the quadratic form of the positive covariance ladder.
double positive_quadratic_energy(const FourierField& f);

// Coordinates in the real orthonormal basis ----------------------------------

std::vector<double> to_coordinates(const FourierField& f);
FourierField from_coordinates(std::span<const double> a, const GridSpec& grid);

/// Single real mode amplitude * cos(xi_k x) (or sin when `sine`).
FourierField trigonometric_mode(const GridSpec& grid, int k, double amplitude,
                                bool sine = false);

/// Random smooth field: a_j ~ N(0, exp(-(k/k0)^2)) for the two coordinates of
/// wavenumber k, rescaled to ||u|| = norm. Stream (seed, index).
FourierField smooth_random_field(const GridSpec& grid, double k0, double norm,
                                 std::uint64_t seed, std::uint64_t index = 0);

}  // namespace ostrovsky
