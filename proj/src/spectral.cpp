#include "ostrovsky/spectral.hpp"

#include <cmath>
#include <random>
#include <string>

#include "fft.hpp"
#include "ostrovsky/errors.hpp"
#include "ostrovsky/rng.hpp"

namespace ostrovsky {

GridSpec GridSpec::make(double length, int modes, int points) {
  GridSpec g{length, modes, points == 0 ? 4 * modes : points};
  g.validate();
  return g;
}

void GridSpec::validate() const {
  if (!(length > 0.0) || !std::isfinite(length))
    throw PreconditionError("grid length A must be positive and finite");
  if (modes < 1) throw PreconditionError("grid needs at least one mode (m >= 1)");
  if (points < 4 * modes)
    throw PreconditionError("quadrature points N=" + std::to_string(points) +
                            " must be >= 4m=" + std::to_string(4 * modes));
}

FourierField::FourierField(GridSpec grid)
    : grid_(grid), coeff_(static_cast<std::size_t>(grid.modes)) {
  grid_.validate();
}

FourierField::FourierField(GridSpec grid, std::vector<Complex> coefficients)
    : grid_(grid), coeff_(std::move(coefficients)) {
  grid_.validate();
  if (coeff_.size() != static_cast<std::size_t>(grid_.modes))
    throw PreconditionError("coefficient count does not match grid modes");
}

Complex FourierField::coefficient(int k) const {
  if (k == 0 || std::abs(k) > grid_.modes) return {};
  return k > 0 ? coeff_[k - 1] : std::conj(coeff_[-k - 1]);
}

void FourierField::set_coefficient(int k, Complex value) {
  if (k == 0 || std::abs(k) > grid_.modes)
    throw PreconditionError("wavenumber outside the retained band");
  if (k > 0)
    coeff_[k - 1] = value;
  else
    coeff_[-k - 1] = std::conj(value);
}

std::vector<double> to_physical(const FourierField& f) {
  const GridSpec& g = f.grid();
  std::vector<Complex> half(g.points / 2 + 1);
  for (int k = 1; k <= g.modes; ++k) half[k] = f.coefficients()[k - 1];
  std::vector<double> out(g.points);
  detail::real_fft(g.points).backward(half, out);
  return out;
}

FourierField from_physical(std::span<const double> samples, const GridSpec& grid) {
  grid.validate();
  if (samples.size() != static_cast<std::size_t>(grid.points))
    throw PreconditionError("sample count does not match grid points");
  std::vector<double> in(samples.begin(), samples.end());
  for (double v : in)
    if (!std::isfinite(v)) throw PreconditionError("non-finite sample");
  std::vector<Complex> half(grid.points / 2 + 1);
  detail::real_fft(grid.points).forward(in, half);
  std::vector<Complex> c(grid.modes);
  const double scale = 1.0 / grid.points;
  for (int k = 1; k <= grid.modes; ++k) c[k - 1] = half[k] * scale;
  return FourierField(grid, std::move(c));
}

std::vector<double> grid_points(const GridSpec& grid) {
  std::vector<double> x(grid.points);
  for (int j = 0; j < grid.points; ++j) x[j] = grid.length * j / grid.points;
  return x;
}

FourierField dx(const FourierField& f) {
  FourierField out = f;
  auto c = out.coefficients();
  for (int k = 1; k <= f.modes(); ++k) c[k - 1] *= Complex(0.0, f.grid().wavenumber(k));
  return out;
}

FourierField dx_inv(const FourierField& f) {
  FourierField out = f;
  auto c = out.coefficients();
  for (int k = 1; k <= f.modes(); ++k) c[k - 1] /= Complex(0.0, f.grid().wavenumber(k));
  return out;
}

FourierField project(const FourierField& f, int keep_modes) {
  if (keep_modes <= 0 || keep_modes > f.modes())
    throw PreconditionError("projection index must satisfy 0 < m' <= m");
  FourierField out = f;
  auto c = out.coefficients();
  for (int k = keep_modes + 1; k <= f.modes(); ++k) c[k - 1] = 0.0;
  return out;
}

FourierField resample(const FourierField& f, const GridSpec& grid) {
  if (grid.length != f.grid().length)
    throw PreconditionError("resample requires the same domain length");
  FourierField out(grid);
  const int common = std::min(grid.modes, f.modes());
  for (int k = 1; k <= common; ++k) out.coefficients()[k - 1] = f.coefficients()[k - 1];
  return out;
}

double dispersion(int k, const GridSpec& grid) {
  if (k == 0) throw PreconditionError("dispersion undefined at the zero mode");
  const double xi = grid.wavenumber(k);
  return xi * xi * xi - 1.0 / xi;
}

double sobolev_norm(const FourierField& f, double s) {
  double sum = 0.0;
  for (int k = 1; k <= f.modes(); ++k) {
    const double xi = f.grid().wavenumber(k);
    sum += std::pow(1.0 + xi * xi, s) * std::norm(f.coefficients()[k - 1]);
  }
  return std::sqrt(2.0 * f.grid().length * sum);
}

double l2_norm(const FourierField& f) {
  double sum = 0.0;
  for (Complex c : f.coefficients()) sum += std::norm(c);
  return std::sqrt(2.0 * f.grid().length * sum);
}

double inner_product(const FourierField& f, const FourierField& g) {
  if (!(f.grid() == g.grid())) throw PreconditionError("inner product across grids");
  double sum = 0.0;
  for (int k = 0; k < f.modes(); ++k)
    sum += (f.coefficients()[k] * std::conj(g.coefficients()[k])).real();
  return 2.0 * f.grid().length * sum;
}

double quadrature_l2_squared(const FourierField& f) {
  const auto u = to_physical(f);
  double sum = 0.0;
  for (double v : u) sum += v * v;
  return sum * f.grid().length / f.grid().points;
}

double cubic_integral(const FourierField& f) {
  const auto u = to_physical(f);
  double sum = 0.0;
  for (double v : u) sum += v * v * v;
  return sum * f.grid().length / f.grid().points;
}

double cubic_g(const FourierField& f) { return cubic_integral(f) / 6.0; }

double quadratic_energy(const FourierField& f) {
  double sum = 0.0;
  for (int k = 1; k <= f.modes(); ++k) {
    const double xi = f.grid().wavenumber(k);
    sum += (xi * xi - 1.0 / (xi * xi)) * std::norm(f.coefficients()[k - 1]);
  }
  // 1/2 * A * sum over +-k  ==  A * sum over k > 0.
  return f.grid().length * sum;
}

double hamiltonian(const FourierField& f) { return quadratic_energy(f) + cubic_g(f); }

double positive_quadratic_energy(const FourierField& f) {
  double sum = 0.0;
  for (int k = 1; k <= f.modes(); ++k) {
    const double xi = f.grid().wavenumber(k);
    sum += (xi * xi + 1.0 / (xi * xi)) * std::norm(f.coefficients()[k - 1]);
  }
  return f.grid().length * sum;
}

std::vector<double> to_coordinates(const FourierField& f) {
  const double scale = std::sqrt(2.0 * f.grid().length);
  std::vector<double> a(2 * f.modes());
  for (int k = 0; k < f.modes(); ++k) {
    a[2 * k] = -scale * f.coefficients()[k].imag();
    a[2 * k + 1] = scale * f.coefficients()[k].real();
  }
  return a;
}

FourierField from_coordinates(std::span<const double> a, const GridSpec& grid) {
  if (a.size() != static_cast<std::size_t>(2 * grid.modes))
    throw PreconditionError("coordinate vector must have 2m entries");
  const double scale = 1.0 / std::sqrt(2.0 * grid.length);
  std::vector<Complex> c(grid.modes);
  for (int k = 0; k < grid.modes; ++k) c[k] = Complex(a[2 * k + 1], -a[2 * k]) * scale;
  return FourierField(grid, std::move(c));
}

FourierField trigonometric_mode(const GridSpec& grid, int k, double amplitude, bool sine) {
  FourierField f(grid);
  // cos = (e^{i} + e^{-i})/2, sin = (e^{i} - e^{-i})/(2i)
  f.set_coefficient(k, sine ? Complex(0.0, -amplitude / 2) : Complex(amplitude / 2, 0.0));
  return f;
}

FourierField smooth_random_field(const GridSpec& grid, double k0, double norm,
                                 std::uint64_t seed, std::uint64_t index) {
  if (!(k0 > 0.0)) throw PreconditionError("spectral width k0 must be positive");
  if (!(norm >= 0.0)) throw PreconditionError("target norm must be >= 0");
  Engine rng = make_stream(seed, index);
  std::normal_distribution<double> normal;
  std::vector<double> a(2 * static_cast<std::size_t>(grid.modes));
  for (int k = 1; k <= grid.modes; ++k) {
    const double sd = std::exp(-0.5 * (k / k0) * (k / k0));
    a[2 * (k - 1)] = sd * normal(rng);
    a[2 * (k - 1) + 1] = sd * normal(rng);
  }
  FourierField f = from_coordinates(a, grid);
  const double n = l2_norm(f);
  if (n > 0.0)
    for (Complex& c : f.coefficients()) c *= norm / n;
  return f;
}

}  // namespace ostrovsky
