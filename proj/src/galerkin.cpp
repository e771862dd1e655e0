#include "ostrovsky/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fft.hpp"
#include "ostrovsky/errors.hpp"

namespace ostrovsky {
namespace {

struct PhiValues {
  Complex p1, p2, p3;
};

// phi_k(z) = sum_j z^j / (j + k)!. The Taylor branch avoids the
// cancellation in (e^z - 1 - z - z^2/2) / z^3 near z = 0, which matters
// here because m(xi_1) = 0 on the default domain.
PhiValues phi_functions(Complex z) {
  if (std::abs(z) < 1.0) {
    PhiValues r{};
    Complex power = 1.0;
    double fact = 1.0;  // (j+1)!
    for (int j = 0; j < 24; ++j) {
      fact *= (j + 1);
      r.p1 += power / fact;
      r.p2 += power / (fact * (j + 2));
      r.p3 += power / (fact * (j + 2) * (j + 3));
      power *= z;
    }
    return r;
  }
  const Complex e = std::exp(z);
  PhiValues r;
  r.p1 = (e - 1.0) / z;
  r.p2 = (r.p1 - 1.0) / z;
  r.p3 = (r.p2 - 0.5) / z;
  return r;
}

const double kSqrt3_6 = std::sqrt(3.0) / 6.0;
const double kGaussNode1 = 0.5 - kSqrt3_6;
const double kGaussNode2 = 0.5 + kSqrt3_6;
constexpr int kGaussMaxIterations = 64;

int quadrature_points(const GridSpec& g, bool dealias) {
  return dealias ? g.points : 2 * g.modes + 2;
}

void check_finite_state(std::span<const Complex> c, double t) {
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double a = std::abs(c[k]);
    if (!std::isfinite(a) || a > kBlowUpThreshold)
      throw BlowUpError(t, "state blew up at t=" + std::to_string(t) + " (mode " +
                               std::to_string(k + 1) + ")");
  }
}

// -1/2 P_m dx(u^2) written into `out`; scratch buffers supplied by caller.
void nonlinear_rhs(const GridSpec& g, int quad, const detail::RealFft& fft,
                   std::span<const Complex> c, std::span<Complex> spectrum,
                   std::span<double> physical, std::span<Complex> out) {
  std::fill(spectrum.begin(), spectrum.end(), Complex{});
  for (int k = 1; k <= g.modes; ++k) spectrum[k] = c[k - 1];
  fft.backward(spectrum, physical);
  for (double& u : physical) u *= u;
  fft.forward(physical, spectrum);
  const double scale = 0.5 / quad;
  for (int k = 1; k <= g.modes; ++k)
    out[k - 1] = -Complex(0.0, g.wavenumber(k) * scale) * spectrum[k];
}

}  // namespace

Integrator parse_integrator(std::string_view name) {
  if (name == "etdrk4") return Integrator::kEtdrk4;
  if (name == "strang-split") return Integrator::kStrangSplit;
  if (name == "lawson-gauss") return Integrator::kLawsonGauss;
  throw PreconditionError("unknown integrator '" + std::string(name) +
                          "' (etdrk4 | strang-split | lawson-gauss)");
}

std::string_view integrator_name(Integrator integrator) {
  switch (integrator) {
    case Integrator::kEtdrk4: return "etdrk4";
    case Integrator::kStrangSplit: return "strang-split";
    case Integrator::kLawsonGauss: return "lawson-gauss";
  }
  return "?";
}

void FlowParams::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw PreconditionError("flow.dt must be positive");
  if (!std::isfinite(horizon)) throw PreconditionError("flow.T must be finite");
  if (record_every < 1) throw PreconditionError("flow.record_every must be >= 1");
}

FourierField nonlinear_term(const FourierField& f, bool dealias) {
  const GridSpec& g = f.grid();
  const int quad = quadrature_points(g, dealias);
  std::vector<Complex> spectrum(quad / 2 + 1);
  std::vector<double> physical(quad);
  FourierField out(g);
  nonlinear_rhs(g, quad, detail::real_fft(quad), f.coefficients(), spectrum, physical,
                out.coefficients());
  for (Complex& c : out.coefficients()) c = -c;
  return out;
}

FourierField vector_field(const FourierField& f, bool nonlinear) {
  FourierField out = nonlinear ? nonlinear_term(f) : FourierField(f.grid());
  for (int k = 1; k <= f.modes(); ++k) {
    Complex& c = out.coefficients()[k - 1];
    c = -c - Complex(0.0, dispersion(k, f.grid())) * f.coefficients()[k - 1];
  }
  return out;
}

// -----------------------------------------------------------------------------

GalerkinStepper::GalerkinStepper(const GridSpec& grid, double step, Integrator integrator,
                                 bool dealias, bool nonlinear)
    : grid_(grid),
      h_(step),
      integrator_(integrator),
      nonlinear_(nonlinear),
      quad_points_(quadrature_points(grid, dealias)),
      fft_(&detail::real_fft(quad_points_)) {
  grid_.validate();
  if (!(std::abs(step) > 0.0) || !std::isfinite(step))
    throw PreconditionError("step size must be nonzero and finite");
  const auto m = static_cast<std::size_t>(grid.modes);
  xi_.resize(m);
  e_full_.resize(m);
  e_half_.resize(m);
  q_half_.resize(m);
  f1_.resize(m);
  f2_.resize(m);
  f3_.resize(m);
  for (auto* v : {&na_, &nb_, &nc_, &nv_, &a_, &b_, &cc_, &rot1_, &rot2_, &k1_, &k2_, &w1_,
                  &w2_})
    v->resize(m);
  spectrum_.resize(quad_points_ / 2 + 1);
  physical_.resize(quad_points_);

  for (int k = 1; k <= grid.modes; ++k) {
    const std::size_t i = k - 1;
    xi_[i] = grid.wavenumber(k);
    const Complex lin(0.0, -dispersion(k, grid));
    const Complex z = lin * h_;
    e_full_[i] = std::exp(z);
    e_half_[i] = std::exp(z / 2.0);
    q_half_[i] = (h_ / 2.0) * phi_functions(z / 2.0).p1;
    const PhiValues p = phi_functions(z);
    f1_[i] = h_ * (p.p1 - 3.0 * p.p2 + 4.0 * p.p3);
    f2_[i] = h_ * (p.p2 - 2.0 * p.p3);
    f3_[i] = h_ * (-p.p2 + 4.0 * p.p3);
    rot1_[i] = std::exp(z * kGaussNode1);
    rot2_[i] = std::exp(z * kGaussNode2);
  }
}

void GalerkinStepper::rhs_nonlinear(std::span<const Complex> c, std::span<Complex> out) {
  if (!nonlinear_) {
    std::fill(out.begin(), out.end(), Complex{});
    return;
  }
  nonlinear_rhs(grid_, quad_points_, *fft_, c, spectrum_, physical_, out);
}

void GalerkinStepper::step(std::span<Complex> c) {
  switch (integrator_) {
    case Integrator::kEtdrk4: step_etdrk4(c); break;
    case Integrator::kStrangSplit: step_strang(c); break;
    case Integrator::kLawsonGauss: step_gauss(c); break;
  }
}

void GalerkinStepper::step_etdrk4(std::span<Complex> v) {
  const std::size_t m = v.size();
  rhs_nonlinear(v, nv_);
  for (std::size_t i = 0; i < m; ++i) a_[i] = e_half_[i] * v[i] + q_half_[i] * nv_[i];
  rhs_nonlinear(a_, na_);
  for (std::size_t i = 0; i < m; ++i) b_[i] = e_half_[i] * v[i] + q_half_[i] * na_[i];
  rhs_nonlinear(b_, nb_);
  for (std::size_t i = 0; i < m; ++i)
    cc_[i] = e_half_[i] * a_[i] + q_half_[i] * (2.0 * nb_[i] - nv_[i]);
  rhs_nonlinear(cc_, nc_);
  for (std::size_t i = 0; i < m; ++i)
    v[i] = e_full_[i] * v[i] + f1_[i] * nv_[i] + 2.0 * f2_[i] * (na_[i] + nb_[i]) +
           f3_[i] * nc_[i];
}

void GalerkinStepper::step_strang(std::span<Complex> v) {
  const std::size_t m = v.size();
  for (std::size_t i = 0; i < m; ++i) v[i] *= e_half_[i];
  // classical RK4 on c' = -N(c); k1..k4 in nv_, na_, nb_, nc_
  rhs_nonlinear(v, nv_);
  for (std::size_t i = 0; i < m; ++i) a_[i] = v[i] + 0.5 * h_ * nv_[i];
  rhs_nonlinear(a_, na_);
  for (std::size_t i = 0; i < m; ++i) a_[i] = v[i] + 0.5 * h_ * na_[i];
  rhs_nonlinear(a_, nb_);
  for (std::size_t i = 0; i < m; ++i) a_[i] = v[i] + h_ * nb_[i];
  rhs_nonlinear(a_, nc_);
  for (std::size_t i = 0; i < m; ++i)
    v[i] += h_ / 6.0 * (nv_[i] + 2.0 * na_[i] + 2.0 * nb_[i] + nc_[i]);
  for (std::size_t i = 0; i < m; ++i) v[i] *= e_half_[i];
}

// With u(t_n + s) = exp(-i m s) w(s), w' = exp(i m s) * (-N)(exp(-i m s) w).
// That field is L2-skew, so the collocation stages keep ||w|| (and hence
// ||u||) up to the fixed-point tolerance. Stage equations are solved by
// plain iteration, which contracts quickly since h |DN| << 1.
void GalerkinStepper::step_gauss(std::span<Complex> v) {
  const std::size_t m = v.size();
  if (!nonlinear_) {
    for (std::size_t i = 0; i < m; ++i) v[i] *= e_full_[i];
    return;
  }
  constexpr double a11 = 0.25, a22 = 0.25;
  const double a12 = 0.25 - kSqrt3_6, a21 = 0.25 + kSqrt3_6;
  double scale = 0.0;
  for (Complex c : v) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return;

  auto stage = [&](const std::vector<Complex>& w, const std::vector<Complex>& rot,
                   std::vector<Complex>& k) {
    for (std::size_t i = 0; i < m; ++i) a_[i] = rot[i] * w[i];
    rhs_nonlinear(a_, k);
    for (std::size_t i = 0; i < m; ++i) k[i] *= std::conj(rot[i]);
  };

  std::copy(v.begin(), v.end(), w1_.begin());
  std::copy(v.begin(), v.end(), w2_.begin());
  stage(w1_, rot1_, k1_);
  stage(w2_, rot2_, k2_);
  bool converged = false;
  for (int it = 0; it < kGaussMaxIterations && !converged; ++it) {
    for (std::size_t i = 0; i < m; ++i) {
      w1_[i] = v[i] + h_ * (a11 * k1_[i] + a12 * k2_[i]);
      w2_[i] = v[i] + h_ * (a21 * k1_[i] + a22 * k2_[i]);
    }
    std::copy(k1_.begin(), k1_.end(), na_.begin());
    std::copy(k2_.begin(), k2_.end(), nb_.begin());
    stage(w1_, rot1_, k1_);
    stage(w2_, rot2_, k2_);
    double change = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      change = std::max({change, std::abs(k1_[i] - na_[i]), std::abs(k2_[i] - nb_[i])});
    if (!std::isfinite(change)) break;
    converged = std::abs(h_) * change <= 1e-16 * scale;
  }
  if (!converged) throw NumericalError("Gauss stage iteration did not converge");
  for (std::size_t i = 0; i < m; ++i)
    v[i] = e_full_[i] * (v[i] + 0.5 * h_ * (k1_[i] + k2_[i]));
}

// -----------------------------------------------------------------------------

namespace {

long step_count(double horizon, double dt) {
  if (horizon == 0.0) return 0;
  return std::max(1L, static_cast<long>(std::ceil(std::abs(horizon) / dt - 1e-9)));
}

// One step ending at time t; every numerical failure is reported as a blow-up at t.
void checked_step(GalerkinStepper& stepper, std::span<Complex> c, double t) {
  try {
    stepper.step(c);
  } catch (const NumericalError& e) {
    throw BlowUpError(t, std::string(e.what()) + " at t=" + std::to_string(t));
  }
  check_finite_state(c, t);
}

}  // namespace

TrajectoryRecord evolve(const FourierField& f0, const FlowParams& p) {
  p.validate();
  const long steps = step_count(p.horizon, p.dt);
  TrajectoryRecord rec{{}, {}, {}, {}, f0};
  FourierField state = f0;

  auto record = [&](double t) {
    rec.times.push_back(t);
    rec.l2.push_back(l2_norm(state));
    rec.hamiltonian.push_back(hamiltonian(state));
    if (p.keep_snapshots) rec.snapshots.push_back(state);
  };
  record(0.0);
  if (steps == 0) return rec;

  const double h = p.horizon / static_cast<double>(steps);
  GalerkinStepper stepper(f0.grid(), h, p.integrator, p.dealias, p.nonlinear);
  for (long n = 1; n <= steps; ++n) {
    const double t = h * static_cast<double>(n);
    checked_step(stepper, state.coefficients(), t);
    if (n % p.record_every == 0 || n == steps) record(n == steps ? p.horizon : t);
  }
  rec.final_state = state;
  return rec;
}

FourierField flow_map(const FourierField& f0, double t, const FlowParams& p) {
  p.validate();
  if (!std::isfinite(t)) throw PreconditionError("flow time must be finite");
  const long steps = step_count(t, p.dt);
  FourierField state = f0;
  if (steps == 0) return state;
  const double h = t / static_cast<double>(steps);
  GalerkinStepper stepper(f0.grid(), h, p.integrator, p.dealias, p.nonlinear);
  for (long n = 1; n <= steps; ++n) {
    checked_step(stepper, state.coefficients(), h * static_cast<double>(n));
  }
  return state;
}

// -----------------------------------------------------------------------------

double DensityModel::log_density(std::span<const double> a, const GridSpec& grid) const {
  if (v.size() * 2 != a.size())
    throw PreconditionError("density eigenvalue ladder does not match the grid");
  double quad = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) quad += v[j / 2] * a[j] * a[j];
  double cubic = 0.0;
  if (cubic_coefficient != 0.0) cubic = cubic_coefficient * cubic_integral(from_coordinates(a, grid));
  return -0.5 * quad - cubic;
}

double DivergenceEstimate::relative() const {
  return term_scale > 0.0 ? std::abs(divergence) / term_scale : std::abs(divergence);
}

double DivergenceEstimate::weighted_relative() const {
  return weighted_scale > 0.0 ? std::abs(weighted) / weighted_scale : std::abs(weighted);
}

DivergenceEstimate liouville_divergence(const FourierField& f, double h,
                                        const DensityModel& density) {
  if (!(h > 0.0)) throw PreconditionError("finite-difference step must be positive");
  const GridSpec& g = f.grid();
  const std::vector<double> a = to_coordinates(f);
  auto field = [&](std::span<const double> x) {
    return to_coordinates(vector_field(from_coordinates(x, g)));
  };
  const double log_p0 = density.log_density(a, g);

  DivergenceEstimate est;
  for (double b : field(a)) est.field_norm += b * b;
  est.field_norm = std::sqrt(est.field_norm);

  std::vector<double> shifted = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    shifted[i] = a[i] + h;
    const double b_plus = field(shifted)[i];
    const double p_plus = std::exp(density.log_density(shifted, g) - log_p0);
    shifted[i] = a[i] - h;
    const double b_minus = field(shifted)[i];
    const double p_minus = std::exp(density.log_density(shifted, g) - log_p0);
    shifted[i] = a[i];

    const double d = (b_plus - b_minus) / (2.0 * h);
    const double wd = (p_plus * b_plus - p_minus * b_minus) / (2.0 * h);
    est.divergence += d;
    est.term_scale += std::abs(d);
    est.weighted += wd;
    est.weighted_scale += std::abs(wd);
  }
  return est;
}

// -----------------------------------------------------------------------------

PicardResult picard_solve(const FourierField& phi, double horizon, int max_iterations,
                          const PicardOptions& options) {
  if (!(horizon > 0.0)) throw PreconditionError("Picard horizon must be positive");
  if (max_iterations < 1) throw PreconditionError("Picard needs at least one iteration");
  if (options.nodes_per_unit_time < 64)
    throw PreconditionError("Picard quadrature needs >= 64 nodes per unit time");

  const GridSpec& g = phi.grid();
  const int m = g.modes;
  const long intervals =
      std::max(1L, static_cast<long>(std::ceil(horizon * options.nodes_per_unit_time)));
  const double h = horizon / static_cast<double>(intervals);

  PicardResult res;
  res.times.resize(intervals + 1);
  for (long i = 0; i <= intervals; ++i) res.times[i] = h * static_cast<double>(i);

  // phase[i][k] = exp(-i m(xi_k) t_i)
  std::vector<std::vector<Complex>> phase(intervals + 1, std::vector<Complex>(m));
  for (long i = 0; i <= intervals; ++i)
    for (int k = 1; k <= m; ++k)
      phase[i][k - 1] = std::exp(Complex(0.0, -dispersion(k, g) * res.times[i]));

  std::vector<FourierField> current(intervals + 1, FourierField(g));
  std::vector<FourierField> next(intervals + 1, FourierField(g));
  const double stop = options.tolerance * std::max(1.0, l2_norm(phi));

  std::vector<Complex> integral(m), g_prev(m), g_cur(m);
  for (int n = 0; n < max_iterations; ++n) {
    std::fill(integral.begin(), integral.end(), Complex{});
    double distance = 0.0;
    for (long i = 0; i <= intervals; ++i) {
      const FourierField nl = nonlinear_term(current[i], options.dealias);
      for (int k = 0; k < m; ++k) g_cur[k] = std::conj(phase[i][k]) * nl.coefficients()[k];
      if (i > 0)
        for (int k = 0; k < m; ++k) integral[k] += 0.5 * h * (g_prev[k] + g_cur[k]);
      auto c = next[i].coefficients();
      for (int k = 0; k < m; ++k) c[k] = phase[i][k] * (phi.coefficients()[k] - integral[k]);
      std::swap(g_prev, g_cur);

      double diff = 0.0;
      for (int k = 0; k < m; ++k) diff += std::norm(c[k] - current[i].coefficients()[k]);
      distance = std::max(distance, std::sqrt(2.0 * g.length * diff));
    }
    std::swap(current, next);
    res.iterations = n + 1;
    if (!res.distances.empty())
      res.contraction_factors.push_back(res.distances.back() > 0.0
                                            ? distance / res.distances.back()
                                            : 0.0);
    res.distances.push_back(distance);

    if (distance <= stop) {
      res.converged = true;
      break;
    }
    const auto& d = res.distances;
    if (d.size() >= 4 && d[d.size() - 1] > d[d.size() - 2] &&
        d[d.size() - 2] > d[d.size() - 3] && d[d.size() - 3] > d[d.size() - 4]) {
      res.diverged = true;
      break;
    }
  }
  res.trajectory = std::move(current);
  return res;
}

// -----------------------------------------------------------------------------

std::vector<ConvergenceRow> convergence_in_m(const FourierField& f0,
                                             std::span<const int> m_list,
                                             const FlowParams& p) {
  if (m_list.empty()) throw PreconditionError("m_list must not be empty");
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    if (m_list[i] < 1) throw PreconditionError("m_list entries must be positive");
    if (i > 0 && m_list[i] <= m_list[i - 1])
      throw PreconditionError("m_list must be strictly increasing");
  }
  FlowParams run = p;
  run.keep_snapshots = true;

  const GridSpec ref_grid = f0.grid().with_modes(2 * m_list.back());
  const TrajectoryRecord ref = evolve(resample(f0, ref_grid), run);

  std::vector<ConvergenceRow> rows;
  for (int m : m_list) {
    const GridSpec grid = f0.grid().with_modes(m);
    const TrajectoryRecord tr = evolve(resample(f0, grid), run);
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
      FourierField diff = resample(tr.snapshots[i], ref_grid);
      auto c = diff.coefficients();
      for (int k = 0; k < ref_grid.modes; ++k) c[k] -= ref.snapshots[i].coefficients()[k];
      worst = std::max(worst, l2_norm(diff));
    }
    rows.push_back({m, worst});
  }
  return rows;
}

}  // namespace ostrovsky
