#pragma once

// The Galerkin system
//
//     d/dt u_m - (u_m)_xxx + dx^{-1} u_m + P_m(u_m (u_m)_x) = 0
//
// on the 2m-dimensional band of a GridSpec. In Fourier variables it reads
// c_k' = -i m(xi_k) c_k - N_k(c), N = 1/2 P_m dx(u^2). The linear part is
// integrated exactly; the nonlinearity is evaluated pseudospectrally on the
// grid's N >= 4m points, which makes it alias-free.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ostrovsky/spectral.hpp"

namespace ostrovsky {

namespace detail {
class RealFft;
}

enum class Integrator {
  kEtdrk4,       // exponential time differencing RK4 (Cox-Matthews)
  kStrangSplit,  // exact linear half steps around an RK4 nonlinear step
  kLawsonGauss,  // 2-stage Gauss-Legendre in the interaction picture; keeps ||u|| exactly
};

/// "etdrk4", "strang-split", "lawson-gauss". Throws PreconditionError.
Integrator parse_integrator(std::string_view name);
std::string_view integrator_name(Integrator integrator);

struct FlowParams {
  double dt = 1e-3;
  double horizon = 1.0;  // T; may be negative for backward flows
  Integrator integrator = Integrator::kEtdrk4;
  bool dealias = true;
  bool nonlinear = true;
  int record_every = 1;
  bool keep_snapshots = false;

  void validate() const;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> l2;
  std::vector<double> hamiltonian;
  std::vector<FourierField> snapshots;  // empty unless keep_snapshots
  FourierField final_state;
};

/// Coefficient magnitude above which a run is declared blown up.
inline constexpr double kBlowUpThreshold = 1e12;

/// 1/2 P_m dx(u^2). With dealias == false the product is formed on a
/// 2m+2 point grid and aliases.
FourierField nonlinear_term(const FourierField& f, bool dealias = true);

/// Full right-hand side -i m(xi) c - N(c) (nonlinear part optional).
FourierField vector_field(const FourierField& f, bool nonlinear = true);

/// Fixed-step integrator for one trajectory. Holds the per-mode exponential
/// coefficients and scratch buffers, so one instance per thread.
class GalerkinStepper {
 public:
  GalerkinStepper(const GridSpec& grid, double step, Integrator integrator,
                  bool dealias = true, bool nonlinear = true);

  const GridSpec& grid() const { return grid_; }
  double step_size() const { return h_; }

  /// Advances c_1..c_m by one step in place.
  void step(std::span<Complex> c);

 private:
  void rhs_nonlinear(std::span<const Complex> c, std::span<Complex> out);
  void step_etdrk4(std::span<Complex> c);
  void step_strang(std::span<Complex> c);
  void step_gauss(std::span<Complex> c);

  GridSpec grid_;
  double h_;
  Integrator integrator_;
  bool nonlinear_;
  int quad_points_;
  const detail::RealFft* fft_;
  std::vector<double> xi_;
  std::vector<Complex> e_full_, e_half_, q_half_, f1_, f2_, f3_;
  std::vector<Complex> na_, nb_, nc_, nv_, a_, b_, cc_;
  std::vector<Complex> rot1_, rot2_;  // exp(-i m(xi) c_j h) at the Gauss nodes
  std::vector<Complex> k1_, k2_, w1_, w2_;
  std::vector<Complex> spectrum_;
  std::vector<double> physical_;
};

/// Integrates f0 for p.horizon. Records (t, ||u||, H) at t = 0, every
/// record_every steps, and at the final time. Throws BlowUpError.
TrajectoryRecord evolve(const FourierField& f0, const FlowParams& p);

/// Endpoint of the flow at time t (p.horizon is ignored).
FourierField flow_map(const FourierField& f0, double t, const FlowParams& p);

// Liouville check -------------------------------------------------------------

/// Gaussian-times-cubic density P(a) = exp(-1/2 sum v_j a_j^2 - c3 int u^3)
/// in the real coordinates a_j. `v` has one entry per wavenumber k and is
/// shared by the sine and cosine coordinate of that k.
struct DensityModel {
  std::vector<double> v;
  double cubic_coefficient = 1.0 / 6.0;

  double log_density(std::span<const double> a, const GridSpec& grid) const;
};

struct DivergenceEstimate {
  double divergence = 0.0;       // sum_i d b_i / d a_i
  double term_scale = 0.0;       // sum_i |d b_i / d a_i|
  double field_norm = 0.0;       // |b(a)|
  double weighted = 0.0;         // sum_i d (P b_i) / d a_i, divided by P(a)
  double weighted_scale = 0.0;   // sum_i |d (P b_i) / d a_i| / P(a)

  /// |divergence| over the size of its individual terms (0 if all vanish).
  double relative() const;
  double weighted_relative() const;
};

/// Central finite differences with step h in every coordinate direction.
DivergenceEstimate liouville_divergence(const FourierField& f, double h,
                                        const DensityModel& density);

// Duhamel-Picard solver -------------------------------------------------------

struct PicardOptions {
  int nodes_per_unit_time = 4096;  // trapezoidal nodes; at least 64
  double tolerance = 1e-12;        // stop once d_n <= tolerance * max(1, ||phi||)
  bool dealias = true;
};

struct PicardResult {
  std::vector<double> times;
  std::vector<FourierField> trajectory;     // last iterate at every node
  std::vector<double> distances;            // d_n = max_t ||u^{n+1} - u^n||
  std::vector<double> contraction_factors;  // d_{n+1} / d_n
  int iterations = 0;
  bool converged = false;
  bool diverged = false;  // d_n grew three times in a row

  const FourierField& endpoint() const { return trajectory.back(); }
};

/// Iterates u <- S(t) phi - int_0^t S(t - t') N(u(t')) dt' on [0, T],
/// starting from u = 0, with the exact linear propagator S and trapezoidal
/// quadrature in t'.
PicardResult picard_solve(const FourierField& phi, double horizon, int max_iterations,
                          const PicardOptions& options = {});

// Truncation study ------------------------------------------------------------

struct ConvergenceRow {
  int modes = 0;
  double sup_error = 0.0;  // max over recorded times of ||u_m - u_ref||
};

/// Runs P_m f0 for each m in m_list and a reference at 2 * max(m_list);
/// errors are measured at every recorded time of `p` (horizon taken from p).
std::vector<ConvergenceRow> convergence_in_m(const FourierField& f0,
                                             std::span<const int> m_list,
                                             const FlowParams& p);

}  // namespace ostrovsky
