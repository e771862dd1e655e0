#pragma once

// Desk-scale probes of the Bourgain-space machinery on the 2 pi torus, where
// m(n) = n^3 - 1/n. Space-time fields live on the lattice n in {+-1..+-n_max}
// x tau_j = j * d_tau; continuous tau integrals become d_tau-weighted sums.
//
// Rows are stored as sparse runs of consecutive tau indices, because the
// interesting fields sit on the dispersion curve tau ~ -m(n), which for
// n = 64 is 2.6e5 away from the origin.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ostrovsky/execution.hpp"
#include "ostrovsky/spectral.hpp"

namespace ostrovsky {

/// m(n) = n^3 - 1/n on the 2 pi torus. Throws at n = 0.
double lattice_dispersion(long n);

inline double japanese(double x) { return std::sqrt(1.0 + x * x); }  // <x>

struct LatticeSpec {
  int n_max = 16;
  double tau_max = 0.0;  // 0: 8 m(n_max), the recommended minimum
  double d_tau = 0.25;

  static LatticeSpec make(int n_max, double d_tau, double tau_max = 0.0);
  void validate() const;
  long tau_index_limit() const;  // J with |j| <= J
  /// False when the dispersion curves do not fit inside [-tau_max, tau_max].
  bool curves_inside() const;
};

/// Run of values at tau indices offset, offset + 1, ...
struct Segment {
  long offset = 0;
  std::vector<Complex> values;
};

class LatticeField {
 public:
  explicit LatticeField(LatticeSpec spec);

  const LatticeSpec& spec() const { return spec_; }
  int n_max() const { return spec_.n_max; }

  /// Segments of row n (sorted, disjoint); empty for n = 0 or |n| > n_max.
  const std::vector<Segment>& row(int n) const;
  /// Adds a run to row n, merging with what is there. Indices beyond the
  /// tau_max limit are clipped.
  void add(int n, long offset, std::vector<Complex> values);

  Complex at(int n, long j) const;
  bool empty() const;
  void scale(Complex c);

 private:
  LatticeSpec spec_;
  std::vector<std::vector<Segment>> rows_;  // index n + n_max
  static const std::vector<Segment> kEmpty;
};

/// (sum_n <n>^{2s} sum_j <tau_j + m(n)>^{2b} |f|^2 d_tau)^{1/2}
double xsb_norm(const LatticeField& f, double s, double b);
/// X^{s,1/2} norm plus (sum_n <n>^{2s} (sum_j |f| d_tau)^2)^{1/2}.
double ys_norm(const LatticeField& f, double s);

/// h(n, tau) = sum_{n1} sum_{j1} f(n1, tau_j1) g(n - n1, tau - tau_j1) d_tau on
/// the lattice with n_max doubled. Runs shorter than `fft_threshold` (in the
/// shorter operand) are convolved directly, longer ones through an FFT.
LatticeField convolve(const LatticeField& f, const LatticeField& g,
                      Execution exec = Execution::kParallel, std::size_t fft_threshold = 64);

/// ||n (f * g)||_{X^{s,-1/2}} / (||f||_{X^{s,1/2}} ||g||_{X^{s,1/2}}).
double bilinear_ratio(const LatticeField& f, const LatticeField& g, double s,
                      Execution exec = Execution::kParallel);
/// (sum_n |n|^{2s} (sum_j |n h| / <tau + m(n)> d_tau)^2)^{1/2} over the same
/// denominator.
double y_bilinear_ratio(const LatticeField& f, const LatticeField& g, double s,
                        Execution exec = Execution::kParallel);

/// Unit-width box in tau centred on -m(n) (the dispersion curve), amplitude 1.
LatticeField curve_box(const LatticeSpec& spec, int n, double width = 1.0);
/// Every row: a box of the given width centred at -m(n) + shift, shift
/// uniform in [-width, width], complex normal values; normalized to unit
/// X^{s,1/2} norm.
LatticeField random_field(const LatticeSpec& spec, double s, std::uint64_t seed,
                          std::uint64_t index, double width = 1.0);

struct SweepCell {
  double s = 0.0;
  int n_max = 0;
  double max_ratio = 0.0;          // over every candidate below
  std::string argmax;              // family and frequencies of the maximizer
  double max_adversarial = 0.0;    // curve-concentrated families only
  double max_random = 0.0;         // random trials only (0 if trials == 0)
  double max_y_ratio = 0.0;        // y_bilinear_ratio at the same candidates
};

/// For each (s, n_max): max of bilinear_ratio over
///   high x high -> low   (N, -(N - k)), k = 1, 2
///   high x low  -> high  (N, k),        k = 1, 2
///   high x high -> high  (N, N)
/// for every 2 <= N <= n_max (curve boxes), plus `trials` random pairs.
std::vector<SweepCell> bilinear_sweep(const std::vector<double>& s_list,
                                      const std::vector<int>& n_max_list, int trials,
                                      std::uint64_t seed, double d_tau = 0.25,
                                      Execution exec = Execution::kParallel);

// Resonance -------------------------------------------------------------------

/// Exact rational number with 128-bit parts, always normalized (den > 0).
struct Rational {
  __int128 num = 0;
  __int128 den = 1;

  static Rational make(__int128 num, __int128 den);
  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) = default;
  double to_double() const;
};

Rational exact_dispersion(long n);
/// m(n) - m(n1) - m(n - n1) in exact arithmetic (|n|, |n1| <= 1e6).
Rational exact_resonance(long n, long n1);
/// Same in double: 3 n n1 n2 + n / (n1 n2) - 1 / n, n2 = n - n1.
double resonance(long n, long n1);

struct ResonanceRecord {
  long n = 0, n1 = 0;
  double R = 0.0;
  double ratio = 0.0;  // |R| / (|n||n1||n - n1|)
};

struct ResonanceScan {
  int n_max = 0;
  ResonanceRecord min;           // over 2 <= |n| <= n_max
  bool min_exact_at_least_one = false;  // |R| >= |n n1 n2| checked in rationals
  ResonanceRecord min_n_equals_one;     // the excluded |n| = 1 slice
  std::vector<double> bin_edges;
  std::vector<std::size_t> histogram;
  std::size_t pairs = 0;
};

ResonanceScan resonance_scan(int n_max, int bins = 20, Execution exec = Execution::kParallel);

// Kernel lemmas ---------------------------------------------------------------

struct KernelIntegralRow {
  int form = 1;        // 1: 1/((1+|b|)(1+|a-b|)), 2: rho power, 3: 1 + eps powers
  double alpha = 0.0;
  double param = 0.0;  // rho (form 2) or eps (form 3); 0 for form 1
  double integral = 0.0;
  double bound = 0.0;  // right-hand side
  double ratio = 0.0;
  double error_estimate = 0.0;
};

/// Integrates each left-hand side over the whole line (split at 0 and alpha,
/// tanh-sinh inside, exp-sinh on the tails).
std::vector<KernelIntegralRow> kernel_integral_scan(const std::vector<double>& alpha_list,
                                                    const std::vector<double>& rho_list,
                                                    const std::vector<double>& eps_list);

struct KernelSumRow {
  int form = 1;         // 1: sum over n1 at (tau, n); 2, 3: sum over n at (tau1, n1)
  double tau = 0.0;
  long n = 0;           // n (form 1) or n1 (forms 2, 3)
  double rho = 0.0;     // form 3 only
  double sum = 0.0;
  double tail_bound = 0.0;  // bound on the terms beyond the cutoff
};

std::vector<KernelSumRow> kernel_sum_scan(const std::vector<double>& tau_list,
                                          const std::vector<long>& n_list,
                                          const std::vector<double>& rho_list,
                                          long cutoff = 100000,
                                          Execution exec = Execution::kParallel);

// F_s bounds ------------------------------------------------------------------

struct FsScan {
  double s = 0.0, r = 0.0;
  int n_max = 0;
  bool in_hypothesis = true;      // s >= -1/2 and 0 < r < 1/4
  double max_fs = 0.0;
  double max_fsr_scaled = 0.0;    // max |n|^{2 - 4r} F_{s,r}
  double min_sigma_over_r = 0.0;  // min sigma / |R|; the identity forces >= 1/3
  std::size_t points = 0;
};

double sigma_modulation(long n, long n1, double tau, double tau1);
double f_s(long n, long n1, double tau, double tau1, double s);
double f_sr(long n, long n1, double tau, double tau1, double s, double r);

/// Maximizes over 2 <= |n| <= n_max, 1 <= |n1|, |n - n1| <= n_max at the
/// sigma-minimizing modulations (all three equal to |R|/3) and at
/// tau_samples seeded perturbations of them.
FsScan fs_bound_scan(double s, double r, int n_max, int tau_samples, std::uint64_t seed = 1,
                     Execution exec = Execution::kParallel);

// Time localization -----------------------------------------------------------

struct LocalizationRow {
  double T = 0.0;
  double b = 0.0;
  double ratio = 0.0;  // ||psi_T u||_{X^{s,b}} / ||psi_T u||_{X^{s,1/2}}
};

struct LocalizationScan {
  std::vector<LocalizationRow> rows;
  std::vector<double> slopes;  // per b: least-squares slope of log ratio vs log T
};

/// u(t) = eta(t / T) S(t) phi with the bump eta(t) = exp(-1 / (1 - t^2)) on
/// [-1, 1], so u_hat(n, tau) = phi_hat(n) T eta_hat(T (tau + m(n))).
LocalizationScan time_localization_scan(const FourierField& phi, double s,
                                        const std::vector<double>& b_list,
                                        const std::vector<double>& T_list);

}  // namespace ostrovsky
