#pragma once

// Gaussian measure w on the band of a GridSpec and its reweighting
//
//     d mu_m = exp(-g(u)) chi(||u|| <= R) dw(u) / Z,
//
// in the real coordinates a_j of spectral.hpp: a_j ~ N(0, 1/v_k), with the
// sine and cosine coordinate of wavenumber k sharing v_k.
//
// Two covariance ladders are available:
//   kEnergy    v_k = lambda_k - 1/lambda_k + mass_shift,  g = (1/6) int u^3
//   kPositive  v_k = lambda_k + 1/lambda_k,               g = (1/3) int u^3
// with lambda_k = xi_k^2. kEnergy is exp(-H - (mass_shift/2)||u||^2) for the
// conserved H of hamiltonian(), hence invariant under the Galerkin flow;
// kPositive is the ladder of S = -Delta + Delta^{-1} and is not.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ostrovsky/execution.hpp"
#include "ostrovsky/galerkin.hpp"
#include "ostrovsky/rng.hpp"
#include "ostrovsky/spectral.hpp"

namespace ostrovsky {

enum class Covariance { kEnergy, kPositive };
enum class Sampler { kIidImportance, kPcnMcmc };

Covariance parse_covariance(std::string_view name);  // "energy" | "positive"
std::string_view covariance_name(Covariance c);
Sampler parse_sampler(std::string_view name);  // "iid-importance" | "pcn-mcmc"
std::string_view sampler_name(Sampler s);

/// v_k for k = 1..k_max.
std::vector<double> eigenvalues(double length, long k_max, Covariance c = Covariance::kEnergy,
                                double mass_shift = 2.0);
inline std::vector<double> eigenvalues(const GridSpec& grid, Covariance c = Covariance::kEnergy,
                                       double mass_shift = 2.0) {
  return eigenvalues(grid.length, grid.modes, c, mass_shift);
}

/// Partial sums S_K = sum_{k <= K} 2 / v_k for K = 1..k_max (compensated).
std::vector<double> trace_check(const GridSpec& grid, long k_max,
                                Covariance c = Covariance::kEnergy, double mass_shift = 2.0);

struct GibbsSpec {
  GridSpec grid;
  Covariance covariance = Covariance::kEnergy;
  double mass_shift = 2.0;          // kEnergy only
  bool nonlinear = true;            // false: g == 0, mu_m == w
  std::optional<double> cutoff_R;   // empty: no cutoff
  bool auto_cutoff = false;         // use default_cutoff(grid) instead of cutoff_R
  std::uint64_t seed = 0;

  /// 4 * sqrt(E_w ||u||^2) = 4 * sqrt(sum_k 2 / v_k).
  static double default_cutoff(const GridSpec& grid, Covariance c, double mass_shift);

  void validate() const;
  std::optional<double> resolved_cutoff() const;
  std::vector<double> v() const { return eigenvalues(grid, covariance, mass_shift); }
  double cubic_coefficient() const;
  /// g(u) = cubic_coefficient() * int u^3.
  double g(const FourierField& u) const;
  bool in_support(const FourierField& u) const;
  /// Density model for the Liouville check.
  DensityModel density() const;
};

struct WeightedSample {
  FourierField field;
  double log_weight = 0.0;  // -g(u), before normalization; 0 for pCN draws
  bool in_support = true;
};

struct PcnSettings {
  double beta = 0.2;
  int chains = 8;     // independent chains, stream = chain index
  int burn_in = 1000;
  int thin = 10;
};

struct Ensemble {
  GibbsSpec spec;
  Sampler sampler = Sampler::kIidImportance;
  std::uint64_t master_seed = 0;
  std::vector<WeightedSample> samples;
  // pCN only: samples are stored chain after chain, chain_length each.
  PcnSettings pcn;
  int chain_length = 0;
  double acceptance_rate = 1.0;
};

/// One draw from w with coordinates a_j = z_j / sqrt(v_j).
FourierField draw_gaussian(const GridSpec& grid, std::span<const double> v, Engine& rng);

/// count i.i.d. draws from w, sample i from stream (spec.seed, i), weighted
/// by exp(-g). Parallel and serial paths are bit-identical.
Ensemble sample_gaussian(const GibbsSpec& spec, std::size_t count,
                         Execution exec = Execution::kParallel);

/// u' = sqrt(1 - beta^2) u + beta xi, xi ~ w; accepted with probability
/// min(1, exp(g(u) - g(u'))) and always rejected outside the cutoff ball.
std::pair<FourierField, bool> pcn_step(const FourierField& u, double beta, const GibbsSpec& spec,
                                       Engine& rng);

/// count draws (a multiple of settings.chains) split evenly over independent
/// chains targeting mu_m; chain c runs on stream (spec.seed, c).
Ensemble pcn_chain(const GibbsSpec& spec, std::size_t count, const PcnSettings& settings,
                   Execution exec = Execution::kParallel);

/// w({a : box_j.first <= a_j < box_j.second, j < r}) for r = box.size()
/// coordinates (0-based). Infinite bounds allowed; an empty interval gives 0.
double cylinder_probability(const GibbsSpec& spec,
                            std::span<const std::pair<double, double>> box);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ess = 0.0;        // effective sample size
  bool degenerate = false; // ess < kMinEss
};

inline constexpr double kMinEss = 10.0;

/// Self-normalized importance estimate with delta-method SE (iid ensembles)
/// or plain mean with batch-means SE per chain (pCN ensembles).
Estimate gibbs_expectation(const Ensemble& ens, std::span<const double> values);
Estimate gibbs_expectation(const Ensemble& ens,
                           const std::function<double(const FourierField&)>& f);

/// Monte Carlo frequency of the cylinder box under the ensemble's weights.
Estimate cylinder_frequency(const Ensemble& ens,
                            std::span<const std::pair<double, double>> box);

// Persistence -----------------------------------------------------------------

inline constexpr int kManifestVersion = 1;

/// dir/manifest.json plus dir/sample_000000.csv, ... . `config` is echoed
/// into the manifest and every field file.
void write_ensemble(const std::filesystem::path& dir, const Ensemble& ens,
                    const std::map<std::string, std::string>& config = {});
Ensemble read_ensemble(const std::filesystem::path& dir);

}  // namespace ostrovsky
