#pragma once

// Empirical invariance of mu_m under the Galerkin flow: push an ensemble
// through flow_map(., t) and compare weighted observable means, keeping the
// original weights (pushforward semantics).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ostrovsky/execution.hpp"
#include "ostrovsky/galerkin.hpp"
#include "ostrovsky/gibbs.hpp"

namespace ostrovsky {

enum class ObservableKind {
  kL2Squared,          // ||u||^2
  kHsNorm,             // sobolev_norm(u, s)
  kModePower,          // a_{2k-1}^2 + a_{2k}^2 = 2A |c_k|^2
  kCubicIntegral,      // int u^3
  kHamiltonian,        // hamiltonian(u)
  kCylinderIndicator,  // lo <= a_j < hi, j 1-based
  kBallIndicator,      // ||u|| <= R
};

struct Observable {
  std::string name;
  ObservableKind kind = ObservableKind::kL2Squared;
  double s = 0.0;
  int k = 0;
  int j = 0;
  double lo = 0.0, hi = 0.0;
  double radius = 0.0;

  double operator()(const FourierField& u) const;
  bool bounded() const {
    return kind == ObservableKind::kCylinderIndicator || kind == ObservableKind::kBallIndicator;
  }
};

/// Parses a comma-separated list such as
///   "l2_squared, mode_power(1..4), hs_norm(0.5), cylinder_indicator(1,-0.5,0.5)"
/// ("a..b" expands an integer argument into one observable per value).
std::vector<Observable> parse_observables(std::string_view list);

struct ObservableResult {
  std::string name;
  double mean_before = 0.0, se_before = 0.0;
  double mean_after = 0.0, se_after = 0.0;
  double z = 0.0;
  bool pass = true;
};

struct InvarianceReport {
  int m = 0;
  double t = 0.0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  double ess = 0.0;
  double z_max = 3.0;
  std::string sampler;
  std::vector<ObservableResult> results;

  bool all_pass() const;
  /// Family-wise reading of the per-observable |z| <= z_max gate.
  std::string bonferroni_note() const;
};

struct InvarianceOptions {
  double z_max = 3.0;
  Sampler sampler = Sampler::kIidImportance;
  PcnSettings pcn;
  Execution exec = Execution::kParallel;
};

/// flow_map(., t, p) applied to every sample. A blow-up anywhere raises
/// EnsembleBlowUpError carrying the smallest failing sample index.
std::vector<FourierField> push_forward(const Ensemble& ens, double t, const FlowParams& p,
                                       Execution exec = Execution::kParallel);

/// Compares ens against its pushforward `after` (same weights).
InvarianceReport compare_ensembles(const Ensemble& ens, const std::vector<FourierField>& after,
                                   double t, const std::vector<Observable>& obs,
                                   double z_max = 3.0);

/// Samples `count` draws from mu_m and runs the comparison. Throws
/// NumericalError if the effective sample size is degenerate.
InvarianceReport run_invariance(const GibbsSpec& spec, const FlowParams& p, double t,
                                const std::vector<Observable>& obs, std::size_t count,
                                const InvarianceOptions& options = {});

/// {"meta": {...}, "results": [...]} with the resolved config and version
/// echoed under "meta".
std::string report_json(const InvarianceReport& report,
                        const std::map<std::string, std::string>& config = {});

// Sweeps ----------------------------------------------------------------------

struct SweepRow {
  int m = 0;
  double t = 0.0;
  ObservableResult result;
};

struct DriftRow {
  int m = 0;
  std::string name;
  double slope = 0.0;     // weighted least-squares slope of mean_after in t
  double slope_se = 0.0;
  bool consistent = true; // |slope| <= 3 slope_se
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<DriftRow> drift;
};

/// run_invariance over every (m, t); one ensemble per m, reused across t.
/// The t = 0 "before" means are E_{mu_m}[F], the stabilization-in-m column.
SweepResult invariance_sweep(const GibbsSpec& base, const FlowParams& p,
                             const std::vector<int>& m_list, const std::vector<double>& t_list,
                             const std::vector<Observable>& obs, std::size_t count,
                             const InvarianceOptions& options = {});

// Recurrence ------------------------------------------------------------------

struct RecurrenceResult {
  std::vector<std::optional<double>> return_times;  // per sample
  std::vector<double> bin_edges;                    // histogram of returns
  std::vector<std::size_t> histogram;
  double fraction_returned = 0.0;
};

/// For each sample of a fresh draw from w (restricted to the cutoff ball), the
/// first step time t >= t_min with ||u(t) - u(0)|| < radius, up to horizon.
RecurrenceResult recurrence_probe(const GibbsSpec& spec, const FlowParams& p,
                                  std::size_t sample_count, double horizon, double radius,
                                  double t_min, int bins = 20,
                                  Execution exec = Execution::kParallel);

}  // namespace ostrovsky
