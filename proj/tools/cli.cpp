#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "ostrovsky/bourgain.hpp"
#include "ostrovsky/errors.hpp"
#include "ostrovsky/execution.hpp"
#include "ostrovsky/field_io.hpp"
#include "ostrovsky/galerkin.hpp"
#include "ostrovsky/gibbs.hpp"
#include "ostrovsky/invariance.hpp"
#include "ostrovsky/version.hpp"

namespace ostrovsky::cli {

namespace fs = std::filesystem;

namespace {

struct Context {
  RunConfig cfg;
  std::string out_flag;  // --out as given, may be empty
  std::ostream* out = nullptr;

  fs::path out_dir() const {
    fs::path dir;
    if (!out_flag.empty()) dir = out_flag;
    else if (!cfg.text("output.dir").empty()) dir = cfg.text("output.dir");
    else if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') dir = env;
    else dir = ".";
    fs::create_directories(dir);
    return dir;
  }
};

// CSV -------------------------------------------------------------------------

std::vector<std::string> provenance(const RunConfig& cfg) {
  std::vector<std::string> lines{"version: " + std::string(version())};
  for (const auto& kv : cfg.echo()) lines.push_back("config " + kv);
  return lines;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const RunConfig& cfg, const std::vector<std::string>& header)
      : path_(path), os_(path, std::ios::binary) {
    if (!os_) throw PreconditionError("cannot write '" + path.string() + "'");
    for (const auto& line : provenance(cfg)) os_ << "# " << line << '\n';
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  std::ofstream os_;
};

std::string num(double x) { return format_number(x); }
std::string num(long x) { return std::to_string(x); }
std::string num(int x) { return std::to_string(x); }
std::string num(std::size_t x) { return std::to_string(x); }

// Config -> library types -----------------------------------------------------

int to_int(const RunConfig& cfg, std::string_view key) {
  const long v = cfg.integer(key);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw PreconditionError(std::string(key) + ": value out of range");
  return static_cast<int>(v);
}

std::size_t to_count(const RunConfig& cfg, std::string_view key) {
  const long v = cfg.integer(key);
  if (v < 0) throw PreconditionError(std::string(key) + ": must be >= 0");
  return static_cast<std::size_t>(v);
}

GridSpec grid_of(const RunConfig& cfg, int modes = 0) {
  return GridSpec::make(cfg.real("grid.length"), modes > 0 ? modes : to_int(cfg, "grid.modes"),
                        modes > 0 ? 0 : to_int(cfg, "grid.points"));
}

FlowParams flow_of(const RunConfig& cfg) {
  FlowParams p;
  p.dt = cfg.real("flow.dt");
  p.horizon = cfg.real("flow.horizon");
  p.integrator = parse_integrator(cfg.text("flow.integrator"));
  p.dealias = cfg.flag("flow.dealias");
  p.nonlinear = cfg.flag("flow.nonlinear");
  p.record_every = to_int(cfg, "flow.record_every");
  p.keep_snapshots = cfg.flag("flow.snapshots");
  p.validate();
  return p;
}

FourierField initial_field(const RunConfig& cfg, const GridSpec& grid) {
  const std::string& kind = cfg.text("init.kind");
  if (kind == "smooth")
    return smooth_random_field(grid, cfg.real("init.k0"), cfg.real("init.norm"),
                               cfg.seed("init.seed"), cfg.seed("init.index"));
  if (kind == "cos") {
    FourierField f = trigonometric_mode(grid, 1, 1.0);
    const double n = l2_norm(f);
    for (Complex& c : f.coefficients()) c *= cfg.real("init.norm") / n;
    return f;
  }
  if (kind == "file") {
    if (cfg.text("init.file").empty()) throw PreconditionError("init.kind=file needs init.file");
    const fs::path path = cfg.text("init.file");
    if (!fs::exists(path)) throw PreconditionError("init.file '" + path.string() + "' not found");
    return resample(load_field(path), grid);
  }
  throw PreconditionError("init.kind: expected smooth, cos or file, got '" + kind + "'");
}

GibbsSpec gibbs_of(const RunConfig& cfg, const GridSpec& grid) {
  GibbsSpec s;
  s.grid = grid;
  s.covariance = parse_covariance(cfg.text("gibbs.covariance"));
  s.mass_shift = cfg.real("gibbs.mass_shift");
  s.nonlinear = cfg.flag("gibbs.nonlinear");
  s.seed = cfg.seed("gibbs.seed");
  const std::string& cut = cfg.text("gibbs.cutoff");
  if (cut == "auto") s.auto_cutoff = true;
  else if (cut != "none") s.cutoff_R = parse_number(cut, "gibbs.cutoff");
  s.validate();
  return s;
}

PcnSettings pcn_of(const RunConfig& cfg) {
  return {cfg.real("pcn.beta"), to_int(cfg, "pcn.chains"), to_int(cfg, "pcn.burn_in"),
          to_int(cfg, "pcn.thin")};
}

Ensemble draw_ensemble(const RunConfig& cfg, const GibbsSpec& spec) {
  const std::size_t count = to_count(cfg, "gibbs.count");
  if (count == 0) throw PreconditionError("gibbs.count must be >= 1");
  if (parse_sampler(cfg.text("gibbs.sampler")) == Sampler::kPcnMcmc)
    return pcn_chain(spec, count, pcn_of(cfg));
  return sample_gaussian(spec, count);
}

std::vector<int> int_list(const RunConfig& cfg, std::string_view key) {
  std::vector<int> out;
  for (long v : cfg.integers(key)) out.push_back(static_cast<int>(v));
  return out;
}

// Subcommands -----------------------------------------------------------------

void simulate(Context& ctx) {
  const GridSpec grid = grid_of(ctx.cfg);
  const FlowParams p = flow_of(ctx.cfg);
  const FourierField f0 = initial_field(ctx.cfg, grid);
  const TrajectoryRecord rec = evolve(f0, p);
  const fs::path dir = ctx.out_dir();
  CsvWriter csv(dir / "trajectory.csv", ctx.cfg, {"time", "l2", "hamiltonian"});
  for (std::size_t i = 0; i < rec.times.size(); ++i)
    csv.row({num(rec.times[i]), num(rec.l2[i]), num(rec.hamiltonian[i])});
  save_field(dir / "initial_state.csv", f0, provenance(ctx.cfg));
  save_field(dir / "final_state.csv", rec.final_state, provenance(ctx.cfg));
  for (std::size_t i = 0; i < rec.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%06zu.csv", i);
    auto lines = provenance(ctx.cfg);
    lines.push_back("time " + num(rec.times[i]));
    save_field(dir / name, rec.snapshots[i], lines);
  }
  const double l0 = rec.l2.front(), h0 = rec.hamiltonian.front();
  *ctx.out << "simulate: " << rec.times.size() << " records to " << csv.path().string()
           << "\n  L2 " << num(l0) << " -> " << num(rec.l2.back()) << ", H " << num(h0) << " -> "
           << num(rec.hamiltonian.back()) << '\n';
}

void gibbs_sample(Context& ctx) {
  const GibbsSpec spec = gibbs_of(ctx.cfg, grid_of(ctx.cfg));
  const Ensemble ens = draw_ensemble(ctx.cfg, spec);
  const fs::path dir = ctx.out_dir() / "ensemble";
  write_ensemble(dir, ens, ctx.cfg.resolved());
  const Estimate one = gibbs_expectation(ens, [](const FourierField&) { return 1.0; });
  *ctx.out << "gibbs-sample: " << ens.samples.size() << " samples to " << dir.string()
           << "\n  ess " << num(one.ess) << ", acceptance " << num(ens.acceptance_rate) << '\n';
  // Degenerate weights only matter to estimators; the ensemble itself is valid.
  if (one.degenerate) *ctx.out << "  warning: effective sample size below " << num(kMinEss) << '\n';
}

void verify_invariance(Context& ctx) {
  const GibbsSpec spec = gibbs_of(ctx.cfg, grid_of(ctx.cfg));
  const FlowParams p = flow_of(ctx.cfg);
  const auto obs = parse_observables(ctx.cfg.text("invariance.observables"));
  InvarianceOptions opt;
  opt.z_max = ctx.cfg.real("invariance.z_max");
  opt.sampler = parse_sampler(ctx.cfg.text("gibbs.sampler"));
  opt.pcn = pcn_of(ctx.cfg);
  const std::size_t count = to_count(ctx.cfg, "gibbs.count");

  // --out names the report file here; the directory default applies otherwise.
  fs::path report_path;
  if (!ctx.out_flag.empty()) {
    report_path = ctx.out_flag;
    if (report_path.has_parent_path()) fs::create_directories(report_path.parent_path());
  } else {
    Context dir_ctx{ctx.cfg, "", ctx.out};
    report_path = dir_ctx.out_dir() / "invariance_report.json";
  }

  const auto report = run_invariance(spec, p, ctx.cfg.real("invariance.t"), obs, count, opt);
  {
    std::ofstream os(report_path, std::ios::binary);
    if (!os) throw PreconditionError("cannot write '" + report_path.string() + "'");
    os << report_json(report, ctx.cfg.resolved());
  }
  *ctx.out << "verify-invariance: m=" << report.m << " t=" << num(report.t)
           << " ess=" << num(report.ess) << " -> " << report_path.string() << '\n';
  for (const auto& r : report.results)
    *ctx.out << "  " << r.name << "  z=" << num(r.z) << (r.pass ? "  pass" : "  FAIL") << '\n';
  *ctx.out << "  " << report.bonferroni_note() << '\n';

  const auto sweep_m = int_list(ctx.cfg, "invariance.sweep_m");
  if (!sweep_m.empty()) {
    const auto res = invariance_sweep(spec, p, sweep_m, ctx.cfg.reals("invariance.sweep_t"), obs,
                                      count, opt);
    const fs::path dir = report_path.has_parent_path() ? report_path.parent_path() : fs::path(".");
    CsvWriter rows(dir / "invariance_sweep.csv", ctx.cfg,
                   {"m", "t", "observable", "mean_before", "se_before", "mean_after", "se_after",
                    "z", "pass"});
    for (const auto& r : res.rows)
      rows.row({num(r.m), num(r.t), r.result.name, num(r.result.mean_before),
                num(r.result.se_before), num(r.result.mean_after), num(r.result.se_after),
                num(r.result.z), r.result.pass ? "1" : "0"});
    CsvWriter drift(dir / "invariance_drift.csv", ctx.cfg,
                    {"m", "observable", "slope", "slope_se", "consistent"});
    for (const auto& d : res.drift)
      drift.row({num(d.m), d.name, num(d.slope), num(d.slope_se), d.consistent ? "1" : "0"});
    *ctx.out << "  sweep -> " << rows.path().string() << ", " << drift.path().string() << '\n';
  }
}

void resonance_scan_cmd(Context& ctx) {
  const int n_max = to_int(ctx.cfg, "resonance.n_max");
  const auto scan = resonance_scan(n_max, to_int(ctx.cfg, "resonance.bins"));
  const fs::path dir = ctx.out_dir();
  CsvWriter summary(dir / "resonance.csv", ctx.cfg,
                    {"record", "n_max", "n", "n1", "R", "ratio", "pairs", "exact_ratio_ge_1"});
  summary.row({"min", num(n_max), num(scan.min.n), num(scan.min.n1), num(scan.min.R),
               num(scan.min.ratio), num(scan.pairs), scan.min_exact_at_least_one ? "1" : "0"});
  summary.row({"min_abs_n_1", num(n_max), num(scan.min_n_equals_one.n),
               num(scan.min_n_equals_one.n1), num(scan.min_n_equals_one.R),
               num(scan.min_n_equals_one.ratio), "", ""});
  CsvWriter hist(dir / "resonance_histogram.csv", ctx.cfg, {"bin_lo", "bin_hi", "count"});
  for (std::size_t b = 0; b < scan.histogram.size(); ++b)
    hist.row({num(scan.bin_edges[b]), num(scan.bin_edges[b + 1]), num(scan.histogram[b])});
  *ctx.out << "resonance-scan: n_max=" << n_max << " min ratio " << num(scan.min.ratio) << " at (n, n1) = ("
           << scan.min.n << ", " << scan.min.n1 << "); |n| = 1 slice min "
           << num(scan.min_n_equals_one.ratio) << "\n  -> " << summary.path().string() << '\n';
}

void bilinear_sweep_cmd(Context& ctx) {
  const auto cells =
      bilinear_sweep(ctx.cfg.reals("bilinear.s"), int_list(ctx.cfg, "bilinear.n_max"),
                     to_int(ctx.cfg, "bilinear.trials"), ctx.cfg.seed("bilinear.seed"),
                     ctx.cfg.real("bilinear.d_tau"));
  CsvWriter csv(ctx.out_dir() / "bilinear_sweep.csv", ctx.cfg,
                {"s", "n_max", "max_ratio", "argmax", "max_adversarial", "max_random",
                 "max_y_ratio"});
  for (const auto& c : cells) {
    csv.row({num(c.s), num(c.n_max), num(c.max_ratio), c.argmax, num(c.max_adversarial),
             num(c.max_random), num(c.max_y_ratio)});
    *ctx.out << "  s=" << num(c.s) << " n_max=" << c.n_max << " max ratio " << num(c.max_ratio)
             << " (" << c.argmax << ")\n";
  }
  *ctx.out << "bilinear-sweep -> " << csv.path().string() << '\n';
}

void kernel_scan_cmd(Context& ctx) {
  const fs::path dir = ctx.out_dir();
  const auto integrals = kernel_integral_scan(ctx.cfg.reals("kernel.alpha"),
                                              ctx.cfg.reals("kernel.rho"), ctx.cfg.reals("kernel.eps"));
  double worst = 0.0;
  {
    CsvWriter csv(dir / "kernel_integrals.csv", ctx.cfg,
                  {"form", "alpha", "param", "integral", "bound", "ratio", "error_estimate"});
    for (const auto& r : integrals) {
      csv.row({num(r.form), num(r.alpha), num(r.param), num(r.integral), num(r.bound),
               num(r.ratio), num(r.error_estimate)});
      worst = std::max(worst, r.ratio);
    }
  }
  *ctx.out << "kernel-scan: max integral ratio " << num(worst) << '\n';

  const auto sums = kernel_sum_scan(ctx.cfg.reals("kernel.sum_tau"), ctx.cfg.integers("kernel.sum_n"),
                                    ctx.cfg.reals("kernel.sum_rho"), ctx.cfg.integer("kernel.cutoff"));
  worst = 0.0;
  {
    CsvWriter csv(dir / "kernel_sums.csv", ctx.cfg,
                  {"form", "tau", "n", "rho", "sum", "tail_bound", "sum_plus_tail"});
    for (const auto& r : sums) {
      csv.row({num(r.form), num(r.tau), num(r.n), num(r.rho), num(r.sum), num(r.tail_bound),
               num(r.sum + r.tail_bound)});
      worst = std::max(worst, r.sum + r.tail_bound);
    }
  }
  *ctx.out << "  max sum (with tail bound) " << num(worst) << '\n';

  {
    CsvWriter csv(dir / "fs_bounds.csv", ctx.cfg,
                  {"s", "r", "n_max", "in_hypothesis", "max_fs", "max_fsr_scaled",
                   "min_sigma_over_R", "points"});
    for (double s : ctx.cfg.reals("kernel.fs_s")) {
      const auto f = fs_bound_scan(s, ctx.cfg.real("kernel.fs_r"), to_int(ctx.cfg, "kernel.fs_n_max"),
                                   to_int(ctx.cfg, "kernel.fs_samples"));
      csv.row({num(f.s), num(f.r), num(f.n_max), f.in_hypothesis ? "1" : "0", num(f.max_fs),
               num(f.max_fsr_scaled), num(f.min_sigma_over_r), num(f.points)});
      *ctx.out << "  F_s scan s=" << num(s) << ": max F_s " << num(f.max_fs) << ", max |n|^(2-4r) F_sr "
               << num(f.max_fsr_scaled) << '\n';
    }
  }

  const auto loc = time_localization_scan(initial_field(ctx.cfg, grid_of(ctx.cfg)),
                                          ctx.cfg.real("kernel.loc_s"), ctx.cfg.reals("kernel.loc_b"),
                                          ctx.cfg.reals("kernel.loc_T"));
  {
    CsvWriter csv(dir / "time_localization.csv", ctx.cfg, {"b", "T", "ratio"});
    for (const auto& r : loc.rows) csv.row({num(r.b), num(r.T), num(r.ratio)});
    CsvWriter slopes(dir / "time_localization_slopes.csv", ctx.cfg, {"b", "slope", "expected"});
    const auto bs = ctx.cfg.reals("kernel.loc_b");
    for (std::size_t i = 0; i < bs.size(); ++i) {
      slopes.row({num(bs[i]), num(loc.slopes[i]), num(0.5 - bs[i])});
      *ctx.out << "  localization b=" << num(bs[i]) << ": slope " << num(loc.slopes[i]) << '\n';
    }
  }
  *ctx.out << "  -> " << dir.string() << '\n';
}

void picard_cmd(Context& ctx) {
  const GridSpec grid = grid_of(ctx.cfg);
  const FourierField phi = initial_field(ctx.cfg, grid);
  const double T = ctx.cfg.real("picard.horizon");
  PicardOptions opt;
  opt.nodes_per_unit_time = to_int(ctx.cfg, "picard.nodes_per_unit_time");
  opt.tolerance = ctx.cfg.real("picard.tolerance");
  opt.dealias = ctx.cfg.flag("flow.dealias");
  const auto res = picard_solve(phi, T, to_int(ctx.cfg, "picard.iterations"), opt);
  const FourierField ref = flow_map(phi, T, flow_of(ctx.cfg));
  FourierField diff = res.endpoint();
  for (int k = 0; k < grid.modes; ++k) diff.coefficients()[k] -= ref.coefficients()[k];

  const fs::path dir = ctx.out_dir();
  CsvWriter csv(dir / "picard.csv", ctx.cfg, {"iteration", "distance", "contraction_factor"});
  for (std::size_t i = 0; i < res.distances.size(); ++i)
    csv.row({num(i), num(res.distances[i]),
             i == 0 ? std::string() : num(res.contraction_factors[i - 1])});
  CsvWriter summary(dir / "picard_summary.csv", ctx.cfg,
                    {"iterations", "converged", "diverged", "phi_l2", "endpoint_diff_l2"});
  summary.row({num(res.iterations), res.converged ? "1" : "0", res.diverged ? "1" : "0",
               num(l2_norm(phi)), num(l2_norm(diff))});
  save_field(dir / "picard_endpoint.csv", res.endpoint(), provenance(ctx.cfg));
  *ctx.out << "picard: " << res.iterations << " iterations, converged " << res.converged
           << ", |endpoint - flow| = " << num(l2_norm(diff)) << "\n  -> " << csv.path().string()
           << '\n';
}

void convergence_cmd(Context& ctx) {
  const auto m_list = int_list(ctx.cfg, "convergence.m_list");
  if (m_list.empty()) throw PreconditionError("convergence.m_list must not be empty");
  const FourierField f0 = initial_field(ctx.cfg, grid_of(ctx.cfg, 2 * m_list.back()));
  const auto rows = convergence_in_m(f0, m_list, flow_of(ctx.cfg));
  CsvWriter csv(ctx.out_dir() / "convergence.csv", ctx.cfg, {"m", "sup_l2_error"});
  for (const auto& r : rows) {
    csv.row({num(r.modes), num(r.sup_error)});
    *ctx.out << "  m=" << r.modes << " sup error " << num(r.sup_error) << '\n';
  }
  *ctx.out << "convergence-m -> " << csv.path().string() << '\n';
}

void recurrence_cmd(Context& ctx) {
  const GibbsSpec spec = gibbs_of(ctx.cfg, grid_of(ctx.cfg));
  const auto res = recurrence_probe(spec, flow_of(ctx.cfg), to_count(ctx.cfg, "recurrence.count"),
                                    ctx.cfg.real("recurrence.horizon"),
                                    ctx.cfg.real("recurrence.radius"),
                                    ctx.cfg.real("recurrence.t_min"), to_int(ctx.cfg, "recurrence.bins"));
  const fs::path dir = ctx.out_dir();
  CsvWriter csv(dir / "recurrence.csv", ctx.cfg, {"sample", "returned", "return_time"});
  for (std::size_t i = 0; i < res.return_times.size(); ++i) {
    const auto& t = res.return_times[i];
    csv.row({num(i), t ? "1" : "0", t ? num(*t) : std::string()});
  }
  CsvWriter hist(dir / "recurrence_histogram.csv", ctx.cfg, {"bin_lo", "bin_hi", "count"});
  for (std::size_t b = 0; b < res.histogram.size(); ++b)
    hist.row({num(res.bin_edges[b]), num(res.bin_edges[b + 1]), num(res.histogram[b])});
  *ctx.out << "recurrence: fraction returned " << num(res.fraction_returned) << "\n  -> "
           << csv.path().string() << '\n';
}

struct Command {
  const char* name;
  const char* help;
  void (*run)(Context&);
};

constexpr Command kCommands[] = {
    {"simulate", "integrate init.* under flow.*; writes trajectory.csv and field files", simulate},
    {"gibbs-sample", "draw an ensemble from gibbs.*; writes ensemble/manifest.json", gibbs_sample},
    {"verify-invariance", "compare observables before/after the flow; writes a JSON report",
     verify_invariance},
    {"resonance-scan", "exhaustive |R(n,n1)| / |n n1 (n-n1)| scan", resonance_scan_cmd},
    {"bilinear-sweep", "max bilinear ratio over adversarial and random fields", bilinear_sweep_cmd},
    {"kernel-scan", "kernel integrals and sums, F_s bounds, time localization", kernel_scan_cmd},
    {"picard", "Duhamel-Picard iteration on init.* against the flow endpoint", picard_cmd},
    {"convergence-m", "sup-in-time L2 error of P_m truncations against 2 max(m)", convergence_cmd},
    {"recurrence", "first return times of Gibbs samples", recurrence_cmd},
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{std::string(version()) + ": Gibbs measure and Bourgain-space experiments for "
               "u_t - u_xxx + dx^{-1} u + u u_x = 0 on the torus"};
  app.name("ostrovsky");
  app.require_subcommand(1);
  app.footer("\n" + schema_help() + "\nExit codes: 0 success, 1 precondition violation, "
             "2 numerical failure.\nDefault output directory: $" + kOutDirEnv + ", else '.'.");

  std::string config_file, out_flag;
  std::vector<std::string> sets;
  int threads = 0;
  bool show_version = false;
  app.add_option("--config", config_file, "key = value config file");
  app.add_option("--set", sets, "override one key, key=value (repeatable)");
  app.add_option("--threads", threads, "cap on worker threads (default: all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_flag,
                 "output directory (verify-invariance: report file path)");
  app.add_flag("--version", show_version, "print the version and exit");

  // Shorthands for frequently varied keys; they override file and --set.
  std::map<std::string, std::string> shorthand;
  auto alias = [&](CLI::App* sub, const std::string& flag, const std::string& key) {
    sub->add_option_function<std::string>(
        flag, [&shorthand, key](const std::string& v) { shorthand[key] = v; },
        "sets " + key);
  };

  const Command* chosen = nullptr;
  for (const auto& c : kCommands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->fallthrough();
    sub->callback([&chosen, &c] { chosen = &c; });
    const std::string name = c.name;
    if (name == "resonance-scan") alias(sub, "--nmax", "resonance.n_max");
    if (name == "bilinear-sweep") {
      alias(sub, "--s", "bilinear.s");
      alias(sub, "--nmax", "bilinear.n_max");
      alias(sub, "--trials", "bilinear.trials");
    }
    if (name == "verify-invariance") alias(sub, "--t", "invariance.t");
    if (name == "picard") alias(sub, "--iters", "picard.iterations");
    if (name == "convergence-m") alias(sub, "--m-list", "convergence.m_list");
    if (name != "resonance-scan" && name != "bilinear-sweep") alias(sub, "--m", "grid.modes");
  }

  // CLI11 wants argv order without the program name reversed.
  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    // --version short-circuits the required subcommand.
    for (const auto& a : args)
      if (a == "--version") {
        out << version() << '\n';
        return kExitOk;
      }
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitPrecondition;
  }

  try {
    Context ctx;
    ctx.out = &out;
    ctx.out_flag = out_flag;
    if (!config_file.empty()) ctx.cfg.load_file(config_file);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos)
        throw PreconditionError("--set expects key=value, got '" + s + "'");
      ctx.cfg.set(s.substr(0, eq), s.substr(eq + 1), "--set");
    }
    for (const auto& [k, v] : shorthand) ctx.cfg.set(k, v, "flag");
    set_thread_count(threads);
    chosen->run(ctx);
    return kExitOk;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const EnsembleBlowUpError& e) {
    err << "numerical failure: " << e.what() << " (sample " << e.index() << ", t = "
        << format_number(e.time()) << ")\n";
    return kExitNumerical;
  } catch (const BlowUpError& e) {
    err << "numerical failure: " << e.what() << " (t = " << format_number(e.time()) << ")\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitPrecondition;
  }
}

}  // namespace ostrovsky::cli
