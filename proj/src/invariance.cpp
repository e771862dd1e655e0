#include "ostrovsky/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "ostrovsky/errors.hpp"
#include "ostrovsky/field_io.hpp"
#include "ostrovsky/version.hpp"

namespace ostrovsky {

double Observable::operator()(const FourierField& u) const {
  switch (kind) {
    case ObservableKind::kL2Squared: {
      const double n = l2_norm(u);
      return n * n;
    }
    case ObservableKind::kHsNorm:
      return sobolev_norm(u, s);
    case ObservableKind::kModePower:
      if (k < 1 || k > u.modes()) throw PreconditionError(name + ": mode outside the band");
      return 2.0 * u.grid().length * std::norm(u.coefficients()[k - 1]);
    case ObservableKind::kCubicIntegral:
      return cubic_integral(u);
    case ObservableKind::kHamiltonian:
      return hamiltonian(u);
    case ObservableKind::kCylinderIndicator: {
      if (j < 1 || j > 2 * u.modes()) throw PreconditionError(name + ": coordinate outside 1..2m");
      const double a = to_coordinates(u)[j - 1];
      return (a >= lo && a < hi) ? 1.0 : 0.0;
    }
    case ObservableKind::kBallIndicator:
      return l2_norm(u) <= radius ? 1.0 : 0.0;
  }
  return 0.0;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits on commas that are not inside parentheses.
std::vector<std::string_view> split_top(std::string_view list) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= list.size(); ++i) {
    if (i == list.size() || (list[i] == ',' && depth == 0)) {
      auto item = trim(list.substr(start, i - start));
      if (!item.empty()) out.push_back(item);
      start = i + 1;
    } else if (list[i] == '(') {
      ++depth;
    } else if (list[i] == ')') {
      --depth;
    }
  }
  if (depth != 0) throw PreconditionError("unbalanced parentheses in observable list");
  return out;
}

int parse_int(std::string_view token, const std::string& ctx) {
  const double x = parse_number(token, ctx);
  if (x != std::floor(x)) throw PreconditionError(ctx + ": expected an integer");
  return static_cast<int>(x);
}

}  // namespace

std::vector<Observable> parse_observables(std::string_view list) {
  std::vector<Observable> out;
  for (auto item : split_top(list)) {
    const std::string text(item);
    std::string_view head = item;
    std::vector<std::string_view> args;
    if (const auto open = item.find('('); open != std::string_view::npos) {
      if (item.back() != ')') throw PreconditionError("malformed observable '" + text + "'");
      head = trim(item.substr(0, open));
      const auto inner = item.substr(open + 1, item.size() - open - 2);
      std::size_t start = 0;
      for (std::size_t i = 0; i <= inner.size(); ++i)
        if (i == inner.size() || inner[i] == ',') {
          args.push_back(trim(inner.substr(start, i - start)));
          start = i + 1;
        }
    }
    auto expect = [&](std::size_t n) {
      if (args.size() != n)
        throw PreconditionError("observable '" + text + "' takes " + std::to_string(n) +
                                " argument(s)");
    };
    Observable o;
    if (head == "l2_squared") {
      expect(0);
      o.kind = ObservableKind::kL2Squared;
    } else if (head == "cubic_integral") {
      expect(0);
      o.kind = ObservableKind::kCubicIntegral;
    } else if (head == "hamiltonian") {
      expect(0);
      o.kind = ObservableKind::kHamiltonian;
    } else if (head == "hs_norm") {
      expect(1);
      o.kind = ObservableKind::kHsNorm;
      o.s = parse_number(args[0], text);
    } else if (head == "mode_power") {
      expect(1);
      o.kind = ObservableKind::kModePower;
      const auto dots = args[0].find("..");
      int first = 0, last = 0;
      if (dots == std::string_view::npos) {
        first = last = parse_int(args[0], text);
      } else {
        first = parse_int(args[0].substr(0, dots), text);
        last = parse_int(args[0].substr(dots + 2), text);
      }
      if (first < 1 || last < first) throw PreconditionError("bad mode range in '" + text + "'");
      for (int k = first; k <= last; ++k) {
        Observable e = o;
        e.k = k;
        e.name = "mode_power(" + std::to_string(k) + ")";
        out.push_back(e);
      }
      continue;
    } else if (head == "cylinder_indicator") {
      expect(3);
      o.kind = ObservableKind::kCylinderIndicator;
      o.j = parse_int(args[0], text);
      o.lo = parse_number(args[1], text);
      o.hi = parse_number(args[2], text);
      if (o.j < 1) throw PreconditionError("cylinder coordinate is 1-based in '" + text + "'");
    } else if (head == "ball_indicator") {
      expect(1);
      o.kind = ObservableKind::kBallIndicator;
      o.radius = parse_number(args[0], text);
    } else {
      throw PreconditionError("unknown observable '" + text + "'");
    }
    o.name = text;
    out.push_back(o);
  }
  if (out.empty()) throw PreconditionError("no observables given");
  return out;
}

// -----------------------------------------------------------------------------

bool InvarianceReport::all_pass() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
}

std::string InvarianceReport::bonferroni_note() const {
  // Two-sided tail of |z| > z_max for a single standard normal.
  const double alpha = std::erfc(z_max / std::sqrt(2.0));
  std::ostringstream os;
  os << results.size() << " observables gated at |z| <= " << format_number(z_max)
     << "; per-test false alarm " << format_number(alpha) << ", family-wise <= "
     << format_number(std::min(1.0, alpha * static_cast<double>(results.size())))
     << " (Bonferroni). Before/after share samples, so z is conservative.";
  return os.str();
}

std::vector<FourierField> push_forward(const Ensemble& ens, double t, const FlowParams& p,
                                       Execution exec) {
  p.validate();
  const std::size_t n = ens.samples.size();
  std::vector<FourierField> out(n, FourierField(ens.spec.grid));
  std::vector<std::exception_ptr> errors(n);
  auto one = [&](std::size_t i) {
    try {
      out[i] = flow_map(ens.samples[i].field, t, p);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const auto count = static_cast<long>(n);
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < count; ++i) one(static_cast<std::size_t>(i));
  } else {
    for (long i = 0; i < count; ++i) one(static_cast<std::size_t>(i));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const BlowUpError& e) {
      throw EnsembleBlowUpError(i, e.time(),
                                "sample " + std::to_string(i) + ": " + std::string(e.what()));
    }
  }
  return out;
}

InvarianceReport compare_ensembles(const Ensemble& ens, const std::vector<FourierField>& after,
                                   double t, const std::vector<Observable>& obs, double z_max) {
  if (after.size() != ens.samples.size())
    throw PreconditionError("pushforward does not match the ensemble size");
  if (!(z_max > 0.0)) throw PreconditionError("z_max must be positive");
  InvarianceReport rep;
  rep.m = ens.spec.grid.modes;
  rep.t = t;
  rep.count = ens.samples.size();
  rep.seed = ens.master_seed;
  rep.z_max = z_max;
  rep.sampler = std::string(sampler_name(ens.sampler));

  std::vector<double> before_vals(rep.count), after_vals(rep.count);
  for (const auto& o : obs) {
    for (std::size_t i = 0; i < rep.count; ++i) {
      before_vals[i] = o(ens.samples[i].field);
      after_vals[i] = o(after[i]);
    }
    const Estimate b = gibbs_expectation(ens, before_vals);
    const Estimate a = gibbs_expectation(ens, after_vals);
    if (b.degenerate || a.degenerate)
      throw NumericalError("degenerate effective sample size " + format_number(b.ess) +
                           " (< " + format_number(kMinEss) + ")");
    rep.ess = b.ess;
    ObservableResult r{o.name, b.mean, b.std_error, a.mean, a.std_error, 0.0, true};
    const double diff = a.mean - b.mean;
    const double se = std::sqrt(b.std_error * b.std_error + a.std_error * a.std_error);
    if (diff != 0.0)
      r.z = se > 0.0 ? diff / se : std::copysign(std::numeric_limits<double>::infinity(), diff);
    r.pass = std::abs(r.z) <= z_max;
    rep.results.push_back(r);
  }
  return rep;
}

InvarianceReport run_invariance(const GibbsSpec& spec, const FlowParams& p, double t,
                                const std::vector<Observable>& obs, std::size_t count,
                                const InvarianceOptions& options) {
  if (count == 0) throw PreconditionError("invariance needs count >= 1");
  if (!std::isfinite(t)) throw PreconditionError("flow time must be finite");
  if (obs.empty()) throw PreconditionError("no observables given");
  const Ensemble ens = options.sampler == Sampler::kPcnMcmc
                           ? pcn_chain(spec, count, options.pcn, options.exec)
                           : sample_gaussian(spec, count, options.exec);
  const auto after = push_forward(ens, t, p, options.exec);
  return compare_ensembles(ens, after, t, obs, options.z_max);
}

std::string report_json(const InvarianceReport& report,
                        const std::map<std::string, std::string>& config) {
  using nlohmann::ordered_json;
  auto num = [](double x) {
    // JSON has no inf/nan; keep them readable as strings.
    return std::isfinite(x) ? ordered_json(x) : ordered_json(format_number(x));
  };
  ordered_json meta = {{"m", report.m},       {"t", report.t},
                       {"count", report.count}, {"seed", report.seed},
                       {"ess", num(report.ess)}, {"z_max", report.z_max},
                       {"sampler", report.sampler}, {"all_pass", report.all_pass()},
                       {"bonferroni", report.bonferroni_note()},
                       {"version", std::string(version())}};
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  meta["config"] = cfg;
  ordered_json results = ordered_json::array();
  for (const auto& r : report.results)
    results.push_back({{"name", r.name},
                       {"mean_before", num(r.mean_before)},
                       {"se_before", num(r.se_before)},
                       {"mean_after", num(r.mean_after)},
                       {"se_after", num(r.se_after)},
                       {"z", num(r.z)},
                       {"pass", r.pass}});
  ordered_json j = {{"meta", meta}, {"results", results}};
  return j.dump(2) + "\n";
}

// -----------------------------------------------------------------------------

SweepResult invariance_sweep(const GibbsSpec& base, const FlowParams& p,
                             const std::vector<int>& m_list, const std::vector<double>& t_list,
                             const std::vector<Observable>& obs, std::size_t count,
                             const InvarianceOptions& options) {
  if (count == 0) throw PreconditionError("invariance sweep needs count >= 1");
  if (m_list.empty() || t_list.empty()) throw PreconditionError("empty m or t list");
  SweepResult out;
  for (int m : m_list) {
    GibbsSpec spec = base;
    spec.grid = base.grid.with_modes(m);
    const Ensemble ens = options.sampler == Sampler::kPcnMcmc
                             ? pcn_chain(spec, count, options.pcn, options.exec)
                             : sample_gaussian(spec, count, options.exec);
    std::vector<InvarianceReport> per_t;
    for (double t : t_list) {
      per_t.push_back(compare_ensembles(ens, push_forward(ens, t, p, options.exec), t, obs,
                                        options.z_max));
      for (const auto& r : per_t.back().results) out.rows.push_back({m, t, r});
    }
    for (std::size_t o = 0; o < obs.size(); ++o) {
      // Weighted least squares of mean_after against t, weights 1/se^2.
      double sw = 0.0, st = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < t_list.size(); ++i) {
        const auto& r = per_t[i].results[o];
        const double w = r.se_after > 0.0 ? 1.0 / (r.se_after * r.se_after) : 0.0;
        sw += w;
        st += w * t_list[i];
        sy += w * r.mean_after;
      }
      DriftRow d{m, obs[o].name, 0.0, 0.0, true};
      if (sw > 0.0 && t_list.size() >= 2) {
        const double tb = st / sw, yb = sy / sw;
        double stt = 0.0, sty = 0.0;
        for (std::size_t i = 0; i < t_list.size(); ++i) {
          const auto& r = per_t[i].results[o];
          const double w = r.se_after > 0.0 ? 1.0 / (r.se_after * r.se_after) : 0.0;
          stt += w * (t_list[i] - tb) * (t_list[i] - tb);
          sty += w * (t_list[i] - tb) * (r.mean_after - yb);
        }
        if (stt > 0.0) {
          d.slope = sty / stt;
          d.slope_se = 1.0 / std::sqrt(stt);
          d.consistent = std::abs(d.slope) <= 3.0 * d.slope_se;
        }
      }
      out.drift.push_back(d);
    }
  }
  return out;
}

// -----------------------------------------------------------------------------

RecurrenceResult recurrence_probe(const GibbsSpec& spec, const FlowParams& p,
                                  std::size_t sample_count, double horizon, double radius,
                                  double t_min, int bins, Execution exec) {
  spec.validate();
  p.validate();
  if (!(radius >= 0.0)) throw PreconditionError("recurrence radius must be >= 0");
  if (!(horizon > 0.0)) throw PreconditionError("recurrence horizon must be positive");
  if (!(t_min >= 0.0) || t_min > horizon) throw PreconditionError("need 0 <= t_min <= horizon");
  if (sample_count == 0) throw PreconditionError("recurrence needs at least one sample");
  if (bins < 1) throw PreconditionError("histogram needs at least one bin");

  const auto v = spec.v();
  const long steps = static_cast<long>(std::ceil(horizon / p.dt - 1e-9));
  RecurrenceResult res;
  res.return_times.resize(sample_count);
  std::vector<std::exception_ptr> errors(sample_count);

  auto one = [&](std::size_t i) {
    try {
      Engine rng = make_stream(spec.seed, i);
      FourierField u0 = draw_gaussian(spec.grid, v, rng);
      for (int tries = 0; !spec.in_support(u0); ++tries) {
        if (tries > 1000) throw NumericalError("cannot draw inside the cutoff ball");
        u0 = draw_gaussian(spec.grid, v, rng);
      }
      FourierField u = u0;
      GalerkinStepper stepper(spec.grid, p.dt, p.integrator, p.dealias, p.nonlinear);
      const double scale = 2.0 * spec.grid.length;
      for (long n = 1; n <= steps; ++n) {
        stepper.step(u.coefficients());
        const double t = p.dt * static_cast<double>(n);
        if (t < t_min - 1e-12) continue;
        double d2 = 0.0;
        for (int k = 0; k < spec.grid.modes; ++k)
          d2 += std::norm(u.coefficients()[k] - u0.coefficients()[k]);
        if (!std::isfinite(d2)) throw BlowUpError(t, "recurrence run blew up");
        if (std::sqrt(scale * d2) < radius) {
          res.return_times[i] = t;
          return;
        }
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const auto count = static_cast<long>(sample_count);
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) one(static_cast<std::size_t>(i));
  } else {
    for (long i = 0; i < count; ++i) one(static_cast<std::size_t>(i));
  }
  for (std::size_t i = 0; i < sample_count; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const BlowUpError& e) {
      throw EnsembleBlowUpError(i, e.time(),
                                "sample " + std::to_string(i) + ": " + std::string(e.what()));
    }
  }

  res.bin_edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b)
    res.bin_edges[b] = t_min + (horizon - t_min) * static_cast<double>(b) / bins;
  res.histogram.assign(bins, 0);
  std::size_t returned = 0;
  for (const auto& rt : res.return_times) {
    if (!rt) continue;
    ++returned;
    const double width = horizon - t_min;
    int b = width > 0.0 ? static_cast<int>((*rt - t_min) / width * bins) : 0;
    res.histogram[std::clamp(b, 0, bins - 1)]++;
  }
  res.fraction_returned = static_cast<double>(returned) / static_cast<double>(sample_count);
  return res;
}

}  // namespace ostrovsky
