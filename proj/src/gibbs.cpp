#include "ostrovsky/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "ostrovsky/errors.hpp"
#include "ostrovsky/field_io.hpp"
#include "ostrovsky/version.hpp"

namespace ostrovsky {

Covariance parse_covariance(std::string_view name) {
  if (name == "energy") return Covariance::kEnergy;
  if (name == "positive") return Covariance::kPositive;
  throw PreconditionError("unknown covariance '" + std::string(name) + "' (energy | positive)");
}

std::string_view covariance_name(Covariance c) {
  return c == Covariance::kEnergy ? "energy" : "positive";
}

Sampler parse_sampler(std::string_view name) {
  if (name == "iid-importance") return Sampler::kIidImportance;
  if (name == "pcn-mcmc") return Sampler::kPcnMcmc;
  throw PreconditionError("unknown sampler '" + std::string(name) +
                          "' (iid-importance | pcn-mcmc)");
}

std::string_view sampler_name(Sampler s) {
  return s == Sampler::kIidImportance ? "iid-importance" : "pcn-mcmc";
}

std::vector<double> eigenvalues(double length, long k_max, Covariance c, double mass_shift) {
  if (!(length > 0.0)) throw PreconditionError("grid length must be positive");
  if (k_max < 1) throw PreconditionError("need at least one eigenvalue");
  std::vector<double> v(k_max);
  for (long k = 1; k <= k_max; ++k) {
    const double xi = 2.0 * std::numbers::pi * static_cast<double>(k) / length;
    const double lambda = xi * xi;
    v[k - 1] = c == Covariance::kEnergy ? lambda - 1.0 / lambda + mass_shift
                                        : lambda + 1.0 / lambda;
    if (!(v[k - 1] > 0.0))
      throw PreconditionError("eigenvalue v_" + std::to_string(k) +
                              " is not positive; increase gibbs.mass_shift");
  }
  return v;
}

std::vector<double> trace_check(const GridSpec& grid, long k_max, Covariance c,
                                double mass_shift) {
  if (k_max < grid.modes) throw PreconditionError("trace_check needs k_max >= m");
  const auto v = eigenvalues(grid.length, k_max, c, mass_shift);
  std::vector<double> partial(k_max);
  // Neumaier summation; 1e5 terms of decreasing size otherwise lose ~1e-13.
  double sum = 0.0, comp = 0.0;
  for (long k = 0; k < k_max; ++k) {
    const double term = 2.0 / v[k];
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
    partial[k] = sum + comp;
  }
  return partial;
}

// GibbsSpec -------------------------------------------------------------------

double GibbsSpec::default_cutoff(const GridSpec& grid, Covariance c, double mass_shift) {
  double second_moment = 0.0;
  for (double v : eigenvalues(grid, c, mass_shift)) second_moment += 2.0 / v;
  return 4.0 * std::sqrt(second_moment);
}

void GibbsSpec::validate() const {
  grid.validate();
  if (!std::isfinite(mass_shift)) throw PreconditionError("gibbs.mass_shift must be finite");
  (void)v();  // positivity
  if (cutoff_R && !(*cutoff_R > 0.0 && std::isfinite(*cutoff_R)))
    throw PreconditionError("gibbs.cutoff_R must be positive");
}

double GibbsSpec::cubic_coefficient() const {
  if (!nonlinear) return 0.0;
  return covariance == Covariance::kEnergy ? 1.0 / 6.0 : 1.0 / 3.0;
}

double GibbsSpec::g(const FourierField& u) const {
  const double c = cubic_coefficient();
  return c == 0.0 ? 0.0 : c * cubic_integral(u);
}

std::optional<double> GibbsSpec::resolved_cutoff() const {
  if (auto_cutoff) return default_cutoff(grid, covariance, mass_shift);
  return cutoff_R;
}

bool GibbsSpec::in_support(const FourierField& u) const {
  const auto r = resolved_cutoff();
  return !r || l2_norm(u) <= *r;
}

DensityModel GibbsSpec::density() const { return {v(), cubic_coefficient()}; }

// Sampling --------------------------------------------------------------------

FourierField draw_gaussian(const GridSpec& grid, std::span<const double> v, Engine& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> a(2 * grid.modes);
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = normal(rng) / std::sqrt(v[j / 2]);
  return from_coordinates(a, grid);
}

Ensemble sample_gaussian(const GibbsSpec& spec, std::size_t count, Execution exec) {
  spec.validate();
  if (count < 1) throw PreconditionError("sample count must be >= 1");
  const auto v = spec.v();
  Ensemble ens{spec, Sampler::kIidImportance, spec.seed, {}, {}, 0, 1.0};
  ens.samples.assign(count, WeightedSample{FourierField(spec.grid)});

  auto draw = [&](std::size_t i) {
    Engine rng = make_stream(spec.seed, i);
    WeightedSample& s = ens.samples[i];
    s.field = draw_gaussian(spec.grid, v, rng);
    s.log_weight = -spec.g(s.field);
    s.in_support = spec.in_support(s.field);
  };
  const auto n = static_cast<long>(count);
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) draw(static_cast<std::size_t>(i));
  } else {
    for (long i = 0; i < n; ++i) draw(static_cast<std::size_t>(i));
  }
  return ens;
}

std::pair<FourierField, bool> pcn_step(const FourierField& u, double beta, const GibbsSpec& spec,
                                       Engine& rng) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw PreconditionError("pCN beta must lie in [0, 1]");
  const auto v = spec.v();
  const FourierField xi = draw_gaussian(spec.grid, v, rng);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double r = uniform(rng);  // drawn unconditionally to keep streams aligned
  if (beta == 0.0) return {u, true};

  const double keep = std::sqrt(1.0 - beta * beta);
  FourierField proposal(spec.grid);
  for (int k = 0; k < spec.grid.modes; ++k)
    proposal.coefficients()[k] = keep * u.coefficients()[k] + beta * xi.coefficients()[k];

  if (!spec.in_support(proposal)) return {u, false};
  const double log_ratio = spec.g(u) - spec.g(proposal);
  if (log_ratio >= 0.0 || r < std::exp(log_ratio)) return {proposal, true};
  return {u, false};
}

Ensemble pcn_chain(const GibbsSpec& spec, std::size_t count, const PcnSettings& settings,
                   Execution exec) {
  spec.validate();
  if (count < 1) throw PreconditionError("sample count must be >= 1");
  if (settings.chains < 1) throw PreconditionError("pcn.chains must be >= 1");
  if (count % static_cast<std::size_t>(settings.chains) != 0)
    throw PreconditionError("sample count must be a multiple of pcn.chains");
  if (settings.burn_in < 0 || settings.thin < 1)
    throw PreconditionError("pcn.burn_in must be >= 0 and pcn.thin >= 1");
  if (!(settings.beta > 0.0 && settings.beta <= 1.0))
    throw PreconditionError("pcn.beta must lie in (0, 1]");

  const auto v = spec.v();
  const auto chains = static_cast<std::size_t>(settings.chains);
  const std::size_t length = count / chains;
  Ensemble ens{spec, Sampler::kPcnMcmc, spec.seed, {}, settings, static_cast<int>(length), 0.0};
  ens.samples.assign(length * chains, WeightedSample{FourierField(spec.grid)});
  std::vector<long> accepted(chains, 0);

  auto run = [&](std::size_t c) {
    Engine rng = make_stream(spec.seed, c);
    FourierField u = draw_gaussian(spec.grid, v, rng);
    for (int tries = 0; !spec.in_support(u); ++tries) {
      if (tries > 1000) throw NumericalError("cannot start pCN chain inside the cutoff ball");
      u = draw_gaussian(spec.grid, v, rng);
    }
    for (int i = 0; i < settings.burn_in; ++i) u = pcn_step(u, settings.beta, spec, rng).first;
    for (std::size_t i = 0; i < length; ++i) {
      for (int t = 0; t < settings.thin; ++t) {
        auto [next, ok] = pcn_step(u, settings.beta, spec, rng);
        accepted[c] += ok;
        u = std::move(next);
      }
      ens.samples[c * length + i] = WeightedSample{u, 0.0, true};
    }
  };
  const auto n = static_cast<long>(chains);
  if (exec == Execution::kParallel) {
    // Exceptions must not escape an OpenMP region; keep the first by chain index.
    std::vector<std::exception_ptr> errors(chains);
#pragma omp parallel for schedule(dynamic)
    for (long c = 0; c < n; ++c) {
      try {
        run(static_cast<std::size_t>(c));
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  } else {
    for (long c = 0; c < n; ++c) run(static_cast<std::size_t>(c));
  }
  long total = 0;
  for (long a : accepted) total += a;
  ens.acceptance_rate =
      static_cast<double>(total) / static_cast<double>(length * chains * settings.thin);
  return ens;
}

double cylinder_probability(const GibbsSpec& spec,
                            std::span<const std::pair<double, double>> box) {
  spec.validate();
  if (box.size() > static_cast<std::size_t>(2 * spec.grid.modes))
    throw PreconditionError("cylinder dimension r exceeds 2m");
  const auto v = spec.v();
  double p = 1.0;
  for (std::size_t j = 0; j < box.size(); ++j) {
    const auto [lo, hi] = box[j];
    if (std::isnan(lo) || std::isnan(hi)) throw PreconditionError("cylinder bounds must not be NaN");
    if (!(lo < hi)) return 0.0;
    const double s = std::sqrt(v[j / 2]) / std::numbers::sqrt2;
    // Phi(hi) - Phi(lo) written with erfc on the side that avoids cancellation.
    const double mass = lo >= 0.0   ? 0.5 * (std::erfc(lo * s) - std::erfc(hi * s))
                        : hi <= 0.0 ? 0.5 * (std::erfc(-hi * s) - std::erfc(-lo * s))
                                    : 1.0 - 0.5 * (std::erfc(hi * s) + std::erfc(-lo * s));
    p *= mass;
  }
  return p;
}

// Estimators ------------------------------------------------------------------

namespace {

Estimate importance_estimate(const Ensemble& ens, std::span<const double> values) {
  const auto& s = ens.samples;
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& w : s)
    if (w.in_support) top = std::max(top, w.log_weight);
  Estimate e;
  if (!std::isfinite(top)) {
    e.mean = std::numeric_limits<double>::quiet_NaN();
    e.std_error = e.mean;
    e.degenerate = true;
    return e;
  }
  std::vector<double> w(s.size());
  double total = 0.0, total_sq = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    w[i] = s[i].in_support ? std::exp(s[i].log_weight - top) : 0.0;
    total += w[i];
    total_sq += w[i] * w[i];
    weighted += w[i] * values[i];
  }
  e.mean = weighted / total;
  double var = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = w[i] * (values[i] - e.mean);
    var += d * d;
  }
  e.std_error = std::sqrt(var) / total;
  e.ess = total * total / total_sq;
  e.degenerate = e.ess < kMinEss;
  return e;
}

Estimate batch_means_estimate(const Ensemble& ens, std::span<const double> values) {
  const std::size_t length = static_cast<std::size_t>(ens.chain_length);
  const std::size_t chains = length > 0 ? values.size() / length : 0;
  Estimate e;
  if (chains == 0) {
    e.mean = e.std_error = std::numeric_limits<double>::quiet_NaN();
    e.degenerate = true;
    return e;
  }
  double sum = 0.0;
  for (double x : values) sum += x;
  const double n = static_cast<double>(values.size());
  e.mean = sum / n;

  const auto batch = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(length)));
  const std::size_t per_chain = length / batch;
  std::vector<double> means;
  for (std::size_t c = 0; c < chains; ++c)
    for (std::size_t b = 0; b < per_chain; ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < batch; ++i) acc += values[c * length + b * batch + i];
      means.push_back(acc / static_cast<double>(batch));
    }
  double var_means = 0.0, var = 0.0;
  for (double m : means) var_means += (m - e.mean) * (m - e.mean);
  for (double x : values) var += (x - e.mean) * (x - e.mean);
  const double nb = static_cast<double>(means.size());
  var_means = nb > 1 ? var_means / (nb - 1) : 0.0;
  var = n > 1 ? var / (n - 1) : 0.0;
  e.std_error = std::sqrt(var_means / nb);
  e.ess = e.std_error > 0.0 ? var / (e.std_error * e.std_error) : n;
  e.degenerate = e.ess < kMinEss;
  return e;
}

}  // namespace

Estimate gibbs_expectation(const Ensemble& ens, std::span<const double> values) {
  if (ens.samples.empty()) throw PreconditionError("empty ensemble");
  if (values.size() != ens.samples.size())
    throw PreconditionError("observable values do not match the ensemble size");
  return ens.sampler == Sampler::kPcnMcmc ? batch_means_estimate(ens, values)
                                          : importance_estimate(ens, values);
}

Estimate gibbs_expectation(const Ensemble& ens,
                           const std::function<double(const FourierField&)>& f) {
  std::vector<double> values(ens.samples.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = f(ens.samples[i].field);
  return gibbs_expectation(ens, values);
}

Estimate cylinder_frequency(const Ensemble& ens,
                            std::span<const std::pair<double, double>> box) {
  return gibbs_expectation(ens, [&](const FourierField& u) {
    const auto a = to_coordinates(u);
    for (std::size_t j = 0; j < box.size(); ++j)
      if (!(a[j] >= box[j].first && a[j] < box[j].second)) return 0.0;
    return 1.0;
  });
}

// Persistence -----------------------------------------------------------------

namespace {

std::string sample_file(std::size_t i) {
  std::ostringstream os;
  os << "sample_" << std::setw(6) << std::setfill('0') << i << ".csv";
  return os.str();
}

}  // namespace

void write_ensemble(const std::filesystem::path& dir, const Ensemble& ens,
                    const std::map<std::string, std::string>& config) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw PreconditionError("cannot create " + dir.string() + ": " + ec.message());

  using nlohmann::ordered_json;
  ordered_json j;
  j["schema"] = "ostrovsky-ensemble";
  j["manifest_version"] = kManifestVersion;
  j["version"] = std::string(version());
  const GibbsSpec& s = ens.spec;
  j["spec"] = {{"A", s.grid.length},
               {"m", s.grid.modes},
               {"N", s.grid.points},
               {"covariance", covariance_name(s.covariance)},
               {"mass_shift", s.mass_shift},
               {"nonlinear", s.nonlinear},
               {"cutoff_R", s.cutoff_R ? ordered_json(*s.cutoff_R) : ordered_json(nullptr)},
               {"auto_cutoff", s.auto_cutoff},
               {"resolved_cutoff", s.resolved_cutoff() ? ordered_json(*s.resolved_cutoff())
                                                       : ordered_json(nullptr)},
               {"seed", s.seed}};
  j["sampler"] = sampler_name(ens.sampler);
  j["master_seed"] = ens.master_seed;
  j["count"] = ens.samples.size();
  if (ens.sampler == Sampler::kPcnMcmc)
    j["pcn"] = {{"beta", ens.pcn.beta},
                {"chains", ens.pcn.chains},
                {"burn_in", ens.pcn.burn_in},
                {"thin", ens.pcn.thin},
                {"chain_length", ens.chain_length},
                {"acceptance_rate", ens.acceptance_rate}};
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = cfg;

  std::vector<std::string> comments{std::string(version())};
  for (const auto& [k, v] : config) comments.push_back(k + "=" + v);
  ordered_json samples = ordered_json::array();
  for (std::size_t i = 0; i < ens.samples.size(); ++i) {
    const auto name = sample_file(i);
    save_field(dir / name, ens.samples[i].field, comments);
    samples.push_back({{"file", name},
                       {"log_weight", ens.samples[i].log_weight},
                       {"in_support", ens.samples[i].in_support}});
  }
  j["samples"] = samples;

  std::ofstream os(dir / "manifest.json");
  if (!os) throw PreconditionError("cannot write " + (dir / "manifest.json").string());
  os << j.dump(2) << '\n';
}

Ensemble read_ensemble(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  std::ifstream is(path);
  if (!is) throw PreconditionError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
    if (j.at("schema") != "ostrovsky-ensemble")
      throw PreconditionError(path.string() + " is not an ensemble manifest");
    if (j.at("manifest_version").get<int>() != kManifestVersion)
      throw PreconditionError("unsupported manifest_version in " + path.string());
    Ensemble ens;
    const auto& s = j.at("spec");
    ens.spec.grid = GridSpec::make(s.at("A").get<double>(), s.at("m").get<int>(),
                                   s.at("N").get<int>());
    ens.spec.covariance = parse_covariance(s.at("covariance").get<std::string>());
    ens.spec.mass_shift = s.at("mass_shift").get<double>();
    ens.spec.nonlinear = s.at("nonlinear").get<bool>();
    if (!s.at("cutoff_R").is_null()) ens.spec.cutoff_R = s.at("cutoff_R").get<double>();
    ens.spec.auto_cutoff = s.at("auto_cutoff").get<bool>();
    ens.spec.seed = s.at("seed").get<std::uint64_t>();
    ens.sampler = parse_sampler(j.at("sampler").get<std::string>());
    ens.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (ens.sampler == Sampler::kPcnMcmc) {
      const auto& p = j.at("pcn");
      ens.pcn = {p.at("beta").get<double>(), p.at("chains").get<int>(),
                 p.at("burn_in").get<int>(), p.at("thin").get<int>()};
      ens.chain_length = p.at("chain_length").get<int>();
      ens.acceptance_rate = p.at("acceptance_rate").get<double>();
    }
    for (const auto& e : j.at("samples")) {
      FourierField f = load_field(dir / e.at("file").get<std::string>());
      if (!(f.grid() == ens.spec.grid))
        throw PreconditionError("sample " + e.at("file").get<std::string>() +
                                " does not match the manifest grid");
      ens.samples.push_back({std::move(f), e.at("log_weight").get<double>(),
                             e.at("in_support").get<bool>()});
    }
    return ens;
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError("malformed manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace ostrovsky
