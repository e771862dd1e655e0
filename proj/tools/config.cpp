#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "ostrovsky/errors.hpp"
#include "ostrovsky/field_io.hpp"

namespace ostrovsky::cli {

namespace {

using enum KeyType;

const std::vector<KeyInfo> kSchema = {
    {"grid.length", kReal, "6.283185307179586", "domain length A"},
    {"grid.modes", kInt, "8", "retained wavenumbers m"},
    {"grid.points", kInt, "0", "quadrature points N (0 selects the alias-free 4m)"},

    {"flow.dt", kReal, "0.001", "time step"},
    {"flow.horizon", kReal, "1", "final time T of simulate"},
    {"flow.integrator", kText, "etdrk4", "etdrk4 | strang-split | lawson-gauss"},
    {"flow.dealias", kBool, "true", "zero-padded nonlinearity"},
    {"flow.nonlinear", kBool, "true", "false integrates the linear part only"},
    {"flow.record_every", kInt, "100", "steps between trajectory records"},
    {"flow.snapshots", kBool, "false", "simulate writes one field file per record"},

    {"init.kind", kText, "smooth", "initial data: smooth | cos | file"},
    {"init.k0", kReal, "2", "smooth: spectral width, a_j ~ N(0, exp(-(k/k0)^2))"},
    {"init.norm", kReal, "1", "smooth, cos: L2 norm of the initial field"},
    {"init.seed", kInt, "1", "smooth: seed"},
    {"init.index", kInt, "0", "smooth: stream index under the seed"},
    {"init.file", kText, "", "file: field CSV to load"},

    {"gibbs.covariance", kText, "energy", "energy (invariant ladder) | positive"},
    {"gibbs.mass_shift", kReal, "2", "energy ladder: v_k = lambda - 1/lambda + shift"},
    {"gibbs.nonlinear", kBool, "true", "false sets g = 0, i.e. samples w itself"},
    {"gibbs.cutoff", kText, "auto", "L2 ball radius: auto (4 x RMS norm) | none | number"},
    {"gibbs.seed", kInt, "1", "master seed of the sample streams"},
    {"gibbs.sampler", kText, "iid-importance", "iid-importance | pcn-mcmc"},
    {"gibbs.count", kInt, "20000", "ensemble size"},

    {"pcn.beta", kReal, "0.2", "proposal step, 0 < beta <= 1"},
    {"pcn.chains", kInt, "8", "independent chains (count must be a multiple)"},
    {"pcn.burn_in", kInt, "1000", "discarded steps per chain"},
    {"pcn.thin", kInt, "10", "steps between kept states"},

    {"invariance.t", kReal, "1", "flow time of the comparison"},
    {"invariance.observables", kText,
     "mode_power(1..4),cubic_integral,hamiltonian,ball_indicator(1.5)",
     "l2_squared, hs_norm(s), mode_power(k or a..b), cubic_integral, hamiltonian, "
     "cylinder_indicator(j,lo,hi), ball_indicator(R)"},
    {"invariance.z_max", kReal, "3", "pass gate |z| <= z_max per observable"},
    {"invariance.sweep_m", kIntList, "", "non-empty: also sweep these m over sweep_t"},
    {"invariance.sweep_t", kRealList, "0.5,1", "times of the sweep"},

    {"recurrence.count", kInt, "16", "samples probed"},
    {"recurrence.horizon", kReal, "1000", "longest time followed"},
    {"recurrence.radius", kReal, "0.25", "return radius in L2"},
    {"recurrence.t_min", kReal, "1", "earliest time counted as a return"},
    {"recurrence.bins", kInt, "20", "histogram bins"},

    {"picard.horizon", kReal, "0.1", "interval [0, T] of the iteration"},
    {"picard.iterations", kInt, "30", "maximum iterations"},
    {"picard.nodes_per_unit_time", kInt, "4096", "trapezoidal nodes per unit time (>= 64)"},
    {"picard.tolerance", kReal, "1e-12", "stop once d_n <= tolerance * max(1, ||phi||)"},

    {"convergence.m_list", kIntList, "8,16,32", "increasing m; reference at 2 max(m)"},

    {"resonance.n_max", kInt, "256", "largest |n|, |n1| scanned"},
    {"resonance.bins", kInt, "20", "histogram bins of |R| / |n n1 (n - n1)|"},

    {"bilinear.s", kRealList, "0,-0.5,-0.6", "regularities"},
    {"bilinear.n_max", kIntList, "16,32,64", "lattice sizes"},
    {"bilinear.trials", kInt, "8", "random pairs per n_max"},
    {"bilinear.seed", kInt, "1", "seed of the random pairs"},
    {"bilinear.d_tau", kReal, "0.25", "tau grid spacing"},

    {"kernel.alpha", kRealList, "0,1,-1,10,-10,1000,-1000,1e6,-1e6", "alpha grid of the integrals"},
    {"kernel.rho", kRealList, "0.25,0.5,0.75", "rho of the second integral, in (0, 1)"},
    {"kernel.eps", kRealList, "0.5,1", "epsilon of the third integral"},
    {"kernel.sum_tau", kRealList, "0,1,-1,10,-10,1000,-1000,1e6,-1e6", "tau grid of the sums"},
    {"kernel.sum_n", kIntList, "1,2,3,5,10,30,100", "n (or n1) grid of the sums"},
    {"kernel.sum_rho", kRealList, "0.75,0.9", "rho of the third sum, > 2/3"},
    {"kernel.cutoff", kInt, "100000", "sums run over |n1| <= cutoff plus a tail bound"},
    {"kernel.fs_s", kRealList, "0,-0.5", "s values of the F_s scan"},
    {"kernel.fs_r", kReal, "0.2", "r of F_{s,r}"},
    {"kernel.fs_n_max", kInt, "64", "lattice size of the F_s scan"},
    {"kernel.fs_samples", kInt, "8", "random modulation perturbations per (n, n1)"},
    {"kernel.loc_s", kReal, "0", "Sobolev index of the time-localization scan"},
    {"kernel.loc_b", kRealList, "0.25,0.4", "b values, in (0, 1/2]"},
    {"kernel.loc_T", kRealList, "0.5,0.25,0.125,0.0625,0.03125,0.015625", "cutoff times T"},

    {"output.dir", kText, "", "output directory (empty: $OSTROVSKY_OUT_DIR, else .)"},
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

long parse_long(std::string_view token, const std::string& what) {
  long v = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end || token.empty())
    throw PreconditionError(what + ": expected an integer, got '" + std::string(token) + "'");
  return v;
}

bool parse_bool(std::string_view token, const std::string& what) {
  if (token == "true" || token == "1" || token == "yes" || token == "on") return true;
  if (token == "false" || token == "0" || token == "no" || token == "off") return false;
  throw PreconditionError(what + ": expected true or false, got '" + std::string(token) + "'");
}

void check_value(const KeyInfo& k, std::string_view value, const std::string& what) {
  switch (k.type) {
    case kReal:
      parse_number(value, what);
      break;
    case kInt:
      parse_long(value, what);
      break;
    case kBool:
      parse_bool(value, what);
      break;
    case kText:
      break;
    case kRealList:
      for (auto t : split_commas(value)) parse_number(t, what);
      break;
    case kIntList:
      for (auto t : split_commas(value)) parse_long(t, what);
      break;
  }
}

}  // namespace

const std::vector<KeyInfo>& schema() { return kSchema; }

std::string schema_help() {
  std::ostringstream os;
  os << "Config keys (file lines 'key = value', or --set key=value), with defaults:\n";
  std::string section;
  for (const auto& k : kSchema) {
    const std::string sec = k.key.substr(0, k.key.find('.'));
    if (sec != section) os << '\n';
    section = sec;
    os << "  " << k.key << " = " << k.default_value << "\n      " << k.help << '\n';
  }
  return os.str();
}

RunConfig::RunConfig() {
  for (const auto& k : kSchema) values_[k.key] = k.default_value;
}

const KeyInfo& RunConfig::info(std::string_view key) const {
  for (const auto& k : kSchema)
    if (k.key == key) return k;
  throw PreconditionError("unknown config key '" + std::string(key) + "'");
}

void RunConfig::set(std::string_view key, std::string_view value, std::string_view origin) {
  const std::string where(origin);
  const KeyInfo* k = nullptr;
  for (const auto& cand : kSchema)
    if (cand.key == key) k = &cand;
  if (k == nullptr) throw PreconditionError(where + ": unknown key '" + std::string(key) + "'");
  value = trim(value);
  check_value(*k, value, where + ": key '" + k->key + "'");
  values_[k->key] = std::string(value);
}

void RunConfig::load_text(std::string_view text, std::string_view origin) {
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = std::string(origin) + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw PreconditionError(where + ": expected 'key = value', got '" + std::string(line) + "'");
    const auto key = trim(line.substr(0, eq));
    if (!seen.insert(std::string(key)).second)
      throw PreconditionError(where + ": duplicate key '" + std::string(key) + "'");
    set(key, line.substr(eq + 1), where);
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  load_text(buf.str(), path.string());
}

const std::string& RunConfig::text(std::string_view key) const {
  return values_.at(info(key).key);
}

double RunConfig::real(std::string_view key) const {
  return parse_number(text(key), std::string(key));
}

long RunConfig::integer(std::string_view key) const {
  return parse_long(text(key), std::string(key));
}

std::uint64_t RunConfig::seed(std::string_view key) const {
  const long v = integer(key);
  if (v < 0) throw PreconditionError(std::string(key) + ": seed must be >= 0");
  return static_cast<std::uint64_t>(v);
}

bool RunConfig::flag(std::string_view key) const { return parse_bool(text(key), std::string(key)); }

std::vector<double> RunConfig::reals(std::string_view key) const {
  std::vector<double> out;
  for (auto t : split_commas(text(key))) out.push_back(parse_number(t, std::string(key)));
  return out;
}

std::vector<long> RunConfig::integers(std::string_view key) const {
  std::vector<long> out;
  for (auto t : split_commas(text(key))) out.push_back(parse_long(t, std::string(key)));
  return out;
}

std::vector<std::string> RunConfig::echo() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k + "=" + v);
  return out;
}

}  // namespace ostrovsky::cli
