#include "ostrovsky/bourgain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fft.hpp"
#include "ostrovsky/errors.hpp"
#include "ostrovsky/rng.hpp"

namespace ostrovsky {

double lattice_dispersion(long n) {
  if (n == 0) throw PreconditionError("m(n) is undefined at n = 0");
  const double x = static_cast<double>(n);
  return x * x * x - 1.0 / x;
}

// LatticeSpec -----------------------------------------------------------------

LatticeSpec LatticeSpec::make(int n_max, double d_tau, double tau_max) {
  LatticeSpec s{n_max, tau_max, d_tau};
  if (s.tau_max == 0.0 && n_max >= 1) s.tau_max = 8.0 * std::abs(lattice_dispersion(n_max)) + 8.0;
  s.validate();
  return s;
}

void LatticeSpec::validate() const {
  if (n_max < 1) throw PreconditionError("lattice n_max must be >= 1");
  if (!(d_tau > 0.0) || !std::isfinite(d_tau)) throw PreconditionError("d_tau must be positive");
  if (!(tau_max > 0.0) || !std::isfinite(tau_max))
    throw PreconditionError("tau_max must be positive");
}

long LatticeSpec::tau_index_limit() const { return static_cast<long>(std::floor(tau_max / d_tau)); }

bool LatticeSpec::curves_inside() const {
  return tau_max >= 8.0 * std::abs(lattice_dispersion(n_max));
}

// LatticeField ----------------------------------------------------------------

const std::vector<Segment> LatticeField::kEmpty;

LatticeField::LatticeField(LatticeSpec spec) : spec_(spec), rows_(2 * spec.n_max + 1) {
  spec_.validate();
}

const std::vector<Segment>& LatticeField::row(int n) const {
  if (n == 0 || std::abs(n) > spec_.n_max) return kEmpty;
  return rows_[n + spec_.n_max];
}

namespace {

// Sorts and merges overlapping or touching runs, summing shared indices in
// the order the runs were given.
std::vector<Segment> merge_runs(std::vector<Segment> runs) {
  std::stable_sort(runs.begin(), runs.end(),
                   [](const Segment& a, const Segment& b) { return a.offset < b.offset; });
  std::vector<Segment> out;
  for (auto& r : runs) {
    if (r.values.empty()) continue;
    if (!out.empty()) {
      Segment& cur = out.back();
      const long end = cur.offset + static_cast<long>(cur.values.size());
      if (r.offset <= end) {
        const long r_end = r.offset + static_cast<long>(r.values.size());
        if (r_end > end) cur.values.resize(static_cast<std::size_t>(r_end - cur.offset));
        for (std::size_t i = 0; i < r.values.size(); ++i)
          cur.values[static_cast<std::size_t>(r.offset - cur.offset) + i] += r.values[i];
        continue;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

void LatticeField::add(int n, long offset, std::vector<Complex> values) {
  if (n == 0 || std::abs(n) > spec_.n_max)
    throw PreconditionError("row n outside the lattice (n = 0 is excluded)");
  const long limit = spec_.tau_index_limit();
  long lo = offset, hi = offset + static_cast<long>(values.size());  // [lo, hi)
  const long clip_lo = std::max(lo, -limit), clip_hi = std::min(hi, limit + 1);
  if (clip_lo >= clip_hi) return;
  std::vector<Complex> kept(values.begin() + (clip_lo - lo), values.begin() + (clip_hi - lo));
  auto& runs = rows_[n + spec_.n_max];
  runs.push_back({clip_lo, std::move(kept)});
  runs = merge_runs(std::move(runs));
}

Complex LatticeField::at(int n, long j) const {
  for (const auto& seg : row(n)) {
    if (j >= seg.offset && j < seg.offset + static_cast<long>(seg.values.size()))
      return seg.values[static_cast<std::size_t>(j - seg.offset)];
  }
  return {};
}

bool LatticeField::empty() const {
  for (const auto& r : rows_)
    for (const auto& seg : r)
      for (Complex v : seg.values)
        if (v != Complex{}) return false;
  return true;
}

void LatticeField::scale(Complex c) {
  for (auto& r : rows_)
    for (auto& seg : r)
      for (Complex& v : seg.values) v *= c;
}

// Norms -----------------------------------------------------------------------

double xsb_norm(const LatticeField& f, double s, double b) {
  const double d = f.spec().d_tau;
  double sum = 0.0;
  for (int n = -f.n_max(); n <= f.n_max(); ++n) {
    if (n == 0) continue;
    const double mn = lattice_dispersion(n);
    const double wn = std::pow(japanese(n), 2.0 * s);
    double row = 0.0;
    for (const auto& seg : f.row(n))
      for (std::size_t i = 0; i < seg.values.size(); ++i) {
        const double tau = static_cast<double>(seg.offset + static_cast<long>(i)) * d;
        row += std::pow(japanese(tau + mn), 2.0 * b) * std::norm(seg.values[i]);
      }
    sum += wn * row;
  }
  return std::sqrt(sum * d);
}

double ys_norm(const LatticeField& f, double s) {
  const double d = f.spec().d_tau;
  double l1 = 0.0;
  for (int n = -f.n_max(); n <= f.n_max(); ++n) {
    if (n == 0) continue;
    double row = 0.0;
    for (const auto& seg : f.row(n))
      for (Complex v : seg.values) row += std::abs(v);
    row *= d;
    l1 += std::pow(japanese(n), 2.0 * s) * row * row;
  }
  return xsb_norm(f, s, 0.5) + std::sqrt(l1);
}

// Convolution -----------------------------------------------------------------

namespace {

std::vector<Complex> convolve_direct(const std::vector<Complex>& a,
                                     const std::vector<Complex>& b) {
  std::vector<Complex> out(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

std::vector<Complex> convolve_fft(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  const std::size_t len = a.size() + b.size() - 1;
  std::size_t size = 1;
  while (size < len) size <<= 1;
  const auto& fft = detail::complex_fft(static_cast<int>(size));
  std::vector<Complex> fa(size), fb(size);
  std::copy(a.begin(), a.end(), fa.begin());
  std::copy(b.begin(), b.end(), fb.begin());
  fft.forward(fa);
  fft.forward(fb);
  for (std::size_t i = 0; i < size; ++i) fa[i] *= fb[i];
  fft.backward(fa);
  const double inv = 1.0 / static_cast<double>(size);
  std::vector<Complex> out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = fa[i] * inv;
  return out;
}

}  // namespace

LatticeField convolve(const LatticeField& f, const LatticeField& g, Execution exec,
                      std::size_t fft_threshold) {
  if (!(f.spec().d_tau == g.spec().d_tau))
    throw PreconditionError("convolution needs a common d_tau");
  const int nf = f.n_max(), ng = g.n_max();
  LatticeSpec out_spec = f.spec();
  out_spec.n_max = nf + ng;
  out_spec.tau_max = f.spec().tau_max + g.spec().tau_max;
  LatticeField out(out_spec);
  const double d = f.spec().d_tau;

  std::vector<std::vector<Segment>> rows(2 * out_spec.n_max + 1);
  auto build_row = [&](int n) {
    std::vector<Segment> pieces;
    for (int n1 = -nf; n1 <= nf; ++n1) {
      const int n2 = n - n1;
      if (n1 == 0 || n2 == 0 || std::abs(n2) > ng) continue;
      for (const auto& a : f.row(n1))
        for (const auto& b : g.row(n2)) {
          const bool fft = std::min(a.values.size(), b.values.size()) >= fft_threshold;
          auto v = fft ? convolve_fft(a.values, b.values) : convolve_direct(a.values, b.values);
          for (Complex& x : v) x *= d;
          pieces.push_back({a.offset + b.offset, std::move(v)});
        }
    }
    rows[n + out_spec.n_max] = merge_runs(std::move(pieces));
  };
  const int top = out_spec.n_max;
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (int n = -top; n <= top; ++n)
      if (n != 0) build_row(n);
  } else {
    for (int n = -top; n <= top; ++n)
      if (n != 0) build_row(n);
  }
  for (int n = -top; n <= top; ++n)
    for (auto& seg : rows[n + top]) out.add(n, seg.offset, std::move(seg.values));
  return out;
}

namespace {

struct BilinearParts {
  double xsb_lhs = 0.0;  // ||n h||_{X^{s,-1/2}}
  double y_lhs = 0.0;    // l^2_n L^1_tau part of the Y norm
};

BilinearParts bilinear_parts(const LatticeField& h, double s) {
  const double d = h.spec().d_tau;
  BilinearParts p;
  double xsb = 0.0, y = 0.0;
  for (int n = -h.n_max(); n <= h.n_max(); ++n) {
    if (n == 0) continue;
    const double mn = lattice_dispersion(n);
    double row_x = 0.0, row_y = 0.0;
    for (const auto& seg : h.row(n))
      for (std::size_t i = 0; i < seg.values.size(); ++i) {
        const double tau = static_cast<double>(seg.offset + static_cast<long>(i)) * d;
        const double mod = japanese(tau + mn);
        const double a = std::abs(static_cast<double>(n) * seg.values[i]);
        row_x += a * a / mod;
        row_y += a / mod;
      }
    xsb += std::pow(japanese(n), 2.0 * s) * row_x;
    row_y *= d;
    y += std::pow(std::abs(static_cast<double>(n)), 2.0 * s) * row_y * row_y;
  }
  p.xsb_lhs = std::sqrt(xsb * d);
  p.y_lhs = std::sqrt(y);
  return p;
}

double denominator(const LatticeField& f, const LatticeField& g, double s) {
  const double den = xsb_norm(f, s, 0.5) * xsb_norm(g, s, 0.5);
  if (!(den > 0.0)) throw PreconditionError("bilinear ratio needs nonzero f and g");
  return den;
}

}  // namespace

double bilinear_ratio(const LatticeField& f, const LatticeField& g, double s, Execution exec) {
  const double den = denominator(f, g, s);
  return bilinear_parts(convolve(f, g, exec), s).xsb_lhs / den;
}

double y_bilinear_ratio(const LatticeField& f, const LatticeField& g, double s, Execution exec) {
  const double den = denominator(f, g, s);
  return bilinear_parts(convolve(f, g, exec), s).y_lhs / den;
}

LatticeField curve_box(const LatticeSpec& spec, int n, double width) {
  if (!(width > 0.0)) throw PreconditionError("box width must be positive");
  LatticeField f(spec);
  const double centre = -lattice_dispersion(n);
  const long lo = static_cast<long>(std::ceil((centre - width / 2) / spec.d_tau));
  const long hi = static_cast<long>(std::floor((centre + width / 2) / spec.d_tau));
  if (hi < lo) throw PreconditionError("box narrower than one tau cell");
  f.add(n, lo, std::vector<Complex>(static_cast<std::size_t>(hi - lo + 1), Complex(1.0)));
  return f;
}

LatticeField random_field(const LatticeSpec& spec, double s, std::uint64_t seed,
                          std::uint64_t index, double width) {
  Engine rng = make_stream(seed, index);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> shift(-width, width);
  LatticeField f(spec);
  for (int n = -spec.n_max; n <= spec.n_max; ++n) {
    if (n == 0) continue;
    const double centre = -lattice_dispersion(n) + shift(rng);
    const long lo = static_cast<long>(std::ceil((centre - width / 2) / spec.d_tau));
    const long hi = static_cast<long>(std::floor((centre + width / 2) / spec.d_tau));
    std::vector<Complex> v(static_cast<std::size_t>(std::max(0L, hi - lo + 1)));
    for (Complex& x : v) {
      const double re = normal(rng);
      x = Complex(re, normal(rng));
    }
    f.add(n, lo, std::move(v));
  }
  const double norm = xsb_norm(f, s, 0.5);
  if (norm > 0.0) f.scale(1.0 / norm);
  return f;
}

// Sweep -----------------------------------------------------------------------

std::vector<SweepCell> bilinear_sweep(const std::vector<double>& s_list,
                                      const std::vector<int>& n_max_list, int trials,
                                      std::uint64_t seed, double d_tau, Execution exec) {
  if (s_list.empty() || n_max_list.empty()) throw PreconditionError("empty s or n_max list");
  if (trials < 0) throw PreconditionError("trials must be >= 0");
  int top = 0;
  for (int n : n_max_list) {
    if (n < 2) throw PreconditionError("bilinear sweep needs n_max >= 2");
    top = std::max(top, n);
  }

  // Curve-box candidates do not depend on n_max beyond fitting in it, so one
  // evaluation per (family, N) serves every n_max >= N.
  struct Candidate {
    std::string label;
    int N = 0;
    int n1 = 0, n2 = 0;
    std::vector<double> ratio, y_ratio;  // per s
  };
  std::vector<Candidate> cands;
  for (int N = 2; N <= top; ++N) {
    for (int k = 1; k <= 2; ++k)
      if (N > k) cands.push_back({"hhl", N, N, -(N - k), {}, {}});
    for (int k = 1; k <= 2; ++k) cands.push_back({"hlh", N, N, k, {}, {}});
    cands.push_back({"hhh", N, N, N, {}, {}});
  }
  auto eval = [&](Candidate& c) {
    const LatticeSpec spec = LatticeSpec::make(top, d_tau);
    const LatticeField f = curve_box(spec, c.n1), g = curve_box(spec, c.n2);
    const LatticeField h = convolve(f, g, Execution::kSerial);
    for (double s : s_list) {
      const double den = denominator(f, g, s);
      const auto p = bilinear_parts(h, s);
      c.ratio.push_back(p.xsb_lhs / den);
      c.y_ratio.push_back(p.y_lhs / den);
    }
  };

  struct Trial {
    int n_max = 0;
    int index = 0;
    std::vector<double> ratio, y_ratio;
  };
  std::vector<Trial> rand;
  for (int n_max : n_max_list)
    for (int t = 0; t < trials; ++t) rand.push_back({n_max, t, {}, {}});
  auto eval_trial = [&](Trial& t) {
    const LatticeSpec spec = LatticeSpec::make(t.n_max, d_tau);
    // Streams 2t and 2t+1 of a per-n_max seed; the ratio is scale invariant,
    // so normalizing at s = 0 is harmless.
    const std::uint64_t base = mix64(seed ^ static_cast<std::uint64_t>(t.n_max));
    const LatticeField f = random_field(spec, 0.0, base, 2 * t.index);
    const LatticeField g = random_field(spec, 0.0, base, 2 * t.index + 1);
    const LatticeField h = convolve(f, g, Execution::kSerial);
    for (double s : s_list) {
      const double den = denominator(f, g, s);
      const auto p = bilinear_parts(h, s);
      t.ratio.push_back(p.xsb_lhs / den);
      t.y_ratio.push_back(p.y_lhs / den);
    }
  };

  const long nc = static_cast<long>(cands.size()), nt = static_cast<long>(rand.size());
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < nc; ++i) eval(cands[i]);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < nt; ++i) eval_trial(rand[i]);
  } else {
    for (long i = 0; i < nc; ++i) eval(cands[i]);
    for (long i = 0; i < nt; ++i) eval_trial(rand[i]);
  }

  std::vector<SweepCell> out;
  for (std::size_t si = 0; si < s_list.size(); ++si)
    for (int n_max : n_max_list) {
      SweepCell cell{s_list[si], n_max, 0.0, "", 0.0, 0.0, 0.0};
      for (const auto& c : cands) {
        if (c.N > n_max) continue;
        if (c.ratio[si] > cell.max_adversarial) cell.max_adversarial = c.ratio[si];
        if (c.ratio[si] > cell.max_ratio) {
          cell.max_ratio = c.ratio[si];
          cell.argmax = c.label + "(" + std::to_string(c.n1) + "," + std::to_string(c.n2) + ")";
        }
        cell.max_y_ratio = std::max(cell.max_y_ratio, c.y_ratio[si]);
      }
      for (const auto& t : rand) {
        if (t.n_max != n_max) continue;
        cell.max_random = std::max(cell.max_random, t.ratio[si]);
        if (t.ratio[si] > cell.max_ratio) {
          cell.max_ratio = t.ratio[si];
          cell.argmax = "random(" + std::to_string(t.index) + ")";
        }
        cell.max_y_ratio = std::max(cell.max_y_ratio, t.y_ratio[si]);
      }
      out.push_back(cell);
    }
  return out;
}

// Resonance -------------------------------------------------------------------

namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

__int128 abs128(__int128 a) { return a < 0 ? -a : a; }

}  // namespace

Rational Rational::make(__int128 num, __int128 den) {
  if (den == 0) throw PreconditionError("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const __int128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return {num, den};
}

Rational operator+(const Rational& a, const Rational& b) {
  const __int128 g = gcd128(a.den, b.den);
  return Rational::make(a.num * (b.den / g) + b.num * (a.den / g), a.den / g * b.den);
}

Rational operator-(const Rational& a, const Rational& b) { return a + Rational{-b.num, b.den}; }

double Rational::to_double() const {
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

Rational exact_dispersion(long n) {
  if (n == 0) throw PreconditionError("m(n) is undefined at n = 0");
  const __int128 x = n;
  return Rational::make(x * x * x * x - 1, x);
}

Rational exact_resonance(long n, long n1) {
  const long n2 = n - n1;
  if (n == 0 || n1 == 0 || n2 == 0)
    throw PreconditionError("resonance needs n, n1, n - n1 all nonzero");
  if (std::abs(n) > 1000000 || std::abs(n1) > 1000000)
    throw PreconditionError("exact resonance limited to |n|, |n1| <= 1e6");
  return exact_dispersion(n) - exact_dispersion(n1) - exact_dispersion(n2);
}

double resonance(long n, long n1) {
  const long n2 = n - n1;
  if (n == 0 || n1 == 0 || n2 == 0)
    throw PreconditionError("resonance needs n, n1, n - n1 all nonzero");
  const double a = static_cast<double>(n), b = static_cast<double>(n1),
               c = static_cast<double>(n2);
  return 3.0 * a * b * c + a / (b * c) - 1.0 / a;
}

ResonanceScan resonance_scan(int n_max, int bins, Execution exec) {
  if (n_max < 2) throw PreconditionError("resonance scan needs n_max >= 2");
  if (bins < 1) throw PreconditionError("histogram needs at least one bin");

  struct RowResult {
    ResonanceRecord min;
    double max_ratio = 0.0;
    bool exact_ok = true;
    std::size_t pairs = 0;
    bool any = false;
  };
  const int width = 2 * n_max + 1;
  std::vector<RowResult> rows(width);
  auto scan_row = [&](int n) {
    RowResult& r = rows[n + n_max];
    for (int n1 = -n_max; n1 <= n_max; ++n1) {
      if (n1 == 0 || n1 == n) continue;
      const long n2 = static_cast<long>(n) - n1;
      const double R = resonance(n, n1);
      const double prod = std::abs(static_cast<double>(n) * n1 * static_cast<double>(n2));
      const double ratio = std::abs(R) / prod;
      // |R| >= |n n1 n2| with R = num / (n n1 n2): |num| >= (n n1 n2)^2.
      const __int128 p = static_cast<__int128>(n) * n1 * n2;
      const __int128 num = (static_cast<__int128>(n) * n * n * n - 1) * n1 * n2 -
                           (static_cast<__int128>(n1) * n1 * n1 * n1 - 1) * n * n2 -
                           (static_cast<__int128>(n2) * n2 * n2 * n2 - 1) * n * n1;
      if (std::abs(n) >= 2 && abs128(num) < p * p) r.exact_ok = false;
      if (!r.any || ratio < r.min.ratio) r.min = {n, n1, R, ratio};
      r.max_ratio = std::max(r.max_ratio, ratio);
      r.any = true;
      ++r.pairs;
    }
  };
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (int n = -n_max; n <= n_max; ++n)
      if (n != 0) scan_row(n);
  } else {
    for (int n = -n_max; n <= n_max; ++n)
      if (n != 0) scan_row(n);
  }

  ResonanceScan out;
  out.n_max = n_max;
  out.min_exact_at_least_one = true;
  bool have = false, have_one = false;
  double hi = 0.0;
  for (int n = -n_max; n <= n_max; ++n) {
    if (n == 0) continue;
    const RowResult& r = rows[n + n_max];
    if (std::abs(n) == 1) {
      if (!have_one || r.min.ratio < out.min_n_equals_one.ratio) out.min_n_equals_one = r.min;
      have_one = true;
      continue;
    }
    out.pairs += r.pairs;
    out.min_exact_at_least_one = out.min_exact_at_least_one && r.exact_ok;
    if (!have || r.min.ratio < out.min.ratio) out.min = r.min;
    hi = std::max(hi, r.max_ratio);
    have = true;
  }

  // Histogram of the admissible ratios on [min, max].
  const double lo = out.min.ratio;
  out.bin_edges.resize(bins + 1);
  for (int b = 0; b <= bins; ++b) out.bin_edges[b] = lo + (hi - lo) * b / bins;
  out.histogram.assign(bins, 0);
  for (int n = -n_max; n <= n_max; ++n) {
    if (std::abs(n) < 2) continue;
    for (int n1 = -n_max; n1 <= n_max; ++n1) {
      if (n1 == 0 || n1 == n) continue;
      const double prod =
          std::abs(static_cast<double>(n) * n1 * static_cast<double>(static_cast<long>(n) - n1));
      const double ratio = std::abs(resonance(n, n1)) / prod;
      int b = hi > lo ? static_cast<int>((ratio - lo) / (hi - lo) * bins) : 0;
      out.histogram[std::clamp(b, 0, bins - 1)]++;
    }
  }
  return out;
}

// Kernel lemmas ---------------------------------------------------------------

namespace {

// Integral of k over the real line, split where k has kinks.
template <class F>
std::pair<double, double> line_integral(F k, double a, double b) {
  using boost::math::quadrature::exp_sinh;
  using boost::math::quadrature::tanh_sinh;
  const double lo = std::min(a, b), hi = std::max(a, b);
  double err = 0.0, e = 0.0, total = 0.0;
  exp_sinh<double> tail;
  total += tail.integrate([&](double x) { return k(hi + x); }, 0.0,
                          std::numeric_limits<double>::infinity(), 1e-12, &e);
  err += e;
  total += tail.integrate([&](double x) { return k(lo - x); }, 0.0,
                          std::numeric_limits<double>::infinity(), 1e-12, &e);
  err += e;
  if (hi > lo) {
    tanh_sinh<double> mid;
    // Halves, so both peaks sit at interval ends where tanh-sinh clusters.
    const double c = 0.5 * (lo + hi);
    total += mid.integrate(k, lo, c, 1e-12, &e);
    err += e;
    total += mid.integrate(k, c, hi, 1e-12, &e);
    err += e;
  }
  return {total, err};
}

}  // namespace

std::vector<KernelIntegralRow> kernel_integral_scan(const std::vector<double>& alpha_list,
                                                    const std::vector<double>& rho_list,
                                                    const std::vector<double>& eps_list) {
  for (double r : rho_list)
    if (!(r > 0.0 && r < 1.0)) throw PreconditionError("rho must lie in (0, 1)");
  for (double e : eps_list)
    if (!(e > 0.0)) throw PreconditionError("epsilon must be positive");
  std::vector<KernelIntegralRow> out;
  auto push = [&](int form, double alpha, double param, auto kernel, double bound) {
    const auto [val, err] = line_integral(kernel, 0.0, alpha);
    if (!std::isfinite(val)) throw NumericalError("kernel quadrature did not converge");
    out.push_back({form, alpha, param, val, bound, val / bound, err});
  };
  for (double a : alpha_list) {
    if (!std::isfinite(a)) throw PreconditionError("alpha must be finite");
    const double aa = std::abs(a);
    push(1, a, 0.0,
         [a](double b) { return 1.0 / ((1.0 + std::abs(b)) * (1.0 + std::abs(a - b))); },
         std::log(2.0 + aa) / (1.0 + aa));
    for (double rho : rho_list)
      push(2, a, rho,
           [a, rho](double b) {
             return 1.0 / (std::pow(1.0 + std::abs(b), rho) * (1.0 + std::abs(a - b)));
           },
           (1.0 + std::log1p(aa)) / std::pow(1.0 + aa, rho));
    for (double eps : eps_list)
      push(3, a, eps,
           [a, eps](double b) {
             return 1.0 / std::pow((1.0 + std::abs(b)) * (1.0 + std::abs(a - b)), 1.0 + eps);
           },
           1.0 / std::pow(1.0 + aa, 1.0 + eps));
  }
  return out;
}

std::vector<KernelSumRow> kernel_sum_scan(const std::vector<double>& tau_list,
                                          const std::vector<long>& n_list,
                                          const std::vector<double>& rho_list, long cutoff,
                                          Execution exec) {
  for (double r : rho_list)
    if (!(r > 2.0 / 3.0)) throw PreconditionError("kernel sums need rho > 2/3");
  for (long n : n_list)
    if (n == 0) throw PreconditionError("kernel sums need n != 0");
  if (cutoff < 1) throw PreconditionError("kernel sum cutoff must be >= 1");

  std::vector<KernelSumRow> rows;
  for (double tau : tau_list)
    for (long n : n_list) {
      rows.push_back({1, tau, n, 0.0, 0.0, 0.0});
      rows.push_back({2, tau, n, 0.0, 0.0, 0.0});
      for (double rho : rho_list) rows.push_back({3, tau, n, rho, 0.0, 0.0});
    }

  auto lg = [](double y) { return std::isinf(y) ? 0.0 : std::log(2.0 + y) / (1.0 + y); };
  auto evaluate = [&](KernelSumRow& r) {
    auto term = [&](long k) {
      if (r.form == 1) {  // sum over n1 = k at fixed n
        if (k == r.n) return 0.0;
        return lg(std::abs(r.tau + lattice_dispersion(k) + lattice_dispersion(r.n - k)));
      }
      if (k == r.n) return 0.0;  // sum over n = k at fixed n1 = r.n; n - n1 != 0
      const double y =
          std::abs(r.tau + lattice_dispersion(r.n) - lattice_dispersion(k - r.n));
      return r.form == 2 ? lg(y) : std::log1p(y) / std::pow(1.0 + y, r.rho);
    };
    double sum = 0.0, comp = 0.0;
    for (long k = -cutoff; k <= cutoff; ++k) {
      if (k == 0) continue;
      const double t = term(k), s2 = sum + t;
      comp += std::abs(sum) >= std::abs(t) ? (sum - s2) + t : (t - s2) + sum;
      sum = s2;
    }
    r.sum = sum + comp;

    // Tail: every |k| > cutoff term is bounded by a decreasing function of a
    // lower bound on its modulation, so 2 * integral from cutoff bounds it.
    const double K = static_cast<double>(cutoff), an = std::abs(static_cast<double>(r.n));
    std::function<double(double)> lower;
    if (r.form == 1)  // |x| >= 3|n| t (t - |n|) - |n|^3 - |tau| - 1
      lower = [=, tau = r.tau](double t) {
        return 3.0 * an * t * (t - an) - an * an * an - std::abs(tau) - 1.0;
      };
    else  // |y| >= (t - |n1|)^3 - 1 - |tau| - |m(n1)|
      lower = [=, tau = r.tau, m1 = std::abs(lattice_dispersion(r.n))](double t) {
        const double d = t - an;
        return d * d * d - 1.0 - std::abs(tau) - m1;
      };
    // lg is decreasing on [0, inf); log1p(y)/(1+y)^rho only past e^{1/rho}.
    const double floor_y = r.form == 3 ? std::exp(1.0 / r.rho) : 0.0;
    if (!(lower(K) > floor_y)) {
      r.tail_bound = std::numeric_limits<double>::infinity();
      return;
    }
    auto f = [&](double y) {
      if (std::isinf(y)) return 0.0;
      return r.form == 3 ? std::log1p(y) / std::pow(1.0 + y, r.rho) : lg(y);
    };
    boost::math::quadrature::exp_sinh<double> tail;
    r.tail_bound = 2.0 * tail.integrate([&](double x) { return f(lower(K + x)); }, 0.0,
                                        std::numeric_limits<double>::infinity());
  };
  const long n = static_cast<long>(rows.size());
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) evaluate(rows[i]);
  } else {
    for (long i = 0; i < n; ++i) evaluate(rows[i]);
  }
  return rows;
}

// F_s bounds ------------------------------------------------------------------

double sigma_modulation(long n, long n1, double tau, double tau1) {
  return std::max({std::abs(tau + lattice_dispersion(n)), std::abs(tau1 + lattice_dispersion(n1)),
                   std::abs(tau - tau1 + lattice_dispersion(n - n1))});
}

double f_s(long n, long n1, double tau, double tau1, double s) {
  const double an = std::abs(static_cast<double>(n));
  const double p = std::abs(static_cast<double>(n1) * static_cast<double>(n - n1));
  return std::pow(an, 2.0 * s + 2.0) * std::pow(p, -2.0 * s) / sigma_modulation(n, n1, tau, tau1);
}

double f_sr(long n, long n1, double tau, double tau1, double s, double r) {
  const double an = std::abs(static_cast<double>(n));
  const double p = std::abs(static_cast<double>(n1) * static_cast<double>(n - n1));
  return std::pow(an, 2.0 * s + 2.0) * std::pow(p, -2.0 * s) /
         std::pow(sigma_modulation(n, n1, tau, tau1), 2.0 * (1.0 - r));
}

FsScan fs_bound_scan(double s, double r, int n_max, int tau_samples, std::uint64_t seed,
                     Execution exec) {
  if (n_max < 2) throw PreconditionError("F_s scan needs n_max >= 2");
  if (tau_samples < 0) throw PreconditionError("tau_samples must be >= 0");
  FsScan out;
  out.s = s;
  out.r = r;
  out.n_max = n_max;
  out.in_hypothesis = s >= -0.5 && r > 0.0 && r < 0.25;

  struct RowMax {
    double fs = 0.0, fsr = 0.0, sig = std::numeric_limits<double>::infinity();
    std::size_t points = 0;
  };
  std::vector<RowMax> rows(2 * n_max + 1);
  auto scan_row = [&](int n) {
    RowMax& m = rows[n + n_max];
    for (int n1 = -n_max; n1 <= n_max; ++n1) {
      const long n2 = static_cast<long>(n) - n1;
      if (n1 == 0 || n2 == 0 || std::abs(n2) > n_max) continue;
      const double R = resonance(n, n1);
      Engine rng = make_stream(seed, static_cast<std::uint64_t>((n + n_max) * (2 * n_max + 1) +
                                                                (n1 + n_max)));
      std::uniform_real_distribution<double> jitter(-1.0, 1.0);
      // sigma is smallest when all three modulations equal |R| / 3.
      const double t0 = -lattice_dispersion(n) + R / 3.0;
      const double t1 = -lattice_dispersion(n1) - R / 3.0;
      for (int k = 0; k <= tau_samples; ++k) {
        double tau = t0, tau1 = t1;
        if (k > 0) {
          tau += jitter(rng) * std::abs(R);
          tau1 += jitter(rng) * std::abs(R);
        }
        const double sig = sigma_modulation(n, n1, tau, tau1);
        m.sig = std::min(m.sig, sig / std::abs(R));
        m.fs = std::max(m.fs, f_s(n, n1, tau, tau1, s));
        m.fsr = std::max(m.fsr, std::pow(std::abs(static_cast<double>(n)), 2.0 - 4.0 * r) *
                                    f_sr(n, n1, tau, tau1, s, r));
        ++m.points;
      }
    }
  };
  if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (int n = -n_max; n <= n_max; ++n)
      if (std::abs(n) >= 2) scan_row(n);
  } else {
    for (int n = -n_max; n <= n_max; ++n)
      if (std::abs(n) >= 2) scan_row(n);
  }
  out.min_sigma_over_r = std::numeric_limits<double>::infinity();
  for (const auto& m : rows) {
    out.max_fs = std::max(out.max_fs, m.fs);
    out.max_fsr_scaled = std::max(out.max_fsr_scaled, m.fsr);
    out.min_sigma_over_r = std::min(out.min_sigma_over_r, m.sig);
    out.points += m.points;
  }
  return out;
}

// Time localization -----------------------------------------------------------

namespace {

// |eta_hat(x)|^2 at x_k = k dx, k >= 0, for the bump on [-1, 1]. The
// trapezoid rule is spectrally accurate here because eta vanishes to all
// orders at +-1; one zero-padded FFT gives the whole grid.
struct BumpSpectrum {
  double dx = 0.0;
  std::vector<double> power;
};

const BumpSpectrum& bump_spectrum() {
  static const BumpSpectrum spec = [] {
    constexpr int kPerUnit = 4096;     // t step 1/4096, resolves |x| < 1.2e4
    constexpr int kSize = 1 << 20;     // period 256 in t, dx = 2 pi / 256
    const double h = 1.0 / kPerUnit;
    std::vector<Complex> a(kSize);
    for (int i = -kPerUnit + 1; i < kPerUnit; ++i) {
      const double t = i * h;
      const double v = std::exp(-1.0 / (1.0 - t * t)) * h;
      a[i >= 0 ? i : kSize + i] = v;
    }
    detail::complex_fft(kSize).forward(a);
    BumpSpectrum s;
    s.dx = 2.0 * std::numbers::pi / (kSize * h);
    s.power.resize(kSize / 2);
    for (int k = 0; k < kSize / 2; ++k) s.power[k] = std::norm(a[k]);
    return s;
  }();
  return spec;
}

// int <x / T>^{2b} |eta_hat(x)|^2 dx over the line (even integrand).
double weighted_bump(double T, double b) {
  const auto& s = bump_spectrum();
  double sum = 0.5 * s.power[0];
  for (std::size_t k = 1; k < s.power.size(); ++k) {
    const double x = static_cast<double>(k) * s.dx;
    sum += std::pow(japanese(x / T), 2.0 * b) * s.power[k];
  }
  return 2.0 * sum * s.dx;
}

}  // namespace

LocalizationScan time_localization_scan(const FourierField& phi, double s,
                                        const std::vector<double>& b_list,
                                        const std::vector<double>& T_list) {
  for (double b : b_list)
    if (!(b > 0.0 && b <= 0.5)) throw PreconditionError("b must lie in (0, 1/2]");
  for (double T : T_list)
    if (!(T > 0.0)) throw PreconditionError("T must be positive");
  if (T_list.empty() || b_list.empty()) throw PreconditionError("empty b or T list");

  // ||u||^2_{X^{s,b}} = sum_n <xi_n>^{2s} |phi_n|^2 int <tau + m>^{2b} T^2 |eta_hat(T(tau + m))|^2
  // and the tau integral is (1/T)-scaled weighted_bump after x = T (tau + m).
  double spatial = 0.0;
  for (int k = 1; k <= phi.modes(); ++k)
    spatial += 2.0 * std::pow(japanese(phi.grid().wavenumber(k)), 2.0 * s) *
               std::norm(phi.coefficients()[k - 1]);
  if (!(spatial > 0.0)) throw PreconditionError("time localization needs a nonzero phi");

  LocalizationScan out;
  for (double b : b_list) {
    std::vector<double> lx, ly;
    for (double T : T_list) {
      const double num = spatial * T * weighted_bump(T, b);
      const double den = spatial * T * weighted_bump(T, 0.5);
      const double ratio = std::sqrt(num / den);
      out.rows.push_back({T, b, ratio});
      lx.push_back(std::log(T));
      ly.push_back(std::log(ratio));
    }
    double slope = 0.0;
    if (lx.size() >= 2) {
      double mx = 0.0, my = 0.0;
      for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
      }
      mx /= static_cast<double>(lx.size());
      my /= static_cast<double>(lx.size());
      double sxx = 0.0, sxy = 0.0;
      for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
      }
      slope = sxx > 0.0 ? sxy / sxx : 0.0;
    }
    out.slopes.push_back(slope);
  }
  return out;
}

}  // namespace ostrovsky
