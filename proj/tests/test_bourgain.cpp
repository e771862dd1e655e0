#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "ostrovsky/bourgain.hpp"
#include "ostrovsky/errors.hpp"

using namespace ostrovsky;

namespace {

LatticeField delta(const LatticeSpec& spec, int n, long j, Complex v = 1.0) {
  LatticeField f(spec);
  f.add(n, j, {v});
  return f;
}

double max_abs_diff(const LatticeField& a, const LatticeField& b) {
  double d = 0.0;
  for (int n = -a.n_max(); n <= a.n_max(); ++n) {
    for (const auto& seg : a.row(n))
      for (std::size_t i = 0; i < seg.values.size(); ++i)
        d = std::max(d, std::abs(seg.values[i] - b.at(n, seg.offset + long(i))));
    for (const auto& seg : b.row(n))
      for (std::size_t i = 0; i < seg.values.size(); ++i)
        d = std::max(d, std::abs(seg.values[i] - a.at(n, seg.offset + long(i))));
  }
  return d;
}

bool identical(const LatticeField& a, const LatticeField& b) {
  for (int n = -a.n_max(); n <= a.n_max(); ++n) {
    const auto& ra = a.row(n);
    const auto& rb = b.row(n);
    if (ra.size() != rb.size()) return false;
    for (std::size_t i = 0; i < ra.size(); ++i)
      if (ra[i].offset != rb[i].offset || ra[i].values != rb[i].values) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("dispersion and resonance function") {
  CHECK(lattice_dispersion(1) == 0.0);
  CHECK(lattice_dispersion(2) == 7.5);
  CHECK(lattice_dispersion(-3) == -lattice_dispersion(3));
  CHECK_THROWS_AS(lattice_dispersion(0), PreconditionError);

  CHECK(resonance(2, 1) == 7.5);
  CHECK(resonance(3, 1) == doctest::Approx(19.0 + 1.0 / 6.0).epsilon(1e-15));
  CHECK(exact_resonance(3, 1) == Rational::make(115, 6));
  CHECK(exact_resonance(-3, -1) == Rational::make(-115, 6));

  // R = m(n) - m(n1) - m(n2) = 3 n n1 n2 + n / (n1 n2) - 1 / n, checked exactly.
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<long> pick(-500000, 500000);
  int checked = 0;
  while (checked < 10000) {
    const long n = pick(rng), n1 = pick(rng), n2 = n - n1;
    if (n == 0 || n1 == 0 || n2 == 0) continue;
    const __int128 p = static_cast<__int128>(n1) * n2;
    const Rational expect = Rational::make(3 * static_cast<__int128>(n) * p, 1) +
                            Rational::make(n, p) - Rational::make(1, n);
    CHECK(exact_resonance(n, n1) == expect);
    CHECK(exact_resonance(n, n1) == exact_resonance(n, n2));
    CHECK(resonance(n, n1) == doctest::Approx(expect.to_double()).epsilon(1e-12));
    ++checked;
  }
}

TEST_CASE("resonance scan") {
  const auto scan = resonance_scan(8, 5);
  CHECK(scan.min.ratio >= 1.0);
  CHECK(scan.min_exact_at_least_one);
  CHECK(scan.pairs == 14u * 15u);  // |n| = 1 is reported separately
  std::size_t total = 0;
  for (auto h : scan.histogram) total += h;
  CHECK(total > 0);
  CHECK(scan.bin_edges.size() == 6);

  const auto a = resonance_scan(40, 7, Execution::kSerial);
  const auto b = resonance_scan(40, 7, Execution::kParallel);
  CHECK(a.min.ratio == b.min.ratio);
  CHECK(a.min.n == b.min.n);
  CHECK(a.histogram == b.histogram);
  CHECK(a.min_n_equals_one.ratio == b.min_n_equals_one.ratio);
  CHECK_THROWS_AS(resonance_scan(1), PreconditionError);
}

TEST_CASE("X^{s,b} norms") {
  const auto spec = LatticeSpec::make(4, 0.25);
  CHECK(spec.tau_max == 8 * std::abs(lattice_dispersion(4)) + 8);
  CHECK(spec.curves_inside());
  for (double s : {0.0, -0.5, 0.7}) {
    // (1, tau = 0) lies on the curve: <1>^s <0>^b sqrt(d_tau).
    CHECK(xsb_norm(delta(spec, 1, 0), s, 0.5) ==
          doctest::Approx(std::pow(2.0, s / 2) * 0.5).epsilon(1e-14));
  }
  // Off the curve the modulation weight shows: n = 2, tau = 0 has <7.5>^b.
  CHECK(xsb_norm(delta(spec, 2, 0), 0.0, 0.5) ==
        doctest::Approx(std::pow(57.25, 0.25) * 0.5).epsilon(1e-14));

  CHECK(xsb_norm(LatticeField(spec), 0.0, 0.5) == 0.0);
  CHECK(ys_norm(LatticeField(spec), 0.0) == 0.0);

  const auto f = random_field(spec, -0.3, 1, 0);
  const auto g = random_field(spec, -0.3, 1, 1);
  CHECK(xsb_norm(f, -0.3, 0.5) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(ys_norm(f, -0.3) >= xsb_norm(f, -0.3, 0.5));
  auto h = f;
  h.scale(Complex(0.0, -3.0));
  CHECK(xsb_norm(h, 0.2, 0.4) == doctest::Approx(3.0 * xsb_norm(f, 0.2, 0.4)).epsilon(1e-13));
  auto sum = f;
  for (int n = -spec.n_max; n <= spec.n_max; ++n)
    for (const auto& seg : g.row(n)) sum.add(n, seg.offset, seg.values);
  CHECK(xsb_norm(sum, 0.0, 0.5) <= xsb_norm(f, 0.0, 0.5) + xsb_norm(g, 0.0, 0.5) + 1e-12);
  CHECK(sum.at(1, f.row(1)[0].offset) ==
        f.row(1)[0].values[0] + g.at(1, f.row(1)[0].offset));

  CHECK_THROWS_AS(LatticeSpec::make(0, 0.25), PreconditionError);
  CHECK_THROWS_AS(LatticeSpec::make(4, 0.0), PreconditionError);
}

TEST_CASE("convolution") {
  const auto spec = LatticeSpec::make(4, 0.25);
  const auto h = convolve(delta(spec, 1, 2, 2.0), delta(spec, -3, -5, Complex(0, 1)));
  CHECK(h.n_max() == 8);
  CHECK(h.at(-2, -3) == Complex(0.0, 2.0 * 0.25));
  CHECK(h.at(-2, -2) == Complex(0.0));

  const auto f = random_field(spec, 0.0, 2, 0, 3.0);
  const auto g = random_field(spec, 0.0, 2, 1, 3.0);
  const auto direct = convolve(f, g, Execution::kSerial, 1u << 30);
  const auto fft = convolve(f, g, Execution::kSerial, 0);
  CHECK(max_abs_diff(direct, fft) < 1e-12);
  CHECK(max_abs_diff(direct, convolve(g, f, Execution::kSerial, 1u << 30)) < 1e-14);
  CHECK(identical(convolve(f, g, Execution::kSerial), convolve(f, g, Execution::kParallel)));

  // Brute force over the lattice.
  const auto small = LatticeSpec::make(2, 0.5, 20.0);
  const auto a = random_field(small, 0.0, 4, 0, 2.0);
  const auto b = random_field(small, 0.0, 4, 1, 2.0);
  const auto c = convolve(a, b);
  const long J = small.tau_index_limit();
  for (int n = -4; n <= 4; ++n) {
    if (n == 0) continue;  // the lattice has no zero mode
    for (long j = -2 * J; j <= 2 * J; ++j) {
      Complex acc = 0.0;
      for (int n1 = -2; n1 <= 2; ++n1)
        for (long j1 = -J; j1 <= J; ++j1) acc += a.at(n1, j1) * b.at(n - n1, j - j1) * 0.5;
      CHECK(std::abs(c.at(n, j) - acc) < 1e-13);
    }
  }
}

TEST_CASE("bilinear ratios") {
  const double d = 0.25;
  const auto spec = LatticeSpec::make(4, d);
  const auto one = delta(spec, 1, 0);
  for (double s : {0.0, -0.5, -0.6}) {
    const double expect = 2 * std::pow(5.0, s / 2) * std::pow(2.0, -s) * std::pow(57.25, -0.25) *
                          std::sqrt(d);
    CHECK(bilinear_ratio(one, one, s) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(y_bilinear_ratio(one, one, s) == doctest::Approx(2 * d / std::sqrt(57.25)).epsilon(1e-13));
  }

  const auto f = random_field(spec, -0.5, 5, 0);
  const auto g = random_field(spec, -0.5, 5, 1);
  const double r = bilinear_ratio(f, g, -0.5);
  auto f2 = f;
  f2.scale(Complex(0.0, 7.0));
  auto g2 = g;
  g2.scale(std::polar(0.3, 1.1));
  CHECK(bilinear_ratio(f2, g2, -0.5) == doctest::Approx(r).epsilon(1e-12));
  CHECK(bilinear_ratio(f, g, -0.5, Execution::kSerial) == bilinear_ratio(f, g, -0.5));
}

TEST_CASE("bilinear sweep") {
  const auto a = bilinear_sweep({0.0, -0.6}, {6, 8}, 2, 3, 0.25, Execution::kSerial);
  const auto b = bilinear_sweep({0.0, -0.6}, {6, 8}, 2, 3, 0.25, Execution::kParallel);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].max_ratio == b[i].max_ratio);
    CHECK(a[i].argmax == b[i].argmax);
    CHECK(a[i].max_random == b[i].max_random);
    CHECK(a[i].max_ratio >= a[i].max_adversarial);
    CHECK(a[i].max_ratio >= a[i].max_random);
    CHECK(a[i].max_random > 0.0);
    CHECK(!a[i].argmax.empty());
  }
  CHECK_THROWS_AS(bilinear_sweep({}, {8}, 1, 1), PreconditionError);
}

TEST_CASE("kernel integrals") {
  const auto rows = kernel_integral_scan({0.0, 1.0, -1.0, 10.0, -10.0, 1e4}, {0.5}, {1.0});
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.integral));
    CHECK(r.integral > 0.0);
    CHECK(r.ratio == doctest::Approx(r.integral / r.bound));
    if (r.form != 1) continue;
    // int 1/((1+|b|)(1+|a-b|)) db = (2/a + 2/(2+a)) log(1+a) for a = |alpha|.
    const double a = std::abs(r.alpha);
    const double exact = a == 0.0 ? 2.0 : (2 / a + 2 / (2 + a)) * std::log1p(a);
    CHECK(r.integral == doctest::Approx(exact).epsilon(1e-8));
  }
  // Symmetric under alpha -> -alpha.
  for (const auto& r : rows)
    for (const auto& q : rows)
      if (q.form == r.form && q.param == r.param && q.alpha == -r.alpha)
        CHECK(q.integral == doctest::Approx(r.integral).epsilon(1e-8));
}

TEST_CASE("kernel sums") {
  const auto a = kernel_sum_scan({0.0, -5.0, 1e3}, {1, 3, 10}, {0.9}, 2000, Execution::kSerial);
  const auto b = kernel_sum_scan({0.0, -5.0, 1e3}, {1, 3, 10}, {0.9}, 2000, Execution::kParallel);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].sum > 0.0);
    CHECK(std::isfinite(a[i].sum));
    CHECK(a[i].tail_bound >= 0.0);
    CHECK(std::isfinite(a[i].tail_bound));
    CHECK(a[i].sum == b[i].sum);
  }
  // A larger cutoff moves the sum by no more than the old tail bound.
  const auto c = kernel_sum_scan({0.0}, {3}, {0.9}, 20000);
  const auto d = kernel_sum_scan({0.0}, {3}, {0.9}, 2000);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c[i].sum >= d[i].sum);
    CHECK(c[i].sum - d[i].sum <= d[i].tail_bound);
  }
}

TEST_CASE("F_s") {
  // n = 2, n1 = 1 at tau = tau1 = 0: the modulations are |m(2)|, |m(1)|, |m(1)|.
  CHECK(sigma_modulation(2, 1, 0.0, 0.0) == 7.5);
  CHECK(f_s(2, 1, 0.0, 0.0, 0.0) == doctest::Approx(4.0 / 7.5));
  CHECK(f_s(2, 1, 0.0, 0.0, -0.5) == doctest::Approx(2.0 / 7.5));
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<long> pick(-50, 50);
  std::uniform_real_distribution<double> tau(-1e5, 1e5);
  for (int i = 0; i < 200; ++i) {
    const long n = pick(rng), n1 = pick(rng);
    if (n == 0 || n1 == 0 || n1 == n) continue;
    const double t = tau(rng), t1 = tau(rng), s = -0.4;
    const double num = std::pow(std::abs(double(n)), 2 * s + 2) *
                       std::pow(std::abs(double(n1) * double(n - n1)), -2 * s);
    const double fs = f_s(n, n1, t, t1, s);
    CHECK(f_sr(n, n1, t, t1, s, 0.0) == doctest::Approx(fs * fs / num).epsilon(1e-12));
    CHECK(sigma_modulation(n, n1, t, t1) >= std::abs(resonance(n, n1)) / 3 * (1 - 1e-12));
  }

  const auto a = fs_bound_scan(-0.5, 0.2, 16, 3, 1, Execution::kSerial);
  const auto b = fs_bound_scan(-0.5, 0.2, 16, 3, 1, Execution::kParallel);
  CHECK(a.max_fs == b.max_fs);
  CHECK(a.points == b.points);
  CHECK(a.in_hypothesis);
  CHECK(a.min_sigma_over_r >= 1.0 / 3 - 1e-12);
  CHECK(!fs_bound_scan(-0.6, 0.2, 8, 0).in_hypothesis);
}

TEST_CASE("time localization") {
  const auto grid = GridSpec::make(2 * std::numbers::pi, 8);
  const auto phi = smooth_random_field(grid, 3.0, 1.0, 1);
  const auto scan = time_localization_scan(phi, 0.0, {0.5, 0.25}, {0.5, 0.25, 0.125});
  REQUIRE(scan.rows.size() == 6);
  REQUIRE(scan.slopes.size() == 2);
  for (const auto& r : scan.rows) {
    if (r.b == 0.5) CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-12));
    if (r.b < 0.5) CHECK(r.ratio <= 1.0 + 1e-12);
  }
  CHECK(std::abs(scan.slopes[0]) < 1e-9);
  CHECK(scan.slopes[1] == doctest::Approx(0.25).epsilon(0.02));
  CHECK_THROWS_AS(time_localization_scan(phi, 0.0, {0.6}, {0.5}), PreconditionError);
  CHECK_THROWS_AS(time_localization_scan(FourierField(grid), 0.0, {0.5}, {0.5}), PreconditionError);
}
