#include <cmath>
#include <numbers>

#include "json.hpp"

#include "doctest.h"
#include "ostrovsky/errors.hpp"
#include "ostrovsky/invariance.hpp"

using namespace ostrovsky;
using std::numbers::pi;

namespace {

GibbsSpec spec_m(int m, std::uint64_t seed = 1) {
  GibbsSpec s;
  s.grid = GridSpec::make(2 * pi, m);
  s.seed = seed;
  s.auto_cutoff = true;
  return s;
}

FlowParams flow(double dt = 0.005) {
  FlowParams p;
  p.dt = dt;
  p.integrator = Integrator::kLawsonGauss;
  return p;
}

}  // namespace

TEST_CASE("observables") {
  const auto obs = parse_observables(
      "l2_squared, mode_power(1..3), hs_norm(-0.5), cubic_integral, hamiltonian,"
      "cylinder_indicator(2,-0.5,0.5), ball_indicator(1.5)");
  REQUIRE(obs.size() == 9);
  CHECK(obs[1].name == "mode_power(1)");
  CHECK(obs[3].k == 3);
  CHECK(obs[4].s == -0.5);
  CHECK(obs[7].j == 2);
  CHECK(obs[7].bounded());
  CHECK(!obs[0].bounded());

  const auto g = GridSpec::make(2 * pi, 4);
  const auto c = trigonometric_mode(g, 2, 0.5);
  CHECK(obs[0](c) == doctest::Approx(l2_norm(c) * l2_norm(c)));
  CHECK(obs[2](c) == doctest::Approx(l2_norm(c) * l2_norm(c)));
  CHECK(obs[1](c) == 0.0);
  CHECK(obs[8](c) == (l2_norm(c) <= 1.5 ? 1.0 : 0.0));

  CHECK_THROWS_AS(parse_observables(""), PreconditionError);
  CHECK_THROWS_AS(parse_observables("energy"), PreconditionError);
  CHECK_THROWS_AS(parse_observables("mode_power(3..1)"), PreconditionError);
  CHECK_THROWS_AS(parse_observables("mode_power(1"), PreconditionError);
  CHECK_THROWS_AS(parse_observables("cylinder_indicator(0,0,1)"), PreconditionError);
  CHECK_THROWS_AS(parse_observables("hs_norm(1,2)"), PreconditionError);
  CHECK_THROWS_AS(parse_observables("mode_power(9)")[0](c), PreconditionError);
}

TEST_CASE("t = 0 is an exact null") {
  const auto obs = parse_observables("l2_squared, mode_power(1..4), cubic_integral, hamiltonian");
  const auto rep = run_invariance(spec_m(4), flow(), 0.0, obs, 2000);
  for (const auto& r : rep.results) {
    CHECK(r.z == 0.0);
    CHECK(r.mean_before == r.mean_after);
  }
  CHECK(rep.all_pass());
}

TEST_CASE("L2 norm is conserved sample by sample") {
  const auto obs = parse_observables("l2_squared");
  const auto rep = run_invariance(spec_m(8), flow(), 1.0, obs, 500);
  CHECK(std::abs(rep.results[0].z) < 1e-6);
}

TEST_CASE("invariance at small m") {
  const auto obs = parse_observables("mode_power(1..4), cubic_integral, hamiltonian, ball_indicator(1.5)");
  const auto rep = run_invariance(spec_m(4, 2), flow(), 1.0, obs, 20000);
  for (const auto& r : rep.results) CHECK_MESSAGE(r.pass, r.name << " z=" << r.z);
  CHECK(rep.ess > 1000);
}

TEST_CASE("the positive ladder is not invariant") {
  auto spec = spec_m(4, 2);
  spec.covariance = Covariance::kPositive;
  // Mode powers barely move at m = 4; the cubic moment relaxes visibly.
  const auto obs = parse_observables("mode_power(1..4), cubic_integral");
  const auto rep = run_invariance(spec, flow(), 1.0, obs, 20000);
  double worst = 0.0;
  for (const auto& r : rep.results) worst = std::max(worst, std::abs(r.z));
  CHECK(worst > 3.0);
  CHECK(!rep.all_pass());
}

TEST_CASE("report JSON") {
  const auto obs = parse_observables("l2_squared, cubic_integral");
  const auto rep = run_invariance(spec_m(4), flow(), 0.5, obs, 300);
  const auto a = report_json(rep, {{"invariance.t", "0.5"}});
  CHECK(a == report_json(rep, {{"invariance.t", "0.5"}}));
  const auto j = nlohmann::json::parse(a);
  for (const char* key : {"m", "t", "count", "seed", "ess", "z_max", "sampler", "all_pass",
                          "bonferroni", "version", "config"})
    CHECK_MESSAGE(j["meta"].contains(key), key);
  CHECK(j["meta"]["config"]["invariance.t"] == "0.5");
  REQUIRE(j["results"].size() == 2);
  for (const char* key : {"name", "mean_before", "se_before", "mean_after", "se_after", "z", "pass"})
    CHECK_MESSAGE(j["results"][0].contains(key), key);
  // Same seed, same report.
  CHECK(a == report_json(run_invariance(spec_m(4), flow(), 0.5, obs, 300), {{"invariance.t", "0.5"}}));
}

TEST_CASE("push_forward: serial and parallel agree, blow-ups carry the index") {
  const auto ens = sample_gaussian(spec_m(8, 3), 64);
  const auto a = push_forward(ens, 0.3, flow(), Execution::kSerial);
  const auto b = push_forward(ens, 0.3, flow(), Execution::kParallel);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

  auto bad = ens;
  for (std::size_t i : {5u, 9u}) bad.samples[i].field = smooth_random_field(bad.spec.grid, 3.0, 1e7, 1);
  auto p = flow(1e-2);
  for (auto exec : {Execution::kSerial, Execution::kParallel}) {
    try {
      push_forward(bad, 1.0, p, exec);
      FAIL("expected a blow-up");
    } catch (const EnsembleBlowUpError& e) {
      CHECK(e.index() == 5);
      CHECK(e.time() > 0.0);
    }
  }
}

TEST_CASE("argument checks") {
  const auto obs = parse_observables("l2_squared");
  CHECK_THROWS_AS(run_invariance(spec_m(4), flow(), 1.0, obs, 0), PreconditionError);
  CHECK_THROWS_AS(invariance_sweep(spec_m(4), flow(), {4}, {1.0}, obs, 0), PreconditionError);
  CHECK_THROWS_AS(invariance_sweep(spec_m(4), flow(), {}, {1.0}, obs, 10), PreconditionError);
  const auto ens = sample_gaussian(spec_m(4), 10);
  CHECK_THROWS_AS(compare_ensembles(ens, {}, 1.0, obs), PreconditionError);
}

TEST_CASE("sweep") {
  const auto obs = parse_observables("l2_squared, mode_power(1)");
  const auto res = invariance_sweep(spec_m(4), flow(), {4, 6}, {0.0, 0.5}, obs, 2000);
  CHECK(res.rows.size() == 2 * 2 * 2);
  for (const auto& r : res.rows)
    if (r.t == 0.0) CHECK(r.result.z == 0.0);
  CHECK(res.drift.size() == 2 * 2);
}

TEST_CASE("recurrence") {
  auto spec = spec_m(4, 5);
  const auto p = flow(0.01);
  const auto none = recurrence_probe(spec, p, 4, 2.0, 0.0, 0.5, 4);
  CHECK(none.fraction_returned == 0.0);
  for (const auto& t : none.return_times) CHECK(!t);

  // Every sample is within 1e3 of its start, so the first counted step returns.
  const auto all = recurrence_probe(spec, p, 4, 2.0, 1e3, 0.5, 4);
  CHECK(all.fraction_returned == 1.0);
  for (const auto& t : all.return_times) CHECK(*t == doctest::Approx(0.5));
  CHECK(all.histogram[0] == 4);
  CHECK(all.bin_edges.size() == 5);

  const auto a = recurrence_probe(spec, p, 6, 5.0, 0.3, 0.5, 4, Execution::kSerial);
  const auto b = recurrence_probe(spec, p, 6, 5.0, 0.3, 0.5, 4, Execution::kParallel);
  CHECK(a.return_times == b.return_times);
  CHECK_THROWS_AS(recurrence_probe(spec, p, 4, 1.0, 0.1, 2.0), PreconditionError);
}
