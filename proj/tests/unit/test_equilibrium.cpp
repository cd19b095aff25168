#include <doctest.h>

#include <cmath>

#include "dynpop/builtin_games.hpp"
#include "dynpop/equilibrium.hpp"
#include "dynpop/error.hpp"
#include "dynpop/mdp.hpp"
#include "oracles.hpp"
#include "random_games.hpp"

using namespace dynpop;
using namespace dynpop::testing;

TEST_CASE("dominant strategy with full damping") {
  GameSpec pd = singleton_dominant();
  SolveOptions o;
  o.damping = 1.0;
  EquilibriumReport r = solve(pd, uniform_social_state(pd), o);
  CHECK(r.converged);
  CHECK(r.iterations <= 2);
  CHECK(r.state.pi.table[0](0, 1) == 1.0);
}

TEST_CASE("built-in equilibria") {
  GameSpec hdh = hawk_dove_hunger();
  EquilibriumReport r = solve(hdh, uniform_social_state(hdh));
  REQUIRE(r.converged);
  CHECK(r.residual.max() < 1e-8);
  CHECK(r.state.d.mass[0](0) == doctest::Approx(std::sqrt(3.0) - 1.0).epsilon(1e-6));
  CHECK(r.state.pi.table[0](0, 1) > 1 - 1e-6);  // sated agents play dove
  CHECK(r.state.pi.table[0](1, 0) > 1 - 1e-6);  // hungry agents play hawk
  REQUIRE(r.certificate == std::nullopt);
  Certificate c = certify(hdh, r.state);
  CHECK(c.pass);
  CHECK(c.improvement_steps == 0);
  CHECK(c.value_gap <= 1e-6);

  GameSpec hd = singleton_hawk_dove();
  EquilibriumReport m = solve(hd, uniform_social_state(hd));
  REQUIRE(m.converged);
  CHECK(std::abs(m.state.pi.table[0](0, 0) - 2.0 / 3.0) <= 1e-6);
  CHECK(m.final_damping < 0.2);
}

TEST_CASE("logit smoothing") {
  GameSpec hd = singleton_hawk_dove();
  SolveOptions o;
  o.logit_temperature = 1e-3;
  EquilibriumReport r = solve(hd, uniform_social_state(hd), o);
  REQUIRE(r.converged);
  CHECK(r.fixed_point_residual < 1e-8);
  CHECK(std::abs(r.state.pi.table[0](0, 0) - hawk_dove_grid_share(2.0, 3.0)) <= 1e-3);
}

TEST_CASE("stall warning without adaptive damping") {
  GameSpec hd = singleton_hawk_dove();
  SolveOptions o;
  o.adaptive = false;
  o.damping = 1.0;
  o.max_iters = 200;
  EquilibriumReport r = solve(hd, uniform_social_state(hd), o);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 200);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].find("logit") != std::string::npos);
}

TEST_CASE("option validation") {
  GameSpec hd = singleton_hawk_dove();
  SolveOptions o;
  o.damping = 0.0;
  CHECK_THROWS_AS(solve(hd, uniform_social_state(hd), o), ConfigError);
  o = {};
  o.logit_temperature = -1.0;
  CHECK_THROWS_AS(solve(hd, uniform_social_state(hd), o), ConfigError);
  SocialState bad = uniform_social_state(hd);
  bad.pi.table[0](0, 0) = 0.9;
  CHECK_THROWS_AS(solve(hd, bad), SpecError);
}

TEST_CASE("residuals vanish exactly at a pure equilibrium") {
  GameSpec pd = singleton_dominant();
  SocialState s = uniform_social_state(pd);
  s.pi.table[0] << 0, 1;
  Residuals r = residuals(pd, s);
  CHECK(r.pi == 0.0);
  CHECK(r.d == 0.0);
  s.pi.table[0] << 1, 0;
  CHECK(residuals(pd, s).pi == doctest::Approx(2.0));  // F = (3, 5)
}

TEST_CASE("perturbation breaks the certificate") {
  for (const auto& name : {"hawk-dove-hunger", "singleton-hawk-dove", "singleton-dominant"}) {
    GameSpec spec = builtin_game(name);
    EquilibriumReport r = solve(spec, uniform_social_state(spec));
    REQUIRE(r.converged);
    CHECK(certify(spec, r.state).pass);
    SocialState p = perturb_toward_worst(spec, r.state);
    CHECK(sup_distance(p, r.state) > 0.0);
    CHECK(sup_distance(p, r.state) <= 0.05 + 1e-12);
    CHECK_FALSE(certify(spec, p).pass);
  }
}

TEST_CASE("random games") {
  Rng rng(59);
  int converged = 0;
  for (int k = 0; k < 30; ++k) {
    GameSpec spec = random_game(rng);
    EquilibriumReport r = solve(spec, uniform_social_state(spec));
    if (!r.converged) continue;
    ++converged;
    CHECK(residuals(spec, r.state).max() < 1e-8);
    CHECK(certify(spec, r.state).pass);
  }
  CHECK(converged >= 20);
}

TEST_CASE("restarts are reproducible") {
  GameSpec hdh = hawk_dove_hunger();
  RestartResult a = solve_restarts(hdh, {}, 4, 99);
  RestartResult b = solve_restarts(hdh, {}, 4, 99);
  REQUIRE(a.runs.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(sup_distance(a.runs[i].state, b.runs[i].state) == 0.0);
  CHECK(a.distinct == b.distinct);
  CHECK(a.distinct.size() >= 1);
}
