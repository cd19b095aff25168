#include <doctest.h>

#include "dynpop/builtin_games.hpp"
#include "dynpop/error.hpp"
#include "dynpop/game.hpp"
#include "dynpop/game_file.hpp"
#include "random_games.hpp"

using namespace dynpop;

namespace {

const char* kMinimal = R"J({
  "types": 1, "states": 1, "actions": 1,
  "g": [1], "alpha": [0.5], "delta": [1],
  "transitions": [{"tau": 0, "x": 0, "a": 0, "to": 0, "prob": "1"}],
  "rewards": [{"tau": 0, "x": 0, "a": 0, "value": "0"}]
})J";

GameSpec two_state_row(const std::string& p0, const std::string& p1) {
  Dims dims{1, 2, 1};
  ExprTables tables(dims);
  for (int x = 0; x < 2; ++x) {
    tables.prob(0, x, 0, 0) = parse_expr(p0);
    tables.prob(0, x, 0, 1) = parse_expr(p1);
  }
  return GameSpec::from_expressions(dims, ActionMask(dims, true), Vector::Ones(1), Vector::Zero(1), Vector::Ones(1),
                                    tables);
}

}  // namespace

TEST_CASE("validation") {
  GameSpec trivial = parse_game_file(kMinimal);
  CHECK(validate_spec(trivial, 10, 1).valid());

  ValidationReport bad = validate_spec(two_state_row("0.5", "0.6"), 1, 1);
  REQUIRE(bad.violations.size() == 2);
  CHECK(bad.violations[0].kind == Violation::Kind::RowSum);
  CHECK(bad.violations[0].describe() == "row-sum 1.1000000000000001 at (tau=0, x=0, a=0) in sample 0");

  ValidationReport negative = validate_spec(two_state_row("1.5", "-0.5"), 1, 1);
  CHECK(negative.violations.front().kind == Violation::Kind::NegativeProbability);

  CHECK(validate_spec(hawk_dove_hunger(), 100, 42).valid());
  for (const auto& name : builtin_names()) CHECK(validate_spec(builtin_game(name), 100, 42).valid());

  CHECK_THROWS_AS(validate_spec(two_state_row("1/(d(0,0) - d(0,0))", "0"), 1, 1), EvalError);
}

TEST_CASE("transition rows within tolerance are cleaned") {
  GameSpec spec = two_state_row("1 + 1e-10", "-1e-13");
  SocialState s = uniform_social_state(spec);
  std::vector<double> row(2);
  spec.transition_row(s, 0, 0, 0, row);
  CHECK(row[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(row[1] == 0.0);
  CHECK(row[0] + row[1] == doctest::Approx(1.0).epsilon(1e-15));
  GameSpec off = two_state_row("0.5", "0.6");
  CHECK_THROWS_AS(off.transition_row(s, 0, 0, 0, row), EvalError);
}

TEST_CASE("structural invariants") {
  Dims dims{1, 1, 1};
  ExprTables t(dims);
  t.prob(0, 0, 0, 0) = Expr::number(1);
  auto make = [&](Vector g, Vector alpha, Vector delta, ActionMask mask) {
    return GameSpec::from_expressions(dims, mask, g, alpha, delta, t);
  };
  ActionMask all(dims, true);
  CHECK_NOTHROW(make(Vector::Ones(1), Vector::Zero(1), Vector::Ones(1), all));
  CHECK_THROWS_AS(make(Vector::Constant(1, 0.9), Vector::Zero(1), Vector::Ones(1), all), SpecError);
  CHECK_THROWS_AS(make(Vector::Ones(1), Vector::Ones(1), Vector::Ones(1), all), SpecError);
  CHECK_THROWS_AS(make(Vector::Ones(1), Vector::Zero(1), Vector::Zero(1), all), SpecError);
  CHECK_THROWS_AS(make(Vector::Ones(1), Vector::Zero(1), Vector::Ones(1), ActionMask(dims, false)), SpecError);
  CHECK_THROWS_AS(make(Vector::Ones(2) / 2, Vector::Zero(1), Vector::Ones(1), all), SpecError);
}

TEST_CASE("uniform social state") {
  Dims dims{1, 2, 2};
  ExprTables t(dims);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 2; ++a) t.prob(0, x, a, x) = Expr::number(1);
  GameSpec spec = GameSpec::from_expressions(dims, ActionMask(dims, true), Vector::Ones(1), Vector::Zero(1),
                                             Vector::Ones(1), t);
  SocialState s = uniform_social_state(spec);
  CHECK(s.pi.table[0](0, 0) == 0.5);
  CHECK(s.pi.table[0](1, 1) == 0.5);
  CHECK(s.d.mass[0](0) == 0.5);

  ActionMask mask(dims, true);
  mask.set(0, 0, 1, false);
  ExprTables t2(dims);
  t2.prob(0, 0, 0, 0) = Expr::number(1);
  t2.prob(0, 1, 0, 1) = Expr::number(1);
  t2.prob(0, 1, 1, 1) = Expr::number(1);
  SocialState m = uniform_social_state(
      GameSpec::from_expressions(dims, mask, Vector::Ones(1), Vector::Zero(1), Vector::Ones(1), t2));
  CHECK(m.pi.table[0](0, 0) == 1.0);
  CHECK(m.pi.table[0](0, 1) == 0.0);

  Dims two{2, 2, 1};
  ExprTables t3(two);
  for (int tau = 0; tau < 2; ++tau)
    for (int x = 0; x < 2; ++x) t3.prob(tau, x, 0, x) = Expr::number(1);
  Vector g{{0.25, 0.75}};
  SocialState w = uniform_social_state(
      GameSpec::from_expressions(two, ActionMask(two, true), g, Vector::Zero(2), Vector::Ones(2), t3));
  CHECK(w.d.mass[0](0) == 0.125);
  CHECK(w.d.mass[0](1) == 0.125);
  CHECK(w.d.mass[1](0) == 0.375);
  CHECK(w.d.mass[1](1) == 0.375);

  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    GameSpec r = testing::random_game(rng);
    CHECK_NOTHROW(check_social_state(r, uniform_social_state(r), 1e-12));
    CHECK_NOTHROW(check_social_state(r, random_social_state(r, rng), 1e-12));
  }
}

TEST_CASE("game files") {
  GameSpec minimal = parse_game_file(kMinimal);
  CHECK(minimal.types() == 1);
  CHECK(minimal.states() == 1);
  CHECK(minimal.actions() == 1);

  std::string bad_ref = R"J({"types":1,"states":2,"actions":1,"g":[1],"alpha":[0],"delta":[1],
    "transitions":[{"tau":0,"x":0,"a":0,"to":0,"prob":"d(0,5)"},{"tau":0,"x":1,"a":0,"to":1,"prob":"1"}]})J";
  try {
    parse_game_file(bad_ref);
    FAIL("expected IndexError");
  } catch (const IndexError& e) {
    CHECK(std::string(e.what()).find("d(0,5)") != std::string::npos);
  }

  std::string missing = R"J({"types":1,"states":2,"actions":1,"g":[1],"alpha":[0],"delta":[1],
    "transitions":[{"tau":0,"x":0,"a":0,"to":0,"prob":"1"}]})J";
  CHECK_THROWS_AS(parse_game_file(missing), MissingTransitionRowError);
  CHECK_THROWS_AS(parse_game_file("{\"types\": 1,"), SyntaxError);
}

TEST_CASE("parse after serialize is the identity") {
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    GameSpec spec = testing::random_game(rng);
    GameSpec back = parse_game_file(serialize_game(spec));
    CHECK(back.dims() == spec.dims());
    CHECK(back.mask() == spec.mask());
    CHECK(back.type_mass() == spec.type_mass());
    CHECK(back.discount() == spec.discount());
    CHECK(back.rate() == spec.rate());
    CHECK(*back.expressions() == *spec.expressions());
    CHECK(serialize_game(back) == serialize_game(spec));
  }
  GameSpec hdh = hawk_dove_hunger();
  CHECK(*parse_game_file(serialize_game(hdh)).expressions() == *hdh.expressions());
}
