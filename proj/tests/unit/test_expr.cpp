#include <doctest.h>

#include <cstring>

#include "dynpop/error.hpp"
#include "dynpop/expr.hpp"
#include "dynpop/rng.hpp"

using namespace dynpop;

namespace {

SocialState one_type_state(double pi00, Vector d) {
  SocialState s;
  Matrix pi(2, 2);
  pi << pi00, 1 - pi00, 0.5, 0.5;
  s.pi.table = {pi};
  s.d.mass = {d};
  return s;
}

double eval(const std::string& text, const SocialState& s, Vector g = Vector::Ones(1)) {
  return CompiledExpr(parse_expr(text), g).eval(s);
}

template <class E>
std::string error_of(const std::string& text) {
  try {
    parse_expr(text);
  } catch (const E& e) {
    return e.what();
  }
  return "<no error>";
}

Expr random_expr(Rng& rng, int depth) {
  int pick = static_cast<int>(rng.below(depth <= 0 ? 4 : 12));
  switch (pick) {
    case 0: return Expr::number(static_cast<double>(static_cast<int>(rng.below(2000))) / 8.0 - 100.0);
    case 1: return Expr::state_ref(0, static_cast<int>(rng.below(2)));
    case 2: return Expr::policy_ref(0, static_cast<int>(rng.below(2)), static_cast<int>(rng.below(2)));
    case 3: return Expr::mass_ref(0);
    case 4: return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 5: return random_expr(rng, depth - 1) - random_expr(rng, depth - 1);
    case 6: return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
    case 7: return random_expr(rng, depth - 1) / random_expr(rng, depth - 1);
    case 8: return Expr::unary(Expr::Kind::Neg, random_expr(rng, depth - 1));
    case 9: return Expr::unary(Expr::Kind::Exp, random_expr(rng, depth - 1));
    case 10: return Expr::binary(Expr::Kind::Min, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    default: return Expr::binary(Expr::Kind::Max, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
  }
}

}  // namespace

TEST_CASE("expression arithmetic at a social state") {
  SocialState s = one_type_state(0.3, Vector{{0.6, 0.4}});
  CHECK(eval("2*d(0,1) + pi(0,0,0)", s) == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(eval("1 - 2 - 3", s) == -4.0);
  CHECK(eval("2/4/2", s) == 0.25);
  CHECK(eval("-(1 + 2)*3", s) == -9.0);
  CHECK(eval("min(d(0,0), d(0,1)) + max(1, 2)", s) == doctest::Approx(2.4));
  CHECK(eval("exp(0) + log(1)", s) == 1.0);
  CHECK(eval("g(0)", s, Vector::Constant(1, 0.25)) == 0.25);
  CHECK(eval("1e-3*1000", s) == doctest::Approx(1.0));
}

TEST_CASE("evaluation is pure") {
  SocialState s = one_type_state(0.123456789, Vector{{0.3141, 0.6859}});
  CompiledExpr c(parse_expr("exp(pi(0,0,0))/(d(0,1) + 0.1) - log(d(0,0))*pi(0,1,1)"), Vector::Ones(1));
  double a = c.eval(s), b = c.eval(s);
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}

TEST_CASE("evaluation errors") {
  SocialState s = one_type_state(0.0, Vector{{1.0, 0.0}});
  CHECK_THROWS_AS(eval("1/d(0,1)", s), EvalError);
  CHECK_THROWS_AS(eval("log(d(0,1))", s), EvalError);
  CHECK_THROWS_AS(eval("log(-1)", s), EvalError);
}

TEST_CASE("parse errors carry class and column") {
  CHECK(error_of<SyntaxError>("1 + (2") == "syntax error at column 7: expected ')'");
  CHECK(error_of<SyntaxError>("1 $ 2") == "syntax error at column 3: unexpected character '$'");
  CHECK(error_of<UnknownIdentifierError>("foo(1)") == "unknown identifier 'foo' at column 1");
  CHECK(error_of<ArityError>("d(0)") == "arity error at column 1: 'd' expects 2 arguments, got 1");
  CHECK(error_of<ArityError>("exp(1, 2)") == "arity error at column 1: 'exp' expects 1 argument, got 2");
  CHECK_THROWS_AS(parse_expr(""), SyntaxError);
  CHECK_THROWS_AS(parse_expr("1 2"), SyntaxError);
}

TEST_CASE("reference checks") {
  Dims dims{1, 2, 2};
  ActionMask mask(dims, true);
  mask.set(0, 1, 1, false);
  CHECK_THROWS_AS(check_references(parse_expr("d(0,5)"), dims, mask, ""), IndexError);
  CHECK_THROWS_AS(check_references(parse_expr("pi(0,1,1)"), dims, mask, ""), IndexError);
  CHECK_THROWS_AS(check_references(parse_expr("g(1)"), dims, mask, ""), IndexError);
  CHECK_NOTHROW(check_references(parse_expr("d(0,1)*pi(0,1,0)"), dims, mask, ""));
  try {
    check_references(parse_expr("1 + d(0,5)"), dims, mask, "");
    FAIL("expected IndexError");
  } catch (const IndexError& e) {
    CHECK(std::string(e.what()).find("d(0,5)") != std::string::npos);
  }
}

TEST_CASE("printing round-trips") {
  for (const char* text : {"1 + 2*3", "(1 + 2)*3", "1 - (2 - 3)", "1 - 2 - 3", "-2", "-(2)", "-d(0,1)",
                           "2/(3*4)", "exp(-0.5*pi(0,1,0))", "min(1, max(2, 3))", "0.1 + 1e-20"}) {
    Expr e = parse_expr(text);
    CHECK(parse_expr(e.to_string()) == e);
    CHECK(parse_expr(e.to_string()).to_string() == e.to_string());
  }
  CHECK(parse_expr("(1 + 2)*3").to_string() == "(1 + 2)*3");
  CHECK(parse_expr("1 - (2 - 3)").to_string() == "1 - (2 - 3)");
  CHECK(parse_expr("((d(0,1)))").to_string() == "d(0,1)");
}

TEST_CASE("random trees survive print and parse") {
  Rng rng(11);
  for (int k = 0; k < 500; ++k) {
    Expr e = random_expr(rng, 4);
    CHECK(parse_expr(e.to_string()) == e);
  }
}
