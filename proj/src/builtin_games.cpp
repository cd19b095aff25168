#include "dynpop/builtin_games.hpp"

#include "dynpop/error.hpp"

namespace dynpop {

namespace {

Expr num(double v) { return Expr::number(v); }

Vector constant(int n, double v) { return Vector::Constant(n, v); }

}  // namespace

GameSpec singleton_game(const std::vector<std::vector<std::optional<Expr>>>& payoff, Vector type_mass, std::string name) {
  int types = static_cast<int>(payoff.size());
  if (types == 0) throw SpecError("singleton game needs at least one population");
  int actions = static_cast<int>(payoff[0].size());
  Dims dims{types, 1, actions};
  ActionMask mask(dims, false);
  ExprTables tables(dims);
  for (int t = 0; t < types; ++t) {
    if (static_cast<int>(payoff[t].size()) != actions) throw SpecError("payoff table is ragged");
    for (int a = 0; a < actions; ++a) {
      if (!payoff[t][a]) continue;
      mask.set(t, 0, a, true);
      tables.prob(t, 0, a, 0) = num(1.0);
      tables.reward(t, 0, a) = *payoff[t][a];
    }
  }
  return GameSpec::from_expressions(dims, std::move(mask), std::move(type_mass), constant(types, 0.0),
                                    constant(types, 1.0), std::move(tables), std::move(name));
}

GameSpec singleton_matrix_game(const Matrix& A, std::string name) {
  if (A.rows() != A.cols() || A.rows() < 1) throw SpecError("matrix game must be square");
  int n = static_cast<int>(A.rows());
  std::vector<std::vector<std::optional<Expr>>> payoff(1, std::vector<std::optional<Expr>>(static_cast<std::size_t>(n)));
  for (int a = 0; a < n; ++a) {
    Expr f = num(A(a, 0)) * Expr::policy_ref(0, 0, 0);
    for (int b = 1; b < n; ++b) f = f + num(A(a, b)) * Expr::policy_ref(0, b, 0);
    payoff[0][static_cast<std::size_t>(a)] = f;
  }
  return singleton_game(payoff, constant(1, 1.0), std::move(name));
}

GameSpec singleton_hawk_dove(double value, double cost) {
  Matrix A(2, 2);
  A << (value - cost) / 2.0, value, 0.0, value / 2.0;
  return singleton_matrix_game(A, "singleton-hawk-dove");
}

GameSpec singleton_dominant() {
  Matrix A(2, 2);
  A << 3.0, 0.0, 5.0, 1.0;
  return singleton_matrix_game(A, "singleton-dominant");
}

GameSpec hawk_dove_hunger(const HawkDoveHungerParams& p) {
  Dims dims{1, 2, 2};
  ActionMask mask(dims, true);
  ExprTables tables(dims);
  const int hawk = 0, dove = 1, sated = 0, hungry = 1;
  Expr h = (Expr::state_ref(0, sated) * Expr::policy_ref(0, hawk, sated) +
            Expr::state_ref(0, hungry) * Expr::policy_ref(0, hawk, hungry)) /
           Expr::mass_ref(0);
  const double value[2] = {p.value_sated, p.value_hungry};
  const double penalty[2] = {0.0, p.hunger_penalty};
  const double stay[2] = {p.stay_sated, 0.0};
  // Probability of winning the contest, per own action.
  const Expr win[2] = {num(1.0) - h / num(2.0), (num(1.0) - h) / num(2.0)};
  for (int x = 0; x < 2; ++x) {
    Expr hawk_reward = h * num((value[x] - p.cost) / 2.0) + (num(1.0) - h) * num(value[x]);
    Expr dove_reward = (num(1.0) - h) * num(value[x] / 2.0);
    if (penalty[x] != 0.0) {
      hawk_reward = hawk_reward - num(penalty[x]);
      dove_reward = dove_reward - num(penalty[x]);
    }
    tables.reward(0, x, hawk) = hawk_reward;
    tables.reward(0, x, dove) = dove_reward;
    for (int a = 0; a < 2; ++a) {
      Expr lose = num(1.0) - win[a];
      tables.prob(0, x, a, sated) = stay[x] == 0.0 ? win[a] : win[a] + lose * num(stay[x]);
      tables.prob(0, x, a, hungry) = stay[x] == 0.0 ? lose : lose * num(1.0 - stay[x]);
    }
  }
  return GameSpec::from_expressions(dims, std::move(mask), constant(1, 1.0), constant(1, p.discount),
                                    constant(1, p.rate), std::move(tables), "hawk-dove-hunger");
}

GameSpec periodic_swap(double rate, double discount) {
  Dims dims{1, 2, 1};
  ExprTables tables(dims);
  tables.prob(0, 0, 0, 1) = num(1.0);
  tables.prob(0, 1, 0, 0) = num(1.0);
  tables.reward(0, 0, 0) = num(0.0);
  tables.reward(0, 1, 0) = num(0.0);
  return GameSpec::from_expressions(dims, ActionMask(dims, true), constant(1, 1.0), constant(1, discount),
                                    constant(1, rate), std::move(tables), "periodic-swap");
}

std::vector<std::string> builtin_names() {
  return {"hawk-dove-hunger", "periodic-swap", "singleton-hawk-dove", "singleton-dominant"};
}

GameSpec builtin_game(const std::string& name) {
  if (name == "hawk-dove-hunger") return hawk_dove_hunger();
  if (name == "periodic-swap") return periodic_swap();
  if (name == "singleton-hawk-dove") return singleton_hawk_dove();
  if (name == "singleton-dominant") return singleton_dominant();
  throw ConfigError("unknown built-in game '" + name + "'");
}

}  // namespace dynpop
