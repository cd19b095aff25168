#include "random_games.hpp"

#include <cmath>

namespace dynpop::testing {

Vector random_simplex(Rng& rng, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.exponential(1.0);
  return v / v.sum();
}

namespace {

int draw(Rng& rng, int exact, int max) {
  return exact > 0 ? exact : 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max)));
}

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

// Two decimals keeps the expression text short and the arithmetic exact-ish.
double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

GameSpec random_game(Rng& rng, const RandomGameShape& shape) {
  Dims dims{draw(rng, shape.types, shape.max_types), draw(rng, shape.states, shape.max_states),
            draw(rng, shape.actions, shape.max_actions)};
  Vector g = random_simplex(rng, dims.types);
  g = (g.array() + 0.2).matrix();
  g /= g.sum();
  Vector alpha(dims.types), delta(dims.types);
  for (int t = 0; t < dims.types; ++t) {
    alpha(t) = round2(uniform(rng, 0.0, shape.max_discount));
    delta(t) = round2(uniform(rng, shape.min_rate, shape.max_rate));
  }
  ActionMask mask(dims, false);
  for (int t = 0; t < dims.types; ++t)
    for (int x = 0; x < dims.states; ++x) {
      for (int a = 0; a < dims.actions; ++a) mask.set(t, x, a, rng.uniform() < shape.allow_probability);
      if (mask.count(t, x) == 0) mask.set(t, x, static_cast<int>(rng.below(static_cast<std::uint64_t>(dims.actions))), true);
    }

  ExprTables tables(dims);
  for (int t = 0; t < dims.types; ++t)
    for (int x = 0; x < dims.states; ++x)
      for (int a : mask.actions(t, x)) {
        Vector u = random_simplex(rng, dims.states);
        Vector w = random_simplex(rng, dims.states);
        bool blend = rng.uniform() < 0.7;
        int rt = static_cast<int>(rng.below(static_cast<std::uint64_t>(dims.types)));
        int rz = static_cast<int>(rng.below(static_cast<std::uint64_t>(dims.states)));
        Expr share = Expr::state_ref(rt, rz) / Expr::mass_ref(rt);
        for (int y = 0; y < dims.states; ++y) {
          Expr p = Expr::number(u(y));
          if (blend) p = p + Expr::number(w(y) - u(y)) * share;
          tables.prob(t, x, a, y) = p;
        }
        int pt = static_cast<int>(rng.below(static_cast<std::uint64_t>(dims.types)));
        int px = static_cast<int>(rng.below(static_cast<std::uint64_t>(dims.states)));
        std::vector<int> acts = mask.actions(pt, px);
        int pa = acts[rng.below(acts.size())];
        tables.reward(t, x, a) = Expr::number(round2(uniform(rng, -1, 1))) +
                                 Expr::number(round2(uniform(rng, -1, 1))) * Expr::policy_ref(pt, pa, px) +
                                 Expr::number(round2(uniform(rng, -1, 1))) * Expr::state_ref(rt, rz);
      }
  return GameSpec::from_expressions(dims, std::move(mask), std::move(g), std::move(alpha), std::move(delta),
                                    std::move(tables), "random");
}

}  // namespace dynpop::testing
