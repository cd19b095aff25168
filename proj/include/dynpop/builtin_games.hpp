#ifndef DYNPOP_BUILTIN_GAMES_HPP
#define DYNPOP_BUILTIN_GAMES_HPP

#include <string>
#include <vector>

#include "dynpop/game.hpp"

namespace dynpop {

/// Classical population game embedded with a single state. `payoff[tau][a]`
/// is the payoff expression of action a for population tau; absent entries
/// (empty optional) mask the action. Discount 0 and unit rates, so the
/// single-stage deviation rewards equal the payoffs.
GameSpec singleton_game(const std::vector<std::vector<std::optional<Expr>>>& payoff, Vector type_mass,
                        std::string name = "singleton");

/// One population playing the symmetric matrix game `A` against the field:
/// F[a] = sum_b A(a, b) pi(0, b, 0).
GameSpec singleton_matrix_game(const Matrix& A, std::string name = "singleton");

/// Hawk-dove with contest value V and injury cost C; the mixed equilibrium
/// plays hawk with probability V/C when V < C.
GameSpec singleton_hawk_dove(double value = 2.0, double cost = 3.0);

/// Prisoner's dilemma (cooperate, defect); defecting strictly dominates.
GameSpec singleton_dominant();

struct HawkDoveHungerParams {
  double value_sated = 1.0;
  double value_hungry = 3.0;
  double cost = 4.0;
  // Probability that a sated agent who loses a contest stays sated.
  double stay_sated = 0.5;
  double hunger_penalty = 1.0;
  double discount = 0.8;
  double rate = 1.0;
};

/// One type, states {0: sated, 1: hungry}, actions {0: hawk, 1: dove}.
/// Agents are matched against the field; h = (d(0,0) pi(0,0,0) + d(0,1) pi(0,0,1)) / g(0)
/// is the chance the opponent plays hawk. Winning a contest makes the agent
/// sated; a loser becomes hungry (a sated loser stays sated with
/// probability `stay_sated`). Both transition entries of a row are written
/// as complementary products, so rows are normalized by construction.
GameSpec hawk_dove_hunger(const HawkDoveHungerParams& params = {});

/// One type, two states, one action; every interaction swaps the state.
GameSpec periodic_swap(double rate = 1.0, double discount = 0.5);

std::vector<std::string> builtin_names();

/// Throws ConfigError for an unknown name.
GameSpec builtin_game(const std::string& name);

}  // namespace dynpop

#endif  // DYNPOP_BUILTIN_GAMES_HPP
