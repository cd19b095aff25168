#ifndef DYNPOP_REDUCTION_HPP
#define DYNPOP_REDUCTION_HPP

#include <string>
#include <vector>

#include "dynpop/evolution.hpp"
#include "dynpop/game.hpp"

namespace dynpop {

/// One population of the reduced classical game. Policy populations
/// (one per type-state, x >= 0) choose among the allowed actions with mass
/// 1; state populations (one per type, x == -1) choose among states with
/// mass g_tau.
struct Population {
  std::string id;
  int tau = 0;
  int x = -1;
  double mass = 1.0;
  std::vector<int> strategies;

  bool is_state_population() const { return x < 0; }
};

/// Population strategy profile: chi[rho] over populations[rho].strategies.
using Profile = std::vector<Vector>;

/// Classical population game whose payoffs are the single-stage deviation
/// rewards (policy populations) and the asynchronous state field (state
/// populations) of a dynamic game.
class ClassicalGame {
 public:
  explicit ClassicalGame(GameSpec spec);

  const GameSpec& spec() const { return spec_; }
  const std::vector<Population>& populations() const { return populations_; }
  std::size_t size() const { return populations_.size(); }

  Profile encode(const SocialState& s) const;
  SocialState decode(const Profile& chi) const;

  /// F[rho] over populations[rho].strategies.
  Profile payoffs(const Profile& chi) const;

 private:
  GameSpec spec_;
  std::vector<Population> populations_;
};

ClassicalGame reduce(const GameSpec& spec);

/// Largest per-population exploitability m max_a F[a] - chi . F; also
/// reported separately over policy and state populations.
struct NashResidual {
  double total = 0.0;
  double policy_populations = 0.0;
  double state_populations = 0.0;
};

NashResidual classical_nash_residual(const ClassicalGame& cg, const Profile& chi);

/// Classical mean dynamics on the reduced game: the given protocols at rate
/// eta on policy populations and the projection dynamic at unit rate on
/// state populations. Laid out as a StateRate for comparison with the
/// coupled field.
StateRate classical_mean_dynamics(const ClassicalGame& cg, const Profile& chi, const EvolutionConfig& cfg);

struct EquivalenceReport {
  double classical = 0.0;
  double classical_policy = 0.0;
  double classical_state = 0.0;
  double residual_pi = 0.0;
  double residual_d = 0.0;
  bool classical_zero = false;
  bool dynamic_zero = false;
  // Largest |(dP - d)(d - dP)^T + |dP - d|^2| over types.
  double inner_product_error = 0.0;
  // Over types with |dP - d| > tol: largest value of the inner product
  // (must be negative).
  double worst_inner_product = 0.0;

  bool agree() const { return classical_zero == dynamic_zero; }
};

/// Compares both equilibrium notions at s. Throws EquivalenceViolation when one
/// residual is below tol and the other is not, or when the policy-population
/// residual and residual_pi differ by more than 1e-10.
EquivalenceReport equivalence_crosscheck(const GameSpec& spec, const SocialState& s, double tol = 1e-6);

}  // namespace dynpop

#endif  // DYNPOP_REDUCTION_HPP
