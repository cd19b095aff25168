#ifndef DYNPOP_MDP_HPP
#define DYNPOP_MDP_HPP

#include <limits>
#include <vector>

#include "dynpop/game.hpp"

namespace dynpop {

/// Sentinel stored in Q at masked slots; never a maximizer.
inline constexpr double kMaskedQ = -std::numeric_limits<double>::infinity();

/// The time-homogeneous MDP one type faces when the social state is held
/// fixed: all transition rows and stage rewards evaluated once.
struct TypeMdp {
  int states = 0;
  int actions = 0;
  double discount = 0.0;
  std::vector<std::vector<int>> allowed;  // per state, ascending
  Matrix transitions;                     // row x * actions + a holds p[. | x, a]; masked rows zero
  Matrix rewards;                         // (x, a); masked slots zero

  auto transition(int x, int a) const { return transitions.row(x * actions + a); }

  /// P[x, x+] = sum_a policy(x, a) p[x+ | x, a].
  Matrix stochastic_matrix(const Matrix& policy) const;
  /// R[x] = sum_a policy(x, a) r[x, a].
  Vector expected_rewards(const Matrix& policy) const;
  /// Solves (I - alpha P) V = R by LU with partial pivoting.
  Vector values(const Matrix& policy) const;
  /// Q[x, a] = r[x, a] + alpha sum_x+ p[x+ | x, a] V[x+]; masked slots hold kMaskedQ.
  Matrix q_values(const Vector& values) const;
};

TypeMdp freeze_type(const GameSpec& spec, const SocialState& s, int tau);
std::vector<TypeMdp> freeze(const GameSpec& spec, const SocialState& s);

/// All social-state-parametrized MDP quantities at one social state.
struct MdpView {
  std::vector<Matrix> P;
  std::vector<Vector> R;
  std::vector<Vector> V;
  std::vector<Matrix> Q;
};

MdpView mdp_view(const GameSpec& spec, const SocialState& s);
std::vector<Matrix> stochastic_matrix(const GameSpec& spec, const SocialState& s);
std::vector<Vector> expected_rewards(const GameSpec& spec, const SocialState& s);
std::vector<Vector> value_function(const GameSpec& spec, const SocialState& s);
std::vector<Matrix> q_values(const GameSpec& spec, const SocialState& s);

/// Sum over allowed actions of policy(x, a) * Q(x, a); masked slots skipped.
double policy_average(const Matrix& policy, const Matrix& Q, int x);

/// Per (tau, x): the actions within `tie_tol` of the row maximum, and the
/// uniform distribution over them.
struct BestResponseSet {
  std::vector<std::vector<std::vector<int>>> members;  // [tau][x] -> actions
  std::vector<Matrix> distribution;                    // [tau](x, a)
};

inline constexpr double kDefaultTieTol = 1e-10;

BestResponseSet best_response(const std::vector<Matrix>& Q, double tie_tol = kDefaultTieTol);
BestResponseSet best_response(const GameSpec& spec, const SocialState& s, double tie_tol = kDefaultTieTol);

/// Canonical tie-broken best response of one payoff row; entries equal to
/// kMaskedQ are excluded and get zero mass.
Vector best_response_row(const Eigen::Ref<const Vector>& payoff, double tie_tol = kDefaultTieTol);
/// Logit choice softmax(payoff / temperature) over the non-masked entries.
Vector logit_row(const Eigen::Ref<const Vector>& payoff, double temperature);

struct PolicyIterationResult {
  Matrix policy;  // deterministic
  int iterations = 0;
  Vector values;
};

/// Howard policy iteration started from `initial`. An improvement step is
/// taken only where some action beats the current row average by more than
/// `improve_tol`. Throws CertificateError past `max_iters` steps.
PolicyIterationResult policy_iteration(const TypeMdp& mdp, const Matrix& initial, int max_iters = 1000,
                                       double improve_tol = 1e-9);

/// Runs policy iteration for every type on the MDP frozen at `frozen`,
/// starting from frozen.pi.
std::vector<PolicyIterationResult> policy_iteration(const GameSpec& spec, const SocialState& frozen,
                                                    int max_iters = 1000, double improve_tol = 1e-9);

}  // namespace dynpop

#endif  // DYNPOP_MDP_HPP
