#ifndef DYNPOP_EQUILIBRIUM_HPP
#define DYNPOP_EQUILIBRIUM_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dynpop/game.hpp"
#include "dynpop/mdp.hpp"

namespace dynpop {

struct Residuals {
  // max over (tau, x) of max_a Q - sum_a pi Q.
  double pi = 0.0;
  // max over tau of |d P - d|_inf.
  double d = 0.0;

  double max() const { return pi > d ? pi : d; }
};

Residuals residuals(const GameSpec& spec, const SocialState& s);
Residuals residuals(const MdpView& view, const SocialState& s);

struct SolveOptions {
  double damping = 0.2;
  double tol = 1e-8;
  int max_iters = 10000;
  // When set, the policy target is the logit response at this temperature
  // instead of the tie-broken best response.
  std::optional<double> logit_temperature;
  double tie_tol = kDefaultTieTol;
  // Halve the policy damping whenever the convergence measure grows.
  bool adaptive = true;
  int stall_window = 50;

  void validate() const;
};

struct Certificate {
  bool pass = false;
  int improvement_steps = 0;
  // max over (tau, x) of |V_opt - V(pi*)|.
  double value_gap = 0.0;
  // Worst single-stage deviation gain and where it occurs.
  double q_gap = 0.0;
  int worst_tau = 0;
  int worst_x = 0;
};

struct EquilibriumReport {
  SocialState state;
  Residuals residual;
  // Sup-norm of (target - s) at the final state; for logit targets this is
  // the convergence measure.
  double fixed_point_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double final_damping = 0.0;
  std::vector<std::string> warnings;
  std::optional<Certificate> certificate;
};

/// Damped fixed-point iteration s <- (1 - lambda) s + lambda (B(s), d P(s)).
/// Stops when the convergence measure drops below tol: max of the two
/// equilibrium residuals for best-response targets, the fixed-point residual
/// for logit targets. Non-convergence is reported, not thrown.
EquilibriumReport solve(const GameSpec& spec, const SocialState& s0, const SolveOptions& options = {});

struct CertifyOptions {
  double improve_tol = 1e-7;
  double value_tol = 1e-6;
  int max_iters = 1000;
};

/// Freezes the social state and runs policy iteration from its policy for
/// every type. Passes iff no improvement step is taken and the optimal
/// deterministic value matches V(pi*, d*) within value_tol at every state.
Certificate certify(const GameSpec& spec, const SocialState& state, const CertifyOptions& options = {});

struct RestartResult {
  std::vector<EquilibriumReport> runs;
  // Indices into `runs` of converged results that are pairwise more than
  // `distinct_tol` apart in sup-norm.
  std::vector<std::size_t> distinct;
};

/// `restarts` solves from seeded random initial states, run in parallel.
RestartResult solve_restarts(const GameSpec& spec, const SolveOptions& options, int restarts, std::uint64_t seed,
                             double distinct_tol = 1e-4);

/// Moves `mass` of every policy row with two or more allowed actions onto
/// the allowed action with the smallest Q at `s`.
SocialState perturb_toward_worst(const GameSpec& spec, const SocialState& s, double mass = 0.05);

}  // namespace dynpop

#endif  // DYNPOP_EQUILIBRIUM_HPP
