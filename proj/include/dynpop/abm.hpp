#ifndef DYNPOP_ABM_HPP
#define DYNPOP_ABM_HPP

#include <cstdint>
#include <ostream>
#include <vector>

#include "dynpop/dynamics.hpp"
#include "dynpop/evolution.hpp"
#include "dynpop/game.hpp"

namespace dynpop {

enum class AbmMode {
  // Agents draw a fresh action from the fixed reference policy at every
  // interaction; they keep no memory and the empirical policy is the
  // reference policy.
  StateOnly,
  // Agents replay their remembered action for the current state, revising
  // it with probability eta at each interaction.
  Revision,
};

struct AbmConfig {
  AbmMode mode = AbmMode::StateOnly;
  // Initial state distribution, initial memory distribution, and (state-only
  // mode) the reference policy.
  SocialState initial;
  Vector eta;                               // revision probability per type, in (0, 1]
  std::vector<RevisionProtocol> protocol;   // best-response or logit, per type
  double horizon = 10.0;
  double snapshot_interval = 0.1;
  double tie_tol = kDefaultTieTol;

  /// Throws ConfigError on invalid settings or n too small for a type.
  void validate(const GameSpec& spec, int n) const;
};

/// Agents per type by largest-remainder rounding of n g (ties to the lower
/// index). Throws ConfigError if n g_tau < 1 for some type.
std::vector<int> type_counts(const Vector& type_mass, int n);

/// Event-driven simulation of n agents with independent exponential
/// interaction clocks of rate delta_tau. Snapshots hold the empirical state:
/// d[tau](x) = (agents of tau in x) / n and, in revision mode,
/// pi[tau](x, a) = (agents of tau remembering a for x) / (agents of tau).
/// Transitions and revisions use the empirical state. Bitwise reproducible
/// for fixed (spec, cfg, n, seed).
Trajectory simulate(const GameSpec& spec, const AbmConfig& cfg, int n, std::uint64_t seed);

/// Sup over the snapshots of `empirical` of the sup-norm distance to the
/// reference (linearly interpolated), over both d and pi.
double trajectory_error(const Trajectory& empirical, const Trajectory& reference);

struct StudyCell {
  int n = 0;
  int seed_index = 0;
  std::uint64_t seed = 0;
  double error = 0.0;
};

struct StudyResult {
  std::vector<StudyCell> cells;
  std::vector<int> n;
  std::vector<double> mean_error;  // per n, over seeds
  double slope = 0.0;              // least squares of log(mean_error) on log(n)
};

/// Runs every (n, seed) cell in parallel; the seed of cell k is
/// derive_seed(base_seed, k) for every n.
StudyResult convergence_study(const GameSpec& spec, const AbmConfig& cfg, const std::vector<int>& n_list, int seeds,
                              std::uint64_t base_seed, const Trajectory& reference);

/// Rows "n,seed,error" followed by "n,mean,<value>" rows and a final
/// "slope,,<value>" row.
void write_study_csv(std::ostream& out, const StudyResult& study);

}  // namespace dynpop

#endif  // DYNPOP_ABM_HPP
