#ifndef DYNPOP_DYNAMICS_HPP
#define DYNPOP_DYNAMICS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dynpop/game.hpp"

namespace dynpop {

/// Time-indexed snapshots. Discrete runs use the step index as time.
struct Trajectory {
  std::vector<double> times;
  std::vector<SocialState> states;
  std::string integrator;
  double step = 0.0;
  std::uint64_t seed = 0;
  // Largest clip-and-renormalize correction applied after any step.
  double max_correction = 0.0;
  // Number of step halvings forced by boundary overshoot.
  int halvings = 0;

  std::size_t size() const { return times.size(); }
  const SocialState& back() const { return states.back(); }
};

/// d_tau P_tau(pi, d) for every type.
StateDistribution sync_step(const GameSpec& spec, const SocialState& s);

/// W_tau = delta_tau (d_tau P_tau - d_tau); each W_tau sums to zero.
std::vector<Vector> async_field(const GameSpec& spec, const SocialState& s);
std::vector<Vector> async_field(const GameSpec& spec, const SocialState& s, const std::vector<Matrix>& P);

/// `steps` synchronous updates with the policy held fixed; snapshot per step.
Trajectory simulate_sync(const GameSpec& spec, const SocialState& s0, int steps);

using VectorField = std::function<StateRate(const SocialState&)>;

inline constexpr double kMaxStepRate = 0.5;        // bound on h * fastest rate
inline constexpr double kCorrectionLimit = 1e-3;   // larger corrections abort
inline constexpr double kOvershootTolerance = 1e-10;

/// h = 0.01 / fastest_rate.
double default_step(double fastest_rate);

/// Fixed-step classical RK4 on the product of simplices. After every step
/// each d_tau is clipped at zero and rescaled to g_tau, and each policy row
/// is clipped and rescaled to 1. A step whose raw result leaves the simplex
/// by more than kOvershootTolerance is split in halves (recursively) so that
/// boundary hits are resolved without changing the snapshot grid.
///
/// Snapshots are taken at t = k h, with a shortened final step if t_end is
/// not a multiple of h. Throws ConfigError unless h > 0 and
/// h * fastest_rate <= 0.5; throws IntegrationError if a correction
/// exceeds 1e-3.
Trajectory integrate(const GameSpec& spec, const SocialState& s0, const VectorField& field, double t_end, double h,
                     double fastest_rate, const std::string& name = "rk4");

/// Asynchronous state dynamics with the policy held fixed.
Trajectory integrate_async(const GameSpec& spec, const SocialState& s0, double t_end, double h);

/// Clip-and-renormalize onto the social-state simplices in place; returns
/// the sup-norm of the correction.
double project_social_state(const GameSpec& spec, SocialState& s);

/// Linear interpolation of a trajectory at time t (clamped to its range).
SocialState interpolate(const Trajectory& traj, double t);

}  // namespace dynpop

#endif  // DYNPOP_DYNAMICS_HPP
