#include "dynpop/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "dynpop/error.hpp"
#include "dynpop/mdp.hpp"

namespace dynpop {

StateDistribution sync_step(const GameSpec& spec, const SocialState& s) {
  std::vector<Matrix> P = stochastic_matrix(spec, s);
  StateDistribution next;
  for (int t = 0; t < spec.types(); ++t) next.mass.push_back((s.d.mass[t].transpose() * P[t]).transpose());
  return next;
}

std::vector<Vector> async_field(const GameSpec& spec, const SocialState& s, const std::vector<Matrix>& P) {
  std::vector<Vector> W;
  for (int t = 0; t < spec.types(); ++t) {
    const Vector& d = s.d.mass[t];
    W.push_back(spec.rate()(t) * ((d.transpose() * P[t]).transpose() - d));
  }
  return W;
}

std::vector<Vector> async_field(const GameSpec& spec, const SocialState& s) {
  return async_field(spec, s, stochastic_matrix(spec, s));
}

double project_social_state(const GameSpec& spec, SocialState& s) {
  double correction = 0.0;
  auto fix = [&](auto&& v, double target) {
    Vector before = v;
    v = v.cwiseMax(0.0);
    double sum = v.sum();
    if (sum > 0.0)
      v *= target / sum;
    else
      v.setZero();
    correction = std::max(correction, (v - before).cwiseAbs().maxCoeff());
  };
  for (int t = 0; t < spec.types(); ++t) {
    fix(s.d.mass[t], spec.type_mass()(t));
    Matrix& pi = s.pi.table[t];
    for (int x = 0; x < spec.states(); ++x) {
      for (int a = 0; a < spec.actions(); ++a)
        if (!spec.allowed(t, x, a)) {
          correction = std::max(correction, std::abs(pi(x, a)));
          pi(x, a) = 0.0;
        }
      Vector row = pi.row(x).transpose();
      fix(row, 1.0);
      pi.row(x) = row.transpose();
    }
  }
  return correction;
}

Trajectory simulate_sync(const GameSpec& spec, const SocialState& s0, int steps) {
  if (steps < 0) throw ConfigError("step count must be nonnegative");
  Trajectory traj;
  traj.integrator = "sync";
  traj.step = 1.0;
  SocialState s = s0;
  traj.times.push_back(0.0);
  traj.states.push_back(s);
  for (int k = 1; k <= steps; ++k) {
    s.d = sync_step(spec, s);
    traj.max_correction = std::max(traj.max_correction, project_social_state(spec, s));
    traj.times.push_back(k);
    traj.states.push_back(s);
  }
  return traj;
}

double default_step(double fastest_rate) { return 0.01 / fastest_rate; }

namespace {

double min_entry(const SocialState& s) {
  double m = 0.0;
  for (const auto& p : s.pi.table)
    if (p.size()) m = std::min(m, p.minCoeff());
  for (const auto& d : s.d.mass)
    if (d.size()) m = std::min(m, d.minCoeff());
  return m;
}

SocialState rk4(const VectorField& field, const SocialState& s, double h) {
  StateRate k1 = field(s);
  StateRate k2 = field(advance(s, k1, h / 2));
  StateRate k3 = field(advance(s, k2, h / 2));
  StateRate k4 = field(advance(s, k3, h));
  SocialState out = s;
  for (std::size_t t = 0; t < out.pi.table.size(); ++t) {
    out.pi.table[t] += h / 6 * (k1.pi[t] + 2 * k2.pi[t] + 2 * k3.pi[t] + k4.pi[t]);
    out.d.mass[t] += h / 6 * (k1.d[t] + 2 * k2.d[t] + 2 * k3.d[t] + k4.d[t]);
  }
  return out;
}

// Past this depth the step is accepted and projected; the correction limit
// still applies.
constexpr int kMaxHalvingDepth = 10;

struct Stepper {
  const GameSpec& spec;
  const VectorField& field;
  Trajectory& traj;

  void step(SocialState& s, double h, int depth) {
    SocialState raw = rk4(field, s, h);
    if (min_entry(raw) < -kOvershootTolerance && depth < kMaxHalvingDepth) {
      ++traj.halvings;
      step(s, h / 2, depth + 1);
      step(s, h / 2, depth + 1);
      return;
    }
    double c = project_social_state(spec, raw);
    if (c > kCorrectionLimit)
      throw IntegrationError("renormalization correction " + std::to_string(c) +
                             " exceeds 1e-3; step size too large for these dynamics");
    traj.max_correction = std::max(traj.max_correction, c);
    s = std::move(raw);
  }
};

}  // namespace

Trajectory integrate(const GameSpec& spec, const SocialState& s0, const VectorField& field, double t_end, double h,
                     double fastest_rate, const std::string& name) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("step size must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be nonnegative");
  if (h * fastest_rate > kMaxStepRate + 1e-12)
    throw ConfigError("step size guard violated: h * max rate = " + std::to_string(h * fastest_rate) + " > 0.5");
  Trajectory traj;
  traj.integrator = name;
  traj.step = h;
  SocialState s = s0;
  traj.times.push_back(0.0);
  traj.states.push_back(s);
  long steps = static_cast<long>(std::ceil(t_end / h - 1e-9));
  Stepper stepper{spec, field, traj};
  for (long k = 1; k <= steps; ++k) {
    double t = k == steps ? t_end : static_cast<double>(k) * h;
    stepper.step(s, t - traj.times.back(), 0);
    traj.times.push_back(t);
    traj.states.push_back(s);
  }
  return traj;
}

Trajectory integrate_async(const GameSpec& spec, const SocialState& s0, double t_end, double h) {
  VectorField field = [&spec](const SocialState& s) {
    StateRate r = StateRate::zeros_like(s);
    r.d = async_field(spec, s);
    return r;
  };
  return integrate(spec, s0, field, t_end, h, spec.rate().maxCoeff(), "rk4-async");
}

SocialState interpolate(const Trajectory& traj, double t) {
  if (t <= traj.times.front()) return traj.states.front();
  if (t >= traj.times.back()) return traj.states.back();
  auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - traj.times.begin());
  std::size_t lo = hi - 1;
  double w = (t - traj.times[lo]) / (traj.times[hi] - traj.times[lo]);
  const SocialState& a = traj.states[lo];
  const SocialState& b = traj.states[hi];
  SocialState out = a;
  for (std::size_t k = 0; k < out.pi.table.size(); ++k) {
    out.pi.table[k] = (1 - w) * a.pi.table[k] + w * b.pi.table[k];
    out.d.mass[k] = (1 - w) * a.d.mass[k] + w * b.d.mass[k];
  }
  return out;
}

}  // namespace dynpop
