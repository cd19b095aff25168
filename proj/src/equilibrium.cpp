#include "dynpop/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include "dynpop/error.hpp"
#include "dynpop/parallel.hpp"

namespace dynpop {

Residuals residuals(const MdpView& view, const SocialState& s) {
  Residuals r;
  r.pi = -1e300;
  for (std::size_t t = 0; t < view.Q.size(); ++t) {
    const Matrix& Q = view.Q[t];
    for (int x = 0; x < Q.rows(); ++x) r.pi = std::max(r.pi, Q.row(x).maxCoeff() - policy_average(s.pi.table[t], Q, x));
    const Vector& d = s.d.mass[t];
    Vector drift = (d.transpose() * view.P[t]).transpose() - d;
    r.d = std::max(r.d, drift.cwiseAbs().maxCoeff());
  }
  return r;
}

Residuals residuals(const GameSpec& spec, const SocialState& s) { return residuals(mdp_view(spec, s), s); }

void SolveOptions::validate() const {
  if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  if (max_iters < 0) throw ConfigError("max_iters must be nonnegative");
  if (logit_temperature && !(*logit_temperature > 0.0)) throw ConfigError("logit temperature must be positive");
  if (tie_tol < 0.0) throw ConfigError("tie tolerance must be nonnegative");
}

namespace {

constexpr double kMinDamping = 1e-14;

struct Target {
  std::vector<Matrix> pi;
  std::vector<Vector> d;
};

Target target_of(const GameSpec& spec, const MdpView& view, const SocialState& s, const SolveOptions& o) {
  Target out;
  for (int t = 0; t < spec.types(); ++t) {
    Matrix pi = Matrix::Zero(spec.states(), spec.actions());
    for (int x = 0; x < spec.states(); ++x) {
      Vector row = o.logit_temperature ? logit_row(view.Q[t].row(x).transpose(), *o.logit_temperature)
                                       : best_response_row(view.Q[t].row(x).transpose(), o.tie_tol);
      pi.row(x) = row.transpose();
    }
    out.pi.push_back(std::move(pi));
    out.d.push_back((s.d.mass[t].transpose() * view.P[t]).transpose());
  }
  return out;
}

double distance(const Target& target, const SocialState& s) {
  double m = 0.0;
  for (std::size_t t = 0; t < target.pi.size(); ++t) {
    m = std::max(m, (target.pi[t] - s.pi.table[t]).cwiseAbs().maxCoeff());
    m = std::max(m, (target.d[t] - s.d.mass[t]).cwiseAbs().maxCoeff());
  }
  return m;
}

}  // namespace

EquilibriumReport solve(const GameSpec& spec, const SocialState& s0, const SolveOptions& o) {
  o.validate();
  check_social_state(spec, s0);
  EquilibriumReport report;
  SocialState s = s0;
  double lambda_pi = o.damping;
  const double lambda_d = o.damping;
  std::vector<double> history;
  bool stall_warned = false;
  for (int it = 0;; ++it) {
    MdpView view = mdp_view(spec, s);
    Residuals r = residuals(view, s);
    Target target = target_of(spec, view, s, o);
    double fp = distance(target, s);
    double merit = o.logit_temperature ? fp : r.max();
    report.residual = r;
    report.fixed_point_residual = fp;
    report.iterations = it;
    if (merit < o.tol) {
      report.converged = true;
      break;
    }
    if (it == o.max_iters) break;
    if (o.adaptive && !history.empty() && merit > history.back()) lambda_pi = std::max(lambda_pi * 0.5, kMinDamping);
    history.push_back(merit);
    std::size_t w = static_cast<std::size_t>(o.stall_window);
    if (!stall_warned && w > 0 && history.size() > w && history.back() >= history[history.size() - 1 - w]) {
      stall_warned = true;
      report.warnings.push_back("residual did not decrease over " + std::to_string(w) +
                                " iterations; consider logit smoothing");
    }
    for (int t = 0; t < spec.types(); ++t) {
      s.pi.table[t] = (1 - lambda_pi) * s.pi.table[t] + lambda_pi * target.pi[t];
      s.d.mass[t] = (1 - lambda_d) * s.d.mass[t] + lambda_d * target.d[t];
    }
  }
  report.state = std::move(s);
  report.final_damping = lambda_pi;
  return report;
}

Certificate certify(const GameSpec& spec, const SocialState& state, const CertifyOptions& o) {
  Certificate cert;
  cert.q_gap = -1e300;
  for (int t = 0; t < spec.types(); ++t) {
    TypeMdp mdp = freeze_type(spec, state, t);
    const Matrix& pi = state.pi.table[t];
    Vector V = mdp.values(pi);
    Matrix Q = mdp.q_values(V);
    for (int x = 0; x < spec.states(); ++x) {
      double gap = Q.row(x).maxCoeff() - policy_average(pi, Q, x);
      if (gap > cert.q_gap) {
        cert.q_gap = gap;
        cert.worst_tau = t;
        cert.worst_x = x;
      }
    }
    PolicyIterationResult pi_result = policy_iteration(mdp, pi, o.max_iters, o.improve_tol);
    cert.improvement_steps += pi_result.iterations;
    cert.value_gap = std::max(cert.value_gap, (pi_result.values - V).cwiseAbs().maxCoeff());
  }
  cert.pass = cert.improvement_steps == 0 && cert.value_gap <= o.value_tol;
  return cert;
}

RestartResult solve_restarts(const GameSpec& spec, const SolveOptions& options, int restarts, std::uint64_t seed,
                             double distinct_tol) {
  if (restarts < 1) throw ConfigError("restarts must be at least 1");
  RestartResult result;
  result.runs.resize(static_cast<std::size_t>(restarts));
  parallel_for(static_cast<std::size_t>(restarts), [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    result.runs[i] = solve(spec, random_social_state(spec, rng), options);
  });
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    if (!result.runs[i].converged) continue;
    bool fresh = std::all_of(result.distinct.begin(), result.distinct.end(), [&](std::size_t j) {
      return sup_distance(result.runs[i].state, result.runs[j].state) > distinct_tol;
    });
    if (fresh) result.distinct.push_back(i);
  }
  return result;
}

SocialState perturb_toward_worst(const GameSpec& spec, const SocialState& s, double mass) {
  std::vector<Matrix> Q = q_values(spec, s);
  SocialState out = s;
  for (int t = 0; t < spec.types(); ++t)
    for (int x = 0; x < spec.states(); ++x) {
      std::vector<int> acts = spec.mask().actions(t, x);
      if (acts.size() < 2) continue;
      int worst = acts.front();
      for (int a : acts)
        if (Q[t](x, a) < Q[t](x, worst)) worst = a;
      out.pi.table[t].row(x) *= 1 - mass;
      out.pi.table[t](x, worst) += mass;
    }
  return out;
}

}  // namespace dynpop
