#include "dynpop/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dynpop/dynamics.hpp"
#include "dynpop/equilibrium.hpp"
#include "dynpop/error.hpp"
#include "dynpop/mdp.hpp"

namespace dynpop {

ClassicalGame::ClassicalGame(GameSpec spec) : spec_(std::move(spec)) {
  for (int t = 0; t < spec_.types(); ++t)
    for (int x = 0; x < spec_.states(); ++x)
      populations_.push_back({"policy(" + std::to_string(t) + "," + std::to_string(x) + ")", t, x, 1.0,
                              spec_.mask().actions(t, x)});
  for (int t = 0; t < spec_.types(); ++t) {
    std::vector<int> states(static_cast<std::size_t>(spec_.states()));
    for (int x = 0; x < spec_.states(); ++x) states[x] = x;
    populations_.push_back({"state(" + std::to_string(t) + ")", t, -1, spec_.type_mass()(t), std::move(states)});
  }
}

Profile ClassicalGame::encode(const SocialState& s) const {
  Profile chi;
  for (const Population& p : populations_) {
    Vector v(static_cast<int>(p.strategies.size()));
    for (std::size_t i = 0; i < p.strategies.size(); ++i)
      v(static_cast<int>(i)) = p.is_state_population() ? s.d.mass[p.tau](p.strategies[i])
                                                       : s.pi.table[p.tau](p.x, p.strategies[i]);
    chi.push_back(std::move(v));
  }
  return chi;
}

SocialState ClassicalGame::decode(const Profile& chi) const {
  SocialState s = zero_social_state(spec_);
  for (std::size_t r = 0; r < populations_.size(); ++r) {
    const Population& p = populations_[r];
    for (std::size_t i = 0; i < p.strategies.size(); ++i) {
      double v = chi[r](static_cast<int>(i));
      if (p.is_state_population())
        s.d.mass[p.tau](p.strategies[i]) = v;
      else
        s.pi.table[p.tau](p.x, p.strategies[i]) = v;
    }
  }
  return s;
}

Profile ClassicalGame::payoffs(const Profile& chi) const {
  SocialState s = decode(chi);
  MdpView view = mdp_view(spec_, s);
  std::vector<Vector> W = async_field(spec_, s, view.P);
  Profile F;
  for (const Population& p : populations_) {
    Vector v(static_cast<int>(p.strategies.size()));
    for (std::size_t i = 0; i < p.strategies.size(); ++i)
      v(static_cast<int>(i)) = p.is_state_population() ? W[p.tau](p.strategies[i]) : view.Q[p.tau](p.x, p.strategies[i]);
    F.push_back(std::move(v));
  }
  return F;
}

ClassicalGame reduce(const GameSpec& spec) { return ClassicalGame(spec); }

NashResidual classical_nash_residual(const ClassicalGame& cg, const Profile& chi) {
  Profile F = cg.payoffs(chi);
  NashResidual r;
  r.policy_populations = r.state_populations = r.total = -1e300;
  for (std::size_t k = 0; k < F.size(); ++k) {
    const Population& p = cg.populations()[k];
    double gap = p.mass * F[k].maxCoeff() - chi[k].dot(F[k]);
    double& slot = p.is_state_population() ? r.state_populations : r.policy_populations;
    slot = std::max(slot, gap);
    r.total = std::max(r.total, gap);
  }
  return r;
}

StateRate classical_mean_dynamics(const ClassicalGame& cg, const Profile& chi, const EvolutionConfig& cfg) {
  Profile F = cg.payoffs(chi);
  SocialState s = cg.decode(chi);
  StateRate rate = StateRate::zeros_like(s);
  const RevisionProtocol state_protocol = RevisionProtocol::projection();
  for (std::size_t k = 0; k < F.size(); ++k) {
    const Population& p = cg.populations()[k];
    if (p.is_state_population()) {
      Vector H = mean_dynamic(state_protocol, F[k], chi[k], cfg.tie_tol, p.mass);
      for (std::size_t i = 0; i < p.strategies.size(); ++i) rate.d[p.tau](p.strategies[i]) = H(static_cast<int>(i));
    } else {
      Vector H = cfg.eta(p.tau) * mean_dynamic(cfg.protocol[p.tau], F[k], chi[k], cfg.tie_tol, p.mass);
      for (std::size_t i = 0; i < p.strategies.size(); ++i)
        rate.pi[p.tau](p.x, p.strategies[i]) = H(static_cast<int>(i));
    }
  }
  return rate;
}

EquivalenceReport equivalence_crosscheck(const GameSpec& spec, const SocialState& s, double tol) {
  ClassicalGame cg(spec);
  Profile chi = cg.encode(s);
  NashResidual nash = classical_nash_residual(cg, chi);
  MdpView view = mdp_view(spec, s);
  Residuals dyn = residuals(view, s);

  EquivalenceReport rep;
  rep.classical = nash.total;
  rep.classical_policy = nash.policy_populations;
  rep.classical_state = nash.state_populations;
  rep.residual_pi = dyn.pi;
  rep.residual_d = dyn.d;
  rep.classical_zero = nash.total < tol;
  rep.dynamic_zero = dyn.max() < tol;
  rep.worst_inner_product = -1e300;
  bool any_drift = false;
  for (int t = 0; t < spec.types(); ++t) {
    const Vector& d = s.d.mass[t];
    Vector deviation = (d.transpose() * view.P[t]).transpose();  // sigma' = d P
    Vector drift = deviation - d;
    double inner = drift.dot(d - deviation);
    rep.inner_product_error = std::max(rep.inner_product_error, std::abs(inner + drift.squaredNorm()));
    if (drift.cwiseAbs().maxCoeff() > tol) {
      any_drift = true;
      rep.worst_inner_product = std::max(rep.worst_inner_product, inner);
    }
  }
  if (!any_drift) rep.worst_inner_product = 0.0;

  auto fail = [&](const std::string& why) {
    std::ostringstream msg;
    msg.precision(17);
    msg << why << ": classical residual " << rep.classical << ", residual_pi " << rep.residual_pi << ", residual_d "
        << rep.residual_d;
    throw EquivalenceViolation(msg.str());
  };
  if (std::abs(rep.classical_policy - rep.residual_pi) > 1e-10)
    fail("policy-population residual differs from residual_pi");
  if (!rep.agree()) fail("equilibrium notions disagree");
  if (any_drift && !(rep.worst_inner_product < 0.0)) fail("deviation to d P does not improve the state payoff");
  return rep;
}

}  // namespace dynpop
