#include "dynpop/evolution.hpp"

#include <algorithm>
#include <cmath>

#include "dynpop/equilibrium.hpp"
#include "dynpop/error.hpp"

namespace dynpop {

void RevisionProtocol::validate() const {
  if (kind == ProtocolKind::Logit && !(temperature > 0.0 && std::isfinite(temperature)))
    throw ConfigError("logit temperature must be positive");
  if (state_weighted && kind == ProtocolKind::Projection)
    throw ConfigError("state-weighted revision supports best-response, logit and replicator only");
}

std::string RevisionProtocol::name() const {
  std::string base;
  switch (kind) {
    case ProtocolKind::BestResponse: base = "best-response"; break;
    case ProtocolKind::Logit: base = "logit"; break;
    case ProtocolKind::Projection: base = "projection"; break;
    case ProtocolKind::Replicator: base = "replicator"; break;
  }
  return state_weighted ? "state-weighted-" + base : base;
}

ProtocolKind parse_protocol_kind(const std::string& text) {
  if (text == "br" || text == "best-response") return ProtocolKind::BestResponse;
  if (text == "logit") return ProtocolKind::Logit;
  if (text == "proj" || text == "projection") return ProtocolKind::Projection;
  if (text == "rep" || text == "replicator") return ProtocolKind::Replicator;
  throw ConfigError("unknown protocol '" + text + "'");
}

Vector tangent_cone_projection(const Vector& F, const Vector& chi) {
  const int n = static_cast<int>(F.size());
  std::vector<char> active(static_cast<std::size_t>(n), 1);
  Vector v = Vector::Zero(n);
  while (true) {
    double sum = 0.0;
    int count = 0;
    for (int a = 0; a < n; ++a)
      if (active[a]) {
        sum += F(a);
        ++count;
      }
    double mean = sum / count;
    v.setZero();
    for (int a = 0; a < n; ++a)
      if (active[a]) v(a) = F(a) - mean;
    bool dropped = false;
    for (int a = 0; a < n; ++a)
      if (active[a] && chi(a) <= 1e-12 && v(a) < 0.0) {
        active[a] = 0;
        dropped = true;
      }
    if (!dropped) return v;
  }
}

Vector mean_dynamic(const RevisionProtocol& protocol, const Vector& F, const Vector& chi, double tie_tol,
                    double mass) {
  switch (protocol.kind) {
    case ProtocolKind::BestResponse:
      return mass * best_response_row(F, tie_tol) - chi;
    case ProtocolKind::Logit:
      return mass * logit_row(F, protocol.temperature) - chi;
    case ProtocolKind::Projection:
      return tangent_cone_projection(F, chi);
    case ProtocolKind::Replicator: {
      double average = chi.dot(F) / mass;
      return chi.cwiseProduct(F - Vector::Constant(F.size(), average));
    }
  }
  return Vector::Zero(F.size());
}

EvolutionConfig EvolutionConfig::uniform(const GameSpec& spec, const RevisionProtocol& protocol, double eta) {
  EvolutionConfig cfg;
  cfg.eta = Vector::Constant(spec.types(), eta);
  cfg.protocol.assign(static_cast<std::size_t>(spec.types()), protocol);
  return cfg;
}

void EvolutionConfig::validate(const GameSpec& spec) const {
  if (eta.size() != spec.types() || static_cast<int>(protocol.size()) != spec.types())
    throw ConfigError("evolution config needs one eta and one protocol per type");
  for (int t = 0; t < spec.types(); ++t) {
    if (!(eta(t) > 0.0) || !std::isfinite(eta(t))) throw ConfigError("eta must be positive");
    protocol[t].validate();
    if (protocol[t].state_weighted && eta(t) > 1.0)
      throw ConfigError("state-weighted revision needs eta in (0, 1]");
    if (spec.type_mass()(t) <= 0.0)
      throw ConfigError("type " + std::to_string(t) + " has zero mass and cannot be revised");
  }
}

std::vector<std::string> EvolutionConfig::warnings(const GameSpec& spec) const {
  std::vector<std::string> out;
  for (int t = 0; t < spec.types() && t < eta.size(); ++t)
    if (!protocol[t].state_weighted && eta(t) > spec.rate()(t))
      out.push_back("eta[" + std::to_string(t) + "] exceeds delta[" + std::to_string(t) +
                    "]; policies revise faster than agents interact");
  return out;
}

double EvolutionConfig::fastest_rate(const GameSpec& spec) const {
  double r = spec.rate().maxCoeff();
  for (int t = 0; t < spec.types(); ++t)
    r = std::max(r, protocol[t].state_weighted ? spec.rate()(t) * eta(t) : eta(t));
  return r;
}

StateRate coupled_field(const GameSpec& spec, const SocialState& s, const EvolutionConfig& cfg) {
  MdpView view = mdp_view(spec, s);
  StateRate rate = StateRate::zeros_like(s);
  rate.d = async_field(spec, s, view.P);
  for (int t = 0; t < spec.types(); ++t) {
    double g = spec.type_mass()(t);
    if (g <= 0.0) throw ConfigError("type " + std::to_string(t) + " has zero mass and cannot be revised");
    const RevisionProtocol& protocol = cfg.protocol[t];
    for (int x = 0; x < spec.states(); ++x) {
      std::vector<int> acts = spec.mask().actions(t, x);
      int n = static_cast<int>(acts.size());
      Vector F(n), chi(n);
      for (int i = 0; i < n; ++i) {
        F(i) = view.Q[t](x, acts[i]);
        chi(i) = s.pi.table[t](x, acts[i]);
      }
      double scale = cfg.eta(t);
      if (protocol.state_weighted) scale *= spec.rate()(t) * s.d.mass[t](x) / g;
      Vector H = mean_dynamic(protocol, F, chi, cfg.tie_tol);
      for (int i = 0; i < n; ++i) rate.pi[t](x, acts[i]) = scale * H(i);
    }
  }
  return rate;
}

Trajectory evolve(const GameSpec& spec, const SocialState& s0, const EvolutionConfig& cfg, double t_end, double h) {
  cfg.validate(spec);
  VectorField field = [&](const SocialState& s) { return coupled_field(spec, s, cfg); };
  return integrate(spec, s0, field, t_end, h, cfg.fastest_rate(spec), "rk4-coupled");
}

StationarityCheck nash_stationarity_check(const GameSpec& spec, const SocialState& s, const EvolutionConfig& cfg,
                                          double tol) {
  StationarityCheck out;
  out.field_norm = coupled_field(spec, s, cfg).sup_norm();
  Residuals r = residuals(spec, s);
  out.residual = r.max();
  out.rest_point = out.field_norm < tol;
  out.equilibrium = out.residual < tol;
  out.flagged = std::any_of(cfg.protocol.begin(), cfg.protocol.end(), [](const RevisionProtocol& p) {
    return p.kind == ProtocolKind::Replicator || p.kind == ProtocolKind::Logit;
  });
  return out;
}

}  // namespace dynpop
