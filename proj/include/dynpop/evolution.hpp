#ifndef DYNPOP_EVOLUTION_HPP
#define DYNPOP_EVOLUTION_HPP

#include <string>
#include <vector>

#include "dynpop/dynamics.hpp"
#include "dynpop/game.hpp"
#include "dynpop/mdp.hpp"

namespace dynpop {

enum class ProtocolKind { BestResponse, Logit, Projection, Replicator };

struct RevisionProtocol {
  ProtocolKind kind = ProtocolKind::BestResponse;
  double temperature = 1.0;  // logit only
  // Policy revisions at a state happen only when an agent there interacts:
  // the policy field is scaled by delta * d[x] / g.
  bool state_weighted = false;

  static RevisionProtocol best_response() { return {ProtocolKind::BestResponse, 1.0, false}; }
  static RevisionProtocol logit(double temperature) { return {ProtocolKind::Logit, temperature, false}; }
  static RevisionProtocol projection() { return {ProtocolKind::Projection, 1.0, false}; }
  static RevisionProtocol replicator() { return {ProtocolKind::Replicator, 1.0, false}; }
  RevisionProtocol weighted() const {
    RevisionProtocol p = *this;
    p.state_weighted = true;
    return p;
  }

  /// Throws ConfigError for a non-positive temperature or a state-weighted
  /// projection protocol.
  void validate() const;
  std::string name() const;
};

/// Parses "br", "logit", "proj", "rep" (and the long names).
ProtocolKind parse_protocol_kind(const std::string& text);

/// Mean dynamic H of one population with mass `mass`, payoffs F and state
/// chi over the same support (no masked entries). H always sums to zero.
Vector mean_dynamic(const RevisionProtocol& protocol, const Vector& F, const Vector& chi,
                    double tie_tol = kDefaultTieTol, double mass = 1.0);

/// Euclidean projection of F onto the tangent cone of the simplex at chi.
/// Coordinates with chi <= 1e-12 count as on the boundary.
Vector tangent_cone_projection(const Vector& F, const Vector& chi);

struct EvolutionConfig {
  Vector eta;                               // per type, > 0
  std::vector<RevisionProtocol> protocol;   // per type
  double tie_tol = kDefaultTieTol;

  static EvolutionConfig uniform(const GameSpec& spec, const RevisionProtocol& protocol, double eta);

  /// Throws ConfigError on a bad shape, non-positive eta, an invalid
  /// protocol, eta > 1 for a state-weighted protocol, or a zero-mass type.
  void validate(const GameSpec& spec) const;
  /// Advisory messages, e.g. eta_tau > delta_tau.
  std::vector<std::string> warnings(const GameSpec& spec) const;
  /// Fastest clock of the coupled system, for the step-size guard.
  double fastest_rate(const GameSpec& spec) const;
};

/// (policy field, state field) of the coupled dynamics. The policy field
/// row at (tau, x) is eta_tau H_tau(Q_tau[x, .], pi_tau[. | x]) on allowed
/// actions, times delta_tau d_tau[x] / g_tau for state-weighted protocols;
/// the state field is the asynchronous field.
StateRate coupled_field(const GameSpec& spec, const SocialState& s, const EvolutionConfig& cfg);

/// Integrates the coupled system by RK4.
Trajectory evolve(const GameSpec& spec, const SocialState& s0, const EvolutionConfig& cfg, double t_end, double h);

struct StationarityCheck {
  bool rest_point = false;
  bool equilibrium = false;
  double field_norm = 0.0;
  double residual = 0.0;
  // Replicator rest points need not be equilibria; agreement is not implied.
  bool flagged = false;
};

/// rest_point: coupled field sup-norm < tol; equilibrium: both equilibrium
/// residuals < tol.
StationarityCheck nash_stationarity_check(const GameSpec& spec, const SocialState& s, const EvolutionConfig& cfg,
                                          double tol);

}  // namespace dynpop

#endif  // DYNPOP_EVOLUTION_HPP
