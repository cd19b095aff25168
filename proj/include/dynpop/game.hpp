#ifndef DYNPOP_GAME_HPP
#define DYNPOP_GAME_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dynpop/expr.hpp"
#include "dynpop/rng.hpp"
#include "dynpop/types.hpp"

namespace dynpop {

/// Transition and reward evaluators of a game. Implementations must be pure
/// functions of the social state.
class GameModel {
 public:
  virtual ~GameModel() = default;

  /// Writes p_tau[. | x, a](pi, d) into `out` (size n_x).
  virtual void transition_row(const SocialState& s, int tau, int x, int a, std::span<double> out) const = 0;
  virtual double reward(const SocialState& s, int tau, int x, int a) const = 0;

  /// Declarative source, when the model was built from expressions.
  virtual const class ExprTables* expressions() const { return nullptr; }
};

/// Expression form of a game: one optional Expr per transition entry and per
/// reward. An absent transition entry is 0 and an absent reward is 0.
class ExprTables {
 public:
  ExprTables() = default;
  explicit ExprTables(Dims dims);

  Dims dims() const { return dims_; }
  std::optional<Expr>& prob(int tau, int x, int a, int to) { return prob_[prob_index(tau, x, a, to)]; }
  const std::optional<Expr>& prob(int tau, int x, int a, int to) const { return prob_[prob_index(tau, x, a, to)]; }
  std::optional<Expr>& reward(int tau, int x, int a) { return reward_[reward_index(tau, x, a)]; }
  const std::optional<Expr>& reward(int tau, int x, int a) const { return reward_[reward_index(tau, x, a)]; }

  bool operator==(const ExprTables&) const = default;

 private:
  std::size_t prob_index(int tau, int x, int a, int to) const {
    return ((static_cast<std::size_t>(tau) * dims_.states + x) * dims_.actions + a) * dims_.states + to;
  }
  std::size_t reward_index(int tau, int x, int a) const {
    return (static_cast<std::size_t>(tau) * dims_.states + x) * dims_.actions + a;
  }
  Dims dims_;
  std::vector<std::optional<Expr>> prob_;
  std::vector<std::optional<Expr>> reward_;
};

/// Immutable definition of a dynamic population game.
class GameSpec {
 public:
  /// Throws SpecError if any structural invariant fails: dimensions, type
  /// masses on the simplex, discounts in [0,1), positive rates, and at least
  /// one allowed action per type-state.
  GameSpec(Dims dims, ActionMask mask, Vector type_mass, Vector discount, Vector rate,
           std::shared_ptr<const GameModel> model, std::string name = {});

  /// Builds a GameSpec whose model interprets `tables`. References are
  /// checked against `dims` and `mask` (IndexError).
  static GameSpec from_expressions(Dims dims, ActionMask mask, Vector type_mass, Vector discount, Vector rate,
                                   ExprTables tables, std::string name = {});

  Dims dims() const { return dims_; }
  int types() const { return dims_.types; }
  int states() const { return dims_.states; }
  int actions() const { return dims_.actions; }
  const ActionMask& mask() const { return mask_; }
  bool allowed(int tau, int x, int a) const { return mask_.allowed(tau, x, a); }
  const Vector& type_mass() const { return type_mass_; }
  const Vector& discount() const { return discount_; }
  const Vector& rate() const { return rate_; }
  const GameModel& model() const { return *model_; }
  const ExprTables* expressions() const { return model_->expressions(); }
  const std::string& name() const { return name_; }

  /// Copy with a different discount / rate vector (CLI overrides, sweeps).
  GameSpec with_discount(Vector discount) const;
  GameSpec with_rate(Vector rate) const;
  GameSpec with_name(std::string name) const;

  /// Transition row with the accepted tolerance applied: entries in
  /// [-1e-12, 0) clip to 0 and a row whose sum is within 1e-9 of 1 is
  /// renormalized. Anything else throws EvalError naming (tau, x, a).
  void transition_row(const SocialState& s, int tau, int x, int a, std::span<double> out) const;
  /// Throws EvalError naming (tau, x, a) on a non-finite value.
  double reward(const SocialState& s, int tau, int x, int a) const;

 private:
  Dims dims_;
  ActionMask mask_;
  Vector type_mass_;
  Vector discount_;
  Vector rate_;
  std::shared_ptr<const GameModel> model_;
  std::string name_;
};

inline constexpr double kRowSumTolerance = 1e-9;
inline constexpr double kNegativeClip = 1e-12;

struct Violation {
  enum class Kind { RowSum, NegativeProbability, NonFiniteProbability, NonFiniteReward };
  Kind kind;
  int sample;
  int tau;
  int x;
  int a;
  int to;  // -1 unless the violation concerns one entry
  double value;

  std::string describe() const;
};

struct ValidationReport {
  int samples = 0;
  std::vector<Violation> violations;

  bool valid() const { return violations.empty(); }
};

/// Evaluates every allowed transition row and reward at `samples` uniformly
/// random social states and lists well-formedness violations.
/// Evaluator failures propagate as EvalError with the offending (tau, x, a).
ValidationReport validate_spec(const GameSpec& spec, int samples, std::uint64_t seed);

/// Uniform policy over allowed actions and d_tau uniform over states scaled to g_tau.
SocialState uniform_social_state(const GameSpec& spec);

/// Policy rows and state distributions drawn uniformly from their simplices.
SocialState random_social_state(const GameSpec& spec, Rng& rng);

/// Throws SpecError if `s` has the wrong shape or breaks a Policy /
/// StateDistribution invariant beyond `tol`.
void check_social_state(const GameSpec& spec, const SocialState& s, double tol = 1e-9);

/// Zero-filled tables of the right shape.
SocialState zero_social_state(const GameSpec& spec);

}  // namespace dynpop

#endif  // DYNPOP_GAME_HPP
