#ifndef DYNPOP_TYPES_HPP
#define DYNPOP_TYPES_HPP

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace dynpop {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Dims {
  int types = 0;
  int states = 0;
  int actions = 0;

  bool operator==(const Dims&) const = default;
};

/// Dense boolean table over (type, state, action); true means the action is
/// available in that type-state.
class ActionMask {
 public:
  ActionMask() = default;
  ActionMask(Dims dims, bool value)
      : dims_(dims), allowed_(static_cast<std::size_t>(dims.types) * dims.states * dims.actions, value) {}

  bool allowed(int tau, int x, int a) const { return allowed_[index(tau, x, a)] != 0; }
  void set(int tau, int x, int a, bool value) { allowed_[index(tau, x, a)] = value ? 1 : 0; }
  int count(int tau, int x) const {
    int n = 0;
    for (int a = 0; a < dims_.actions; ++a) n += allowed(tau, x, a) ? 1 : 0;
    return n;
  }
  /// Indices of the allowed actions at (tau, x), ascending.
  std::vector<int> actions(int tau, int x) const {
    std::vector<int> out;
    for (int a = 0; a < dims_.actions; ++a)
      if (allowed(tau, x, a)) out.push_back(a);
    return out;
  }
  Dims dims() const { return dims_; }

  bool operator==(const ActionMask&) const = default;

 private:
  std::size_t index(int tau, int x, int a) const {
    return (static_cast<std::size_t>(tau) * dims_.states + x) * dims_.actions + a;
  }
  Dims dims_;
  std::vector<char> allowed_;
};

/// Per-type policy tables; `table[tau](x, a)` is the probability of playing
/// `a` in state `x`. Masked slots hold exactly zero.
struct Policy {
  std::vector<Matrix> table;

  double operator()(int tau, int a, int x) const { return table[tau](x, a); }
};

/// Per-type state distributions; `mass[tau](x)` is the proportion of agents
/// of type `tau` in state `x`. Each vector sums to g_tau.
struct StateDistribution {
  std::vector<Vector> mass;

  double operator()(int tau, int x) const { return mass[tau](x); }
};

struct SocialState {
  Policy pi;
  StateDistribution d;
};

/// Time derivative (or any tangent vector) of a social state, laid out like
/// SocialState but without the probability invariants.
struct StateRate {
  std::vector<Matrix> pi;
  std::vector<Vector> d;

  static StateRate zeros_like(const SocialState& s);
  double sup_norm() const;
  double pi_sup_norm() const;
  double d_sup_norm() const;
};

/// s + h * rate, componentwise; no projection.
SocialState advance(const SocialState& s, const StateRate& rate, double h);

/// Largest absolute componentwise difference of two same-shaped states.
double sup_distance(const SocialState& a, const SocialState& b);

}  // namespace dynpop

#endif  // DYNPOP_TYPES_HPP
