#include "dynpop/mdp.hpp"

#include <cmath>

#include "dynpop/error.hpp"

namespace dynpop {

Matrix TypeMdp::stochastic_matrix(const Matrix& policy) const {
  Matrix P = Matrix::Zero(states, states);
  for (int x = 0; x < states; ++x)
    for (int a : allowed[x]) P.row(x) += policy(x, a) * transition(x, a);
  return P;
}

Vector TypeMdp::expected_rewards(const Matrix& policy) const {
  Vector R = Vector::Zero(states);
  for (int x = 0; x < states; ++x)
    for (int a : allowed[x]) R(x) += policy(x, a) * rewards(x, a);
  return R;
}

Vector TypeMdp::values(const Matrix& policy) const {
  Matrix A = Matrix::Identity(states, states) - discount * stochastic_matrix(policy);
  Eigen::PartialPivLU<Matrix> lu(A);
  Vector V = lu.solve(expected_rewards(policy));
  if (!V.allFinite()) throw NumericalError("value function solve produced non-finite values");
  return V;
}

Matrix TypeMdp::q_values(const Vector& V) const {
  Matrix Q = Matrix::Constant(states, actions, kMaskedQ);
  for (int x = 0; x < states; ++x)
    for (int a : allowed[x]) Q(x, a) = rewards(x, a) + discount * transition(x, a).dot(V);
  return Q;
}

TypeMdp freeze_type(const GameSpec& spec, const SocialState& s, int tau) {
  TypeMdp m;
  m.states = spec.states();
  m.actions = spec.actions();
  m.discount = spec.discount()(tau);
  m.transitions = Matrix::Zero(m.states * m.actions, m.states);
  m.rewards = Matrix::Zero(m.states, m.actions);
  m.allowed.resize(static_cast<std::size_t>(m.states));
  std::vector<double> row(static_cast<std::size_t>(m.states));
  for (int x = 0; x < m.states; ++x) {
    m.allowed[x] = spec.mask().actions(tau, x);
    for (int a : m.allowed[x]) {
      spec.transition_row(s, tau, x, a, row);
      for (int y = 0; y < m.states; ++y) m.transitions(x * m.actions + a, y) = row[static_cast<std::size_t>(y)];
      m.rewards(x, a) = spec.reward(s, tau, x, a);
    }
  }
  return m;
}

std::vector<TypeMdp> freeze(const GameSpec& spec, const SocialState& s) {
  std::vector<TypeMdp> out;
  out.reserve(static_cast<std::size_t>(spec.types()));
  for (int t = 0; t < spec.types(); ++t) out.push_back(freeze_type(spec, s, t));
  return out;
}

MdpView mdp_view(const GameSpec& spec, const SocialState& s) {
  MdpView view;
  for (int t = 0; t < spec.types(); ++t) {
    TypeMdp m = freeze_type(spec, s, t);
    const Matrix& pi = s.pi.table[t];
    view.P.push_back(m.stochastic_matrix(pi));
    view.R.push_back(m.expected_rewards(pi));
    view.V.push_back(m.values(pi));
    view.Q.push_back(m.q_values(view.V.back()));
  }
  return view;
}

std::vector<Matrix> stochastic_matrix(const GameSpec& spec, const SocialState& s) {
  std::vector<Matrix> out;
  std::vector<double> row(static_cast<std::size_t>(spec.states()));
  for (int t = 0; t < spec.types(); ++t) {
    Matrix P = Matrix::Zero(spec.states(), spec.states());
    for (int x = 0; x < spec.states(); ++x)
      for (int a = 0; a < spec.actions(); ++a) {
        if (!spec.allowed(t, x, a)) continue;
        double w = s.pi.table[t](x, a);
        if (w == 0.0) continue;
        spec.transition_row(s, t, x, a, row);
        for (int y = 0; y < spec.states(); ++y) P(x, y) += w * row[static_cast<std::size_t>(y)];
      }
    out.push_back(std::move(P));
  }
  return out;
}

std::vector<Vector> expected_rewards(const GameSpec& spec, const SocialState& s) { return mdp_view(spec, s).R; }
std::vector<Vector> value_function(const GameSpec& spec, const SocialState& s) { return mdp_view(spec, s).V; }
std::vector<Matrix> q_values(const GameSpec& spec, const SocialState& s) { return mdp_view(spec, s).Q; }

double policy_average(const Matrix& policy, const Matrix& Q, int x) {
  double sum = 0.0;
  for (int a = 0; a < Q.cols(); ++a)
    if (Q(x, a) != kMaskedQ) sum += policy(x, a) * Q(x, a);
  return sum;
}

Vector best_response_row(const Eigen::Ref<const Vector>& payoff, double tie_tol) {
  double best = kMaskedQ;
  for (int a = 0; a < payoff.size(); ++a) best = std::max(best, payoff(a));
  Vector out = Vector::Zero(payoff.size());
  int count = 0;
  for (int a = 0; a < payoff.size(); ++a)
    if (payoff(a) != kMaskedQ && payoff(a) >= best - tie_tol) {
      out(a) = 1.0;
      ++count;
    }
  return out / count;
}

Vector logit_row(const Eigen::Ref<const Vector>& payoff, double temperature) {
  double best = kMaskedQ;
  for (int a = 0; a < payoff.size(); ++a) best = std::max(best, payoff(a));
  Vector out = Vector::Zero(payoff.size());
  double total = 0.0;
  for (int a = 0; a < payoff.size(); ++a) {
    if (payoff(a) == kMaskedQ) continue;
    out(a) = std::exp((payoff(a) - best) / temperature);
    total += out(a);
  }
  return out / total;
}

BestResponseSet best_response(const std::vector<Matrix>& Q, double tie_tol) {
  BestResponseSet br;
  for (const Matrix& q : Q) {
    Matrix dist = Matrix::Zero(q.rows(), q.cols());
    std::vector<std::vector<int>> members(static_cast<std::size_t>(q.rows()));
    for (int x = 0; x < q.rows(); ++x) {
      Vector row = best_response_row(q.row(x).transpose(), tie_tol);
      dist.row(x) = row.transpose();
      for (int a = 0; a < q.cols(); ++a)
        if (row(a) > 0.0) members[x].push_back(a);
    }
    br.members.push_back(std::move(members));
    br.distribution.push_back(std::move(dist));
  }
  return br;
}

BestResponseSet best_response(const GameSpec& spec, const SocialState& s, double tie_tol) {
  return best_response(q_values(spec, s), tie_tol);
}

PolicyIterationResult policy_iteration(const TypeMdp& mdp, const Matrix& initial, int max_iters, double improve_tol) {
  auto greedy = [&](const Matrix& Q, int x) {
    int best = mdp.allowed[x].front();
    for (int a : mdp.allowed[x])
      if (Q(x, a) > Q(x, best)) best = a;
    return best;
  };
  Matrix policy = initial;
  int iterations = 0;
  Matrix Q;
  while (true) {
    Q = mdp.q_values(mdp.values(policy));
    bool improved = false;
    Matrix next = policy;
    for (int x = 0; x < mdp.states; ++x) {
      int a = greedy(Q, x);
      if (Q(x, a) > policy_average(policy, Q, x) + improve_tol) {
        next.row(x).setZero();
        next(x, a) = 1.0;
        improved = true;
      }
    }
    if (!improved) break;
    if (iterations == max_iters)
      throw CertificateError("policy iteration did not terminate within " + std::to_string(max_iters) + " steps");
    policy = std::move(next);
    ++iterations;
  }
  // Ties (and sub-tolerance gaps) resolved to the greedy action so the
  // returned policy is deterministic.
  PolicyIterationResult result;
  result.policy = Matrix::Zero(mdp.states, mdp.actions);
  for (int x = 0; x < mdp.states; ++x) result.policy(x, greedy(Q, x)) = 1.0;
  result.iterations = iterations;
  result.values = mdp.values(result.policy);
  return result;
}

std::vector<PolicyIterationResult> policy_iteration(const GameSpec& spec, const SocialState& frozen, int max_iters,
                                                    double improve_tol) {
  std::vector<PolicyIterationResult> out;
  for (int t = 0; t < spec.types(); ++t)
    out.push_back(policy_iteration(freeze_type(spec, frozen, t), frozen.pi.table[t], max_iters, improve_tol));
  return out;
}

}  // namespace dynpop
