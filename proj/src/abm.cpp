#include "dynpop/abm.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "dynpop/error.hpp"
#include "dynpop/io.hpp"
#include "dynpop/mdp.hpp"
#include "dynpop/parallel.hpp"
#include "dynpop/rng.hpp"

namespace dynpop {

std::vector<int> type_counts(const Vector& type_mass, int n) {
  const int types = static_cast<int>(type_mass.size());
  std::vector<int> counts(static_cast<std::size_t>(types));
  std::vector<std::pair<double, int>> remainders;
  int assigned = 0;
  for (int t = 0; t < types; ++t) {
    double exact = n * type_mass(t);
    if (exact < 1.0)
      throw ConfigError("n * g[" + std::to_string(t) + "] = " + format_number(exact) + " is below one agent");
    counts[t] = static_cast<int>(std::floor(exact));
    assigned += counts[t];
    remainders.push_back({exact - counts[t], t});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; assigned < n; ++k, ++assigned) ++counts[remainders[static_cast<std::size_t>(k % types)].second];
  return counts;
}

namespace {

// Largest-remainder split of `total` items by nonnegative weights.
std::vector<int> apportion(const Vector& weights, int total) {
  double sum = weights.sum();
  std::vector<int> out(static_cast<std::size_t>(weights.size()), 0);
  if (sum <= 0.0 || total == 0) {
    out[0] = total;
    return out;
  }
  std::vector<std::pair<double, int>> rem;
  int assigned = 0;
  for (int i = 0; i < weights.size(); ++i) {
    double exact = total * weights(i) / sum;
    out[i] = static_cast<int>(std::floor(exact));
    assigned += out[i];
    rem.push_back({exact - out[i], i});
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++out[rem[k % rem.size()].second];
  return out;
}

struct Event {
  double time;
  int agent;
  bool operator>(const Event& o) const { return time > o.time || (time == o.time && agent > o.agent); }
};

}  // namespace

void AbmConfig::validate(const GameSpec& spec, int n) const {
  if (n < 10) throw ConfigError("the agent-based simulation needs n >= 10");
  type_counts(spec.type_mass(), n);
  check_social_state(spec, initial);
  if (!(horizon >= 0.0)) throw ConfigError("horizon must be nonnegative");
  if (!(snapshot_interval > 0.0)) throw ConfigError("snapshot interval must be positive");
  if (mode == AbmMode::Revision) {
    if (eta.size() != spec.types() || static_cast<int>(protocol.size()) != spec.types())
      throw ConfigError("revision mode needs one eta and one protocol per type");
    for (int t = 0; t < spec.types(); ++t) {
      if (!(eta(t) > 0.0 && eta(t) <= 1.0)) throw ConfigError("revision probability eta must lie in (0, 1]");
      protocol[t].validate();
      if (protocol[t].kind != ProtocolKind::BestResponse && protocol[t].kind != ProtocolKind::Logit)
        throw ConfigError("agent-level switching supports best-response and logit protocols only");
    }
  }
}

Trajectory simulate(const GameSpec& spec, const AbmConfig& cfg, int n, std::uint64_t seed) {
  cfg.validate(spec, n);
  const int nx = spec.states();
  const int na = spec.actions();
  Rng rng(seed);
  std::vector<int> counts = type_counts(spec.type_mass(), n);

  std::vector<int> type(static_cast<std::size_t>(n));
  std::vector<int> state(static_cast<std::size_t>(n));
  std::vector<int> memory(static_cast<std::size_t>(n) * nx);
  // Counts behind the empirical state.
  std::vector<Vector> in_state(static_cast<std::size_t>(spec.types()));
  std::vector<Matrix> remembering(static_cast<std::size_t>(spec.types()));

  int id = 0;
  for (int t = 0; t < spec.types(); ++t) {
    in_state[t] = Vector::Zero(nx);
    remembering[t] = Matrix::Zero(nx, na);
    std::vector<int> per_state = apportion(cfg.initial.d.mass[t], counts[t]);
    for (int x = 0; x < nx; ++x)
      for (int k = 0; k < per_state[x]; ++k, ++id) {
        type[id] = t;
        state[id] = x;
        in_state[t](x) += 1;
      }
  }
  // State-only agents draw afresh from the reference policy at every
  // interaction, so the policy in play is the reference itself and no
  // memory is kept.
  const bool memoryless = cfg.mode == AbmMode::StateOnly;
  for (int i = 0; i < n && !memoryless; ++i)
    for (int x = 0; x < nx; ++x) {
      const Matrix& pi = cfg.initial.pi.table[type[i]];
      std::vector<double> w(static_cast<std::size_t>(na));
      for (int a = 0; a < na; ++a) w[a] = pi(x, a);
      int a = rng.categorical(w);
      memory[static_cast<std::size_t>(i) * nx + x] = a;
      remembering[type[i]](x, a) += 1;
    }

  SocialState emp = zero_social_state(spec);
  auto refresh_d = [&](int t, int x) { emp.d.mass[t](x) = in_state[t](x) / n; };
  auto refresh_pi = [&](int t, int x, int a) { emp.pi.table[t](x, a) = remembering[t](x, a) / counts[t]; };
  for (int t = 0; t < spec.types(); ++t)
    for (int x = 0; x < nx; ++x) {
      refresh_d(t, x);
      for (int a = 0; a < na; ++a) refresh_pi(t, x, a);
    }
  if (memoryless) emp.pi = cfg.initial.pi;

  Trajectory traj;
  traj.integrator = cfg.mode == AbmMode::StateOnly ? "abm-state" : "abm-revision";
  traj.step = cfg.snapshot_interval;
  traj.seed = seed;
  long snapshots = static_cast<long>(std::ceil(cfg.horizon / cfg.snapshot_interval - 1e-9));
  long next_snapshot = 0;
  auto snapshot_time = [&](long k) { return k == snapshots ? cfg.horizon : k * cfg.snapshot_interval; };
  auto record_until = [&](double t) {
    while (next_snapshot <= snapshots && snapshot_time(next_snapshot) <= t) {
      traj.times.push_back(snapshot_time(next_snapshot));
      traj.states.push_back(emp);
      ++next_snapshot;
    }
  };

  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue;
  for (int i = 0; i < n; ++i) queue.push({rng.exponential(spec.rate()(type[i])), i});

  std::vector<double> row(static_cast<std::size_t>(std::max(nx, na)));
  std::vector<double> weights(static_cast<std::size_t>(na));
  while (!queue.empty() && queue.top().time <= cfg.horizon) {
    Event ev = queue.top();
    queue.pop();
    record_until(ev.time);
    const int i = ev.agent, t = type[i], x = state[i];
    int a;
    if (memoryless) {
      for (int b = 0; b < na; ++b) weights[b] = cfg.initial.pi.table[t](x, b);
      a = rng.categorical(weights);
    } else {
      int& mem = memory[static_cast<std::size_t>(i) * nx + x];
      a = mem;
      if (rng.uniform() < cfg.eta(t)) {
        TypeMdp mdp = freeze_type(spec, emp, t);
        Matrix Q = mdp.q_values(mdp.values(emp.pi.table[t]));
        const RevisionProtocol& p = cfg.protocol[t];
        Vector zeta = p.kind == ProtocolKind::Logit ? logit_row(Q.row(x).transpose(), p.temperature)
                                                    : best_response_row(Q.row(x).transpose(), cfg.tie_tol);
        for (int b = 0; b < na; ++b) weights[b] = zeta(b);
        a = rng.categorical(weights);
      }
      if (a != mem) {
        remembering[t](x, mem) -= 1;
        remembering[t](x, a) += 1;
        refresh_pi(t, x, mem);
        refresh_pi(t, x, a);
        mem = a;
      }
    }
    std::span<double> out(row.data(), static_cast<std::size_t>(nx));
    spec.transition_row(emp, t, x, a, out);
    int next = rng.categorical(out);
    if (next != x) {
      in_state[t](x) -= 1;
      in_state[t](next) += 1;
      refresh_d(t, x);
      refresh_d(t, next);
      state[i] = next;
    }
    queue.push({ev.time + rng.exponential(spec.rate()(t)), i});
  }
  record_until(cfg.horizon);
  return traj;
}

double trajectory_error(const Trajectory& empirical, const Trajectory& reference) {
  double err = 0.0;
  for (std::size_t k = 0; k < empirical.size(); ++k)
    err = std::max(err, sup_distance(empirical.states[k], interpolate(reference, empirical.times[k])));
  return err;
}

StudyResult convergence_study(const GameSpec& spec, const AbmConfig& cfg, const std::vector<int>& n_list, int seeds,
                              std::uint64_t base_seed, const Trajectory& reference) {
  if (seeds < 1) throw ConfigError("seeds must be at least 1");
  if (n_list.empty()) throw ConfigError("study needs at least one n");
  for (int n : n_list) cfg.validate(spec, n);
  StudyResult study;
  study.n = n_list;
  for (int n : n_list)
    for (int k = 0; k < seeds; ++k) study.cells.push_back({n, k, derive_seed(base_seed, static_cast<std::uint64_t>(k)), 0.0});
  parallel_for(study.cells.size(), [&](std::size_t c) {
    StudyCell& cell = study.cells[c];
    cell.error = trajectory_error(simulate(spec, cfg, cell.n, cell.seed), reference);
  });
  for (std::size_t j = 0; j < n_list.size(); ++j) {
    double sum = 0.0;
    for (int k = 0; k < seeds; ++k) sum += study.cells[j * static_cast<std::size_t>(seeds) + k].error;
    study.mean_error.push_back(sum / seeds);
  }
  if (n_list.size() >= 2) {
    double mx = 0.0, my = 0.0;
    const double m = static_cast<double>(n_list.size());
    for (std::size_t j = 0; j < n_list.size(); ++j) {
      mx += std::log(static_cast<double>(n_list[j])) / m;
      my += std::log(study.mean_error[j]) / m;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t j = 0; j < n_list.size(); ++j) {
      double dx = std::log(static_cast<double>(n_list[j])) - mx;
      sxy += dx * (std::log(study.mean_error[j]) - my);
      sxx += dx * dx;
    }
    study.slope = sxy / sxx;
  }
  return study;
}

void write_study_csv(std::ostream& out, const StudyResult& study) {
  out << "n,seed,error\n";
  for (const StudyCell& c : study.cells) out << c.n << ',' << c.seed << ',' << format_number(c.error) << '\n';
  for (std::size_t j = 0; j < study.n.size(); ++j)
    out << study.n[j] << ",mean," << format_number(study.mean_error[j]) << '\n';
  out << "slope,," << format_number(study.slope) << '\n';
}

}  // namespace dynpop
