// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance <goldens-dir> [criterion...]
//
// With DYNPOP_REGENERATE_GOLDENS=1 the parser goldens are rewritten from
// the current output instead of compared.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dynpop/abm.hpp"
#include "dynpop/builtin_games.hpp"
#include "dynpop/dynamics.hpp"
#include "dynpop/equilibrium.hpp"
#include "dynpop/error.hpp"
#include "dynpop/evolution.hpp"
#include "dynpop/expr.hpp"
#include "dynpop/game_file.hpp"
#include "dynpop/io.hpp"
#include "dynpop/mdp.hpp"
#include "dynpop/parallel.hpp"
#include "dynpop/reduction.hpp"
#include "oracles.hpp"
#include "random_games.hpp"

using namespace dynpop;
using namespace dynpop::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// 1. Simplex invariance of synchronous and asynchronous trajectories.
Outcome simplex_invariance() {
  auto start = Clock::now();
  constexpr int kGames = 1000;
  std::vector<double> worst_violation(kGames, 0.0), worst_correction(kGames, 0.0);
  std::vector<std::string> failures(kGames);
  parallel_for(kGames, [&](std::size_t k) {
    Rng rng(derive_seed(1001, k));
    GameSpec spec = random_game(rng);
    SocialState s0 = random_social_state(spec, rng);
    auto violation = [&](const SocialState& s) {
      double v = 0.0;
      for (int t = 0; t < spec.types(); ++t) {
        v = std::max(v, std::abs(s.d.mass[t].sum() - spec.type_mass()(t)));
        v = std::max(v, -s.d.mass[t].minCoeff());
        for (int x = 0; x < spec.states(); ++x) v = std::max(v, std::abs(s.pi.table[t].row(x).sum() - 1.0));
      }
      return v;
    };
    try {
      Trajectory sync = simulate_sync(spec, s0, 500);
      Trajectory async = integrate_async(spec, s0, 20.0, default_step(spec.rate().maxCoeff()));
      for (const Trajectory* traj : {&sync, &async}) {
        worst_correction[k] = std::max(worst_correction[k], traj->max_correction);
        for (const SocialState& s : traj->states) worst_violation[k] = std::max(worst_violation[k], violation(s));
      }
    } catch (const Error& e) {
      failures[k] = e.what();
    }
  });
  double violation = *std::max_element(worst_violation.begin(), worst_violation.end());
  double correction = *std::max_element(worst_correction.begin(), worst_correction.end());
  int errors = static_cast<int>(std::count_if(failures.begin(), failures.end(), [](auto& f) { return !f.empty(); }));
  double elapsed = seconds_since(start);
  Outcome o;
  o.pass = errors == 0 && violation <= 1e-9 && correction < 1e-6 && elapsed < 120.0;
  o.detail = "1000 games, max simplex violation " + num(violation) + ", max correction " + num(correction) +
             ", errors " + std::to_string(errors) + ", " + num(elapsed) + "s";
  return o;
}

// 2. Linear-solve values against Bellman iteration; policy iteration against
// exhaustive search.
Outcome mdp_oracles() {
  auto start = Clock::now();
  double value_gap = 0.0;
  for (int k = 0; k < 200; ++k) {
    Rng rng(derive_seed(2002, k));
    GameSpec spec = random_game(rng);
    SocialState s = random_social_state(spec, rng);
    std::vector<Vector> V = value_function(spec, s);
    for (int t = 0; t < spec.types(); ++t) {
      FrozenTables m = frozen_tables(spec, s, t);
      auto ref = bellman_iteration(summed_matrix(m, s.pi.table[t]), summed_rewards(m, s.pi.table[t]), m.discount);
      for (int x = 0; x < spec.states(); ++x) value_gap = std::max(value_gap, std::abs(V[t](x) - ref[x]));
    }
  }
  double pi_gap = 0.0;
  int checked = 0;
  for (int k = 0; checked < 200; ++k) {
    Rng rng(derive_seed(2003, k));
    // Every other game is a full 4-state, 3-action MDP with 81 policies.
    RandomGameShape shape;
    if (k % 2 == 0) {
      shape.types = 1;
      shape.states = 4;
      shape.actions = 3;
      shape.allow_probability = 1.0;
    }
    GameSpec spec = random_game(rng, shape);
    SocialState s = random_social_state(spec, rng);
    for (int t = 0; t < spec.types(); ++t) {
      long policies = 1;
      for (int x = 0; x < spec.states(); ++x) policies *= spec.mask().count(t, x);
      if (policies > 81) continue;
      int count = 0;
      auto best = enumerate_deterministic(frozen_tables(spec, s, t), &count);
      PolicyIterationResult res = policy_iteration(freeze_type(spec, s, t), s.pi.table[t]);
      for (int x = 0; x < spec.states(); ++x) pi_gap = std::max(pi_gap, std::abs(res.values(x) - best[x]));
      ++checked;
    }
  }
  double elapsed = seconds_since(start);
  Outcome o;
  o.pass = value_gap <= 1e-8 && pi_gap <= 1e-9 && elapsed < 60.0;
  o.detail = "200 MDPs, value gap " + num(value_gap) + "; " + std::to_string(checked) +
             " enumerations, policy-iteration gap " + num(pi_gap) + ", " + num(elapsed) + "s";
  return o;
}

// 3. Certificates pass at solved equilibria and fail after a perturbation.
Outcome certificate_soundness() {
  std::vector<std::pair<std::string, GameSpec>> games;
  for (const auto& name : builtin_names()) games.emplace_back(name, builtin_game(name));
  for (int k = 0; k < 50; ++k) {
    Rng rng(derive_seed(3003, k));
    RandomGameShape shape;
    shape.actions = 2 + k % 2;
    games.emplace_back("random " + std::to_string(k), random_game(rng, shape));
  }
  int converged = 0, certified = 0, perturbed = 0, broken = 0, untouched = 0;
  std::string first_failure;
  for (auto& [name, spec] : games) {
    EquilibriumReport r = solve(spec, uniform_social_state(spec));
    if (!r.converged) continue;
    ++converged;
    Certificate c = certify(spec, r.state);
    if (c.pass && c.improvement_steps == 0)
      ++certified;
    else if (first_failure.empty())
      first_failure = name + " failed certification";
    SocialState p = perturb_toward_worst(spec, r.state);
    if (sup_distance(p, r.state) == 0.0) {
      ++untouched;  // every row has a single allowed action
      continue;
    }
    ++perturbed;
    Certificate pc = certify(spec, p);
    if (!pc.pass && pc.q_gap > 0.0)
      ++broken;
    else if (first_failure.empty())
      first_failure = name + " passed after perturbation";
  }
  Outcome o;
  o.pass = converged == certified && perturbed == broken && converged >= 40;
  o.detail = std::to_string(converged) + "/" + std::to_string(games.size()) + " converged, " + std::to_string(certified) + " certified, " +
             std::to_string(broken) + "/" + std::to_string(perturbed) + " perturbations rejected (" +
             std::to_string(untouched) + " without a choice)";
  if (!first_failure.empty()) o.detail += "; " + first_failure;
  return o;
}

// 4. Dynamic and classical equilibrium residuals agree.
Outcome reduction_crosscheck() {
  int states = 0, disagreements = 0;
  double inner = 0.0, policy_gap = 0.0;
  std::string first;
  for (const auto& name : builtin_names()) {
    GameSpec spec = builtin_game(name);
    Rng rng(derive_seed(4004, std::hash<std::string>{}(name) % 1000));
    std::vector<SocialState> samples;
    for (int k = 0; k < 1000; ++k) samples.push_back(random_social_state(spec, rng));
    EquilibriumReport eq = solve(spec, uniform_social_state(spec));
    if (eq.converged) samples.push_back(eq.state);
    for (const SocialState& s : samples) {
      ++states;
      try {
        EquivalenceReport rep = equivalence_crosscheck(spec, s, 1e-6);
        inner = std::max(inner, rep.inner_product_error);
        policy_gap = std::max(policy_gap, std::abs(rep.classical_policy - rep.residual_pi));
      } catch (const EquivalenceViolation& e) {
        ++disagreements;
        if (first.empty()) first = name + ": " + e.what();
      }
    }
  }
  Outcome o;
  o.pass = disagreements == 0 && inner <= 1e-12;
  o.detail = std::to_string(states) + " states, " + std::to_string(disagreements) + " disagreements, inner-product error " +
             num(inner) + ", policy residual gap " + num(policy_gap);
  if (!first.empty()) o.detail += "; " + first;
  return o;
}

// 5. Rest points of the coupled dynamics are equilibria.
Outcome nash_stationarity() {
  GameSpec hdh = hawk_dove_hunger();
  int runs = 0, reached = 0, bad_rest = 0;
  double worst_final_residual = 0.0;
  for (const auto& protocol : {RevisionProtocol::best_response(), RevisionProtocol::projection()}) {
    EvolutionConfig cfg = EvolutionConfig::uniform(hdh, protocol, 0.5);
    for (int k = 0; k < 20; ++k) {
      Rng rng(derive_seed(5005, k));
      Trajectory traj = evolve(hdh, random_social_state(hdh, rng), cfg, 100.0, default_step(cfg.fastest_rate(hdh)));
      ++runs;
      bool hit = false;
      for (const SocialState& s : traj.states) {
        StationarityCheck c = nash_stationarity_check(hdh, s, cfg, 1e-8);
        if (!c.rest_point) continue;
        hit = true;
        if (c.residual >= 1e-6) ++bad_rest;
      }
      if (hit) ++reached;
      worst_final_residual = std::max(worst_final_residual, residuals(hdh, traj.back()).max());
    }
  }
  // All-dove with the state distribution held at its stationary point.
  SocialState dove = uniform_social_state(hdh);
  for (int x = 0; x < 2; ++x) dove.pi.table[0].row(x) << 0.0, 1.0;
  for (int k = 0; k < 10000; ++k) dove.d = sync_step(hdh, dove);
  StationarityCheck vertex =
      nash_stationarity_check(hdh, dove, EvolutionConfig::uniform(hdh, RevisionProtocol::replicator(), 0.5), 1e-8);
  Outcome o;
  o.pass = bad_rest == 0 && reached == runs && vertex.rest_point && !vertex.equilibrium;
  o.detail = std::to_string(reached) + "/" + std::to_string(runs) + " runs reached field < 1e-8, " +
             std::to_string(bad_rest) + " rest snapshots off equilibrium, worst final residual " +
             num(worst_final_residual) + "; replicator vertex rest=" + (vertex.rest_point ? "true" : "false") +
             " equilibrium=" + (vertex.equilibrium ? "true" : "false") + " (residual " + num(vertex.residual) + ")";
  return o;
}

// 6. Periodic swap: closed-form relaxation and period-2 oscillation.
Outcome analytic_swap() {
  GameSpec swap = periodic_swap();
  SocialState s0 = uniform_social_state(swap);
  s0.d.mass[0] << 1.0, 0.0;
  Trajectory traj = integrate_async(swap, s0, 3.0, 0.01);
  double err = 0.0;
  for (double t : {1.0, 2.0, 3.0})
    err = std::max(err, std::abs(interpolate(traj, t).d.mass[0](0) - swap_mass_state0(1.0, 1.0, t)));
  Trajectory sync = simulate_sync(swap, s0, 1000);
  bool period_two = true, never_settles = true;
  for (std::size_t k = 0; k + 2 < sync.size(); ++k)
    period_two = period_two && sync_step(swap, sync.states[k]).mass[0] == sync.states[k + 1].d.mass[0] &&
                 sync.states[k].d.mass[0] == sync.states[k + 2].d.mass[0];
  for (std::size_t k = 0; k + 1 < sync.size(); ++k)
    never_settles = never_settles && sup_distance(sync.states[k], sync.states[k + 1]) == 1.0;
  Outcome o;
  o.pass = err <= 1e-4 && period_two && never_settles && sync.size() == 1001;
  o.detail = "async error " + num(err) + " at t=1,2,3; sync period 2 " + (period_two ? "exact" : "broken") +
             ", step-to-step distance " + (never_settles ? "always 1" : "not constant") + " over 1000 steps";
  return o;
}

// 7. Singleton hawk-dove mixed equilibrium.
Outcome classical_embedding() {
  GameSpec hd = singleton_hawk_dove(2.0, 3.0);
  SolveOptions opt;
  opt.logit_temperature = 1e-3;
  EquilibriumReport r = solve(hd, uniform_social_state(hd), opt);
  double grid = hawk_dove_grid_share(2.0, 3.0);
  double share = r.state.pi.table[0](0, 0);
  Outcome o;
  o.pass = r.converged && std::abs(share - grid) <= 1e-3 && std::abs(share - 2.0 / 3.0) <= 1e-3;
  o.detail = "hawk share " + num(share) + " (grid " + num(grid) + ", exact 2/3), " + std::to_string(r.iterations) +
             " iterations";
  return o;
}

// 8. Agent-based simulation against the mean-field trajectories.
Outcome abm_consistency() {
  auto start = Clock::now();
  GameSpec hdh = hawk_dove_hunger();
  AbmConfig cfg;
  cfg.initial = uniform_social_state(hdh);
  cfg.initial.d.mass[0] << 1.0, 0.0;
  cfg.horizon = 10.0;
  cfg.snapshot_interval = 0.1;
  Trajectory reference = integrate_async(hdh, cfg.initial, cfg.horizon, 0.01);
  StudyResult study = convergence_study(hdh, cfg, {100, 1000, 10000}, 20, 8008, reference);
  bool decreasing = study.mean_error[0] > study.mean_error[1] && study.mean_error[1] > study.mean_error[2];
  bool slope_ok = study.slope >= -0.7 && study.slope <= -0.3;

  AbmConfig rev = cfg;
  rev.mode = AbmMode::Revision;
  rev.eta = Vector::Ones(1);
  rev.protocol = {RevisionProtocol::best_response()};
  EvolutionConfig ev = EvolutionConfig::uniform(hdh, RevisionProtocol::best_response().weighted(), 1.0);
  Trajectory ode = evolve(hdh, cfg.initial, ev, cfg.horizon, default_step(ev.fastest_rate(hdh)));
  std::vector<double> rev_err(5);
  parallel_for(rev_err.size(), [&](std::size_t k) {
    rev_err[k] = trajectory_error(simulate(hdh, rev, 10000, derive_seed(8009, k)), ode);
  });
  double worst = *std::max_element(rev_err.begin(), rev_err.end());
  double elapsed = seconds_since(start);
  Outcome o;
  o.pass = decreasing && slope_ok && worst < 0.08 && elapsed < 600.0;
  o.detail = "state-only mean errors " + num(study.mean_error[0]) + ", " + num(study.mean_error[1]) + ", " +
             num(study.mean_error[2]) + ", slope " + num(study.slope) + "; revision sup-error " + num(worst) +
             " (worst of 5 seeds), " + num(elapsed) + "s";
  return o;
}

// 9. Parser goldens.
std::string render_expr_case(const std::string& text) {
  // Context: two types with masses (0.4, 0.6), three states, two actions;
  // action 1 is masked for type 1 in state 2.
  Dims dims{2, 3, 2};
  ActionMask mask(dims, true);
  mask.set(1, 2, 1, false);
  Vector g{{0.4, 0.6}};
  try {
    Expr e = parse_expr(text);
    check_references(e, dims, mask, "expression: ");
    std::string out = "ok " + e.to_string() + "\n";
    SocialState s;
    for (int t = 0; t < 2; ++t) {
      s.d.mass.push_back(Vector::Constant(3, g(t) / 3));
      Matrix pi = Matrix::Constant(3, 2, 0.5);
      s.pi.table.push_back(pi);
    }
    s.pi.table[1].row(2) << 1.0, 0.0;
    try {
      out += "value " + format_number(CompiledExpr(e, g).eval(s)) + "\n";
    } catch (const Error& err) {
      out += err.kind() + ": " + err.what() + "\n";
    }
    return out;
  } catch (const Error& err) {
    return err.kind() + ": " + err.what() + "\n";
  }
}

std::string render_game_case(const std::string& text) {
  try {
    return "ok\n" + serialize_game(parse_game_file(text));
  } catch (const Error& err) {
    return err.kind() + ": " + err.what() + "\n";
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome parser_goldens(const fs::path& dir) {
  const bool regenerate = std::getenv("DYNPOP_REGENERATE_GOLDENS") != nullptr;
  std::vector<fs::path> cases;
  if (fs::exists(dir / "cases"))
    for (const auto& entry : fs::directory_iterator(dir / "cases")) {
      auto ext = entry.path().extension();
      if (ext == ".expr" || ext == ".json") cases.push_back(entry.path());
    }
  std::sort(cases.begin(), cases.end());
  int matched = 0, unstable = 0;
  std::set<std::string> kinds;
  std::string first_mismatch;
  for (const fs::path& c : cases) {
    std::string input = slurp(c);
    if (c.extension() == ".expr" && !input.empty() && input.back() == '\n') input.pop_back();
    auto render = [&] { return c.extension() == ".expr" ? render_expr_case(input) : render_game_case(input); };
    std::string out = render();
    if (render() != out) ++unstable;
    kinds.insert(out.substr(0, out.find_first_of(" :\n")));
    fs::path golden = fs::path(c).replace_extension(".out");
    if (regenerate) {
      std::ofstream(golden, std::ios::binary) << out;
      ++matched;
    } else if (fs::exists(golden) && slurp(golden) == out) {
      ++matched;
    } else if (first_mismatch.empty()) {
      first_mismatch = c.filename().string();
    }
  }
  const std::set<std::string> required{"ok", "SyntaxError", "UnknownIdentifierError", "ArityError", "IndexError",
                                       "MissingTransitionRowError", "SpecError"};
  bool covered = std::includes(kinds.begin(), kinds.end(), required.begin(), required.end());
  Outcome o;
  o.pass = cases.size() == 25 && matched == 25 && unstable == 0 && covered;
  o.detail = std::to_string(matched) + "/" + std::to_string(cases.size()) + " cases match, " +
             std::to_string(kinds.size()) + " outcome kinds" + (covered ? "" : " (missing an error class)");
  if (regenerate) o.detail += ", regenerated";
  if (!first_mismatch.empty()) o.detail += "; first mismatch " + first_mismatch;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path goldens = argc > 1 ? fs::path(argv[1]) : fs::path("tests/goldens");
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"simplex invariance", simplex_invariance},
      {"MDP oracle equivalence", mdp_oracles},
      {"certificate soundness", certificate_soundness},
      {"reduction cross-check", reduction_crosscheck},
      {"Nash stationarity", nash_stationarity},
      {"analytic swap dynamics", analytic_swap},
      {"classical-game embedding", classical_embedding},
      {"agent-based mean-field consistency", abm_consistency},
      {"parser goldens", [&] { return parser_goldens(goldens); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
