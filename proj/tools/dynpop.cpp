// Command-line front end: validate, solve, simulate, evolve, reduce-check, abm.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "dynpop/abm.hpp"
#include "dynpop/builtin_games.hpp"
#include "dynpop/dynamics.hpp"
#include "dynpop/equilibrium.hpp"
#include "dynpop/error.hpp"
#include "dynpop/evolution.hpp"
#include "dynpop/game_file.hpp"
#include "dynpop/io.hpp"
#include "dynpop/reduction.hpp"

using namespace dynpop;

namespace {

struct GameOptions {
  std::string source;
  std::optional<double> alpha;
  std::optional<double> delta;

  void attach(CLI::App* app) {
    app->add_option("game", source, "built-in game name or path to a game file")->required();
    app->add_option("--alpha", alpha, "override the discount of every type")->check(CLI::Range(0.0, 1.0));
    app->add_option("--delta", delta, "override the interaction rate of every type")->check(CLI::PositiveNumber);
  }

  GameSpec load() const {
    const auto names = builtin_names();
    GameSpec spec = std::find(names.begin(), names.end(), source) != names.end() ? builtin_game(source)
                                                                                 : load_game_file(source);
    if (alpha) {
      if (*alpha >= 1.0) throw ConfigError("alpha must be below 1");
      spec = spec.with_discount(Vector::Constant(spec.types(), *alpha));
    }
    if (delta) spec = spec.with_rate(Vector::Constant(spec.types(), *delta));
    return spec;
  }
};

struct Output {
  std::string path;
  std::string format = "csv";

  void attach(CLI::App* app) {
    app->add_option("-o,--output", path, "write the trajectory here instead of stdout");
    app->add_option("--format", format, "trajectory format")->check(CLI::IsMember({"csv", "json"}));
  }

  void write(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
  }

  void write_trajectory(const GameSpec& spec, const Trajectory& traj) const {
    std::ostringstream ss;
    if (format == "json")
      ss << trajectory_json(spec, traj).dump(2) << '\n';
    else
      write_trajectory_csv(ss, spec, traj);
    write(ss.str());
  }
};

SocialState initial_state(const GameSpec& spec, const std::string& path) {
  if (path.empty()) return uniform_social_state(spec);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open initial state '" + path + "'");
  ojson j;
  try {
    j = ojson::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("initial state: ") + e.what());
  }
  SocialState s = social_state_from_json(spec, j);
  check_social_state(spec, s);
  return s;
}

void print_json(const ojson& j) { std::cout << j.dump(2) << '\n'; }

ojson residual_json(const GameSpec& spec, const SocialState& s) {
  Residuals r = residuals(spec, s);
  ojson out;
  out["residual_pi"] = r.pi;
  out["residual_d"] = r.d;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic population games: equilibria, dynamics and agent-based simulation"};
  app.require_subcommand(1);
  // "--h" is the step size, so help is long-form only.
  app.set_help_flag("--help", "print help and exit");

  // validate
  GameOptions validate_game;
  int validate_samples = 100;
  std::uint64_t validate_seed = 42;
  auto* validate = app.add_subcommand("validate", "check transition rows and rewards on random social states");
  validate_game.attach(validate);
  validate->add_option("--samples", validate_samples)->check(CLI::PositiveNumber);
  validate->add_option("--seed", validate_seed);

  // solve
  GameOptions solve_game;
  SolveOptions solve_opts;
  int restarts = 0;
  std::uint64_t solve_seed = 1;
  std::optional<double> logit_t;
  std::string solve_init;
  auto* solve_cmd = app.add_subcommand("solve", "compute and certify a stationary equilibrium");
  solve_game.attach(solve_cmd);
  solve_cmd->add_option("--damping", solve_opts.damping)->check(CLI::Range(0.0, 1.0));
  solve_cmd->add_option("--tol", solve_opts.tol)->check(CLI::PositiveNumber);
  solve_cmd->add_option("--max-iters", solve_opts.max_iters)->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--restarts", restarts, "solve from this many seeded random states")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--seed", solve_seed);
  solve_cmd->add_option("--logit-T", logit_t, "logit temperature for the policy update")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--init", solve_init, "initial social state (JSON)");

  // simulate
  GameOptions sim_game;
  Output sim_out;
  std::string sim_mode = "async";
  double sim_t_end = 10.0;
  std::optional<double> sim_h;
  std::string sim_init;
  auto* simulate_cmd = app.add_subcommand("simulate", "state dynamics under a fixed policy");
  sim_game.attach(simulate_cmd);
  sim_out.attach(simulate_cmd);
  simulate_cmd->add_option("--mode", sim_mode)->check(CLI::IsMember({"sync", "async"}));
  simulate_cmd->add_option("--t-end", sim_t_end, "horizon (sync: number of steps)")->check(CLI::NonNegativeNumber);
  simulate_cmd->add_option("--h", sim_h, "RK4 step")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--init", sim_init, "initial social state (JSON)");

  // evolve
  GameOptions evo_game;
  Output evo_out;
  std::string evo_protocol = "br";
  bool evo_weighted = false;
  double evo_eta = 0.5;
  double evo_t_end = 10.0;
  double evo_temperature = 0.1;
  std::optional<double> evo_h;
  std::string evo_init;
  auto* evolve_cmd = app.add_subcommand("evolve", "coupled policy-state evolutionary dynamics");
  evo_game.attach(evolve_cmd);
  evo_out.attach(evolve_cmd);
  evolve_cmd->add_option("--protocol", evo_protocol)->check(CLI::IsMember({"br", "logit", "proj", "rep"}));
  evolve_cmd->add_flag("--state-weighted", evo_weighted, "revise only on interaction (rate delta eta d/g)");
  evolve_cmd->add_option("--eta", evo_eta)->check(CLI::PositiveNumber);
  evolve_cmd->add_option("--t-end", evo_t_end)->check(CLI::NonNegativeNumber);
  evolve_cmd->add_option("--h", evo_h)->check(CLI::PositiveNumber);
  evolve_cmd->add_option("--logit-T", evo_temperature)->check(CLI::PositiveNumber);
  evolve_cmd->add_option("--init", evo_init, "initial social state (JSON)");

  // reduce-check
  GameOptions red_game;
  int red_samples = 1000;
  std::uint64_t red_seed = 7;
  double red_tol = 1e-6;
  auto* reduce_cmd = app.add_subcommand("reduce-check", "compare equilibria with Nash equilibria of the reduced game");
  red_game.attach(reduce_cmd);
  reduce_cmd->add_option("--samples", red_samples)->check(CLI::NonNegativeNumber);
  reduce_cmd->add_option("--seed", red_seed);
  reduce_cmd->add_option("--tol", red_tol)->check(CLI::PositiveNumber);

  // abm
  GameOptions abm_game;
  Output abm_out;
  std::string abm_mode = "state";
  std::vector<int> abm_n{1000};
  int abm_seeds = 1;
  std::uint64_t abm_seed = 1;
  double abm_t_end = 10.0;
  double abm_interval = 0.1;
  double abm_eta = 1.0;
  std::string abm_protocol = "br";
  double abm_temperature = 0.1;
  std::string abm_init;
  auto* abm_cmd = app.add_subcommand("abm", "agent-based simulation and mean-field convergence study");
  abm_game.attach(abm_cmd);
  abm_out.attach(abm_cmd);
  abm_cmd->add_option("--mode", abm_mode)->check(CLI::IsMember({"state", "full"}));
  abm_cmd->add_option("--n", abm_n, "agent counts; several values or --seeds > 1 run a study")->expected(1, -1);
  abm_cmd->add_option("--seeds", abm_seeds)->check(CLI::PositiveNumber);
  abm_cmd->add_option("--seed", abm_seed);
  abm_cmd->add_option("--t-end", abm_t_end)->check(CLI::NonNegativeNumber);
  abm_cmd->add_option("--interval", abm_interval, "snapshot interval")->check(CLI::PositiveNumber);
  abm_cmd->add_option("--eta", abm_eta, "revision probability (full mode)");
  abm_cmd->add_option("--protocol", abm_protocol)->check(CLI::IsMember({"br", "logit"}));
  abm_cmd->add_option("--logit-T", abm_temperature)->check(CLI::PositiveNumber);
  abm_cmd->add_option("--init", abm_init, "initial social state (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) {
      GameSpec spec = validate_game.load();
      ValidationReport rep = validate_spec(spec, validate_samples, validate_seed);
      ojson out;
      out["schema"] = kSchemaVersion;
      out["game"] = spec.name();
      out["samples"] = rep.samples;
      out["valid"] = rep.valid();
      ojson v = ojson::array();
      for (const Violation& viol : rep.violations) v.push_back(viol.describe());
      out["violations"] = v;
      print_json(out);
      return rep.valid() ? 0 : 1;
    }

    if (*solve_cmd) {
      GameSpec spec = solve_game.load();
      solve_opts.logit_temperature = logit_t;
      if (restarts > 0) {
        RestartResult rr = solve_restarts(spec, solve_opts, restarts, solve_seed);
        ojson out;
        out["schema"] = kSchemaVersion;
        out["game"] = spec.name();
        out["restarts"] = restarts;
        int converged = 0;
        for (const auto& r : rr.runs) converged += r.converged ? 1 : 0;
        out["converged_runs"] = converged;
        ojson eqs = ojson::array();
        bool all_certified = !rr.distinct.empty();
        for (std::size_t i : rr.distinct) {
          EquilibriumReport rep = rr.runs[i];
          rep.certificate = certify(spec, rep.state);
          all_certified = all_certified && rep.certificate->pass;
          eqs.push_back(report_json(spec, rep));
        }
        out["equilibria"] = eqs;
        print_json(out);
        return all_certified ? 0 : 1;
      }
      EquilibriumReport rep = solve(spec, initial_state(spec, solve_init), solve_opts);
      if (rep.converged) rep.certificate = certify(spec, rep.state);
      print_json(report_json(spec, rep));
      return rep.converged && rep.certificate->pass ? 0 : 1;
    }

    if (*simulate_cmd) {
      GameSpec spec = sim_game.load();
      SocialState s0 = initial_state(spec, sim_init);
      Trajectory traj;
      if (sim_mode == "sync") {
        traj = simulate_sync(spec, s0, static_cast<int>(sim_t_end));
      } else {
        double h = sim_h.value_or(default_step(spec.rate().maxCoeff()));
        traj = integrate_async(spec, s0, sim_t_end, h);
      }
      sim_out.write_trajectory(spec, traj);
      return 0;
    }

    if (*evolve_cmd) {
      GameSpec spec = evo_game.load();
      RevisionProtocol protocol{parse_protocol_kind(evo_protocol), evo_temperature, evo_weighted};
      EvolutionConfig cfg = EvolutionConfig::uniform(spec, protocol, evo_eta);
      cfg.validate(spec);
      for (const auto& w : cfg.warnings(spec)) std::cerr << "warning: " << w << '\n';
      double h = evo_h.value_or(default_step(cfg.fastest_rate(spec)));
      Trajectory traj = evolve(spec, initial_state(spec, evo_init), cfg, evo_t_end, h);
      evo_out.write_trajectory(spec, traj);
      if (!evo_out.path.empty()) {
        ojson out;
        out["schema"] = kSchemaVersion;
        out["game"] = spec.name();
        out["protocol"] = protocol.name();
        out["t_end"] = evo_t_end;
        out["step"] = h;
        out["snapshots"] = traj.size();
        out["final"] = residual_json(spec, traj.back());
        out["field_norm"] = coupled_field(spec, traj.back(), cfg).sup_norm();
        print_json(out);
      }
      return 0;
    }

    if (*reduce_cmd) {
      GameSpec spec = red_game.load();
      Rng rng(red_seed);
      int agreed = 0, disagreed = 0;
      double max_inner_error = 0.0;
      ojson failures = ojson::array();
      auto check = [&](const SocialState& s, const std::string& label) {
        try {
          EquivalenceReport rep = equivalence_crosscheck(spec, s, red_tol);
          max_inner_error = std::max(max_inner_error, rep.inner_product_error);
          ++agreed;
        } catch (const EquivalenceViolation& e) {
          ++disagreed;
          failures.push_back(label + ": " + e.what());
        }
      };
      for (int k = 0; k < red_samples; ++k) check(random_social_state(spec, rng), "sample " + std::to_string(k));
      EquilibriumReport eq = solve(spec, uniform_social_state(spec));
      if (eq.converged) check(eq.state, "solved equilibrium");
      ojson out;
      out["schema"] = kSchemaVersion;
      out["game"] = spec.name();
      out["checked"] = agreed + disagreed;
      out["agreed"] = agreed;
      out["equilibrium_checked"] = eq.converged;
      out["max_inner_product_error"] = max_inner_error;
      out["failures"] = failures;
      print_json(out);
      return disagreed == 0 ? 0 : 1;
    }

    if (*abm_cmd) {
      GameSpec spec = abm_game.load();
      AbmConfig cfg;
      cfg.mode = abm_mode == "state" ? AbmMode::StateOnly : AbmMode::Revision;
      cfg.initial = initial_state(spec, abm_init);
      cfg.horizon = abm_t_end;
      cfg.snapshot_interval = abm_interval;
      RevisionProtocol protocol{parse_protocol_kind(abm_protocol), abm_temperature, true};
      cfg.eta = Vector::Constant(spec.types(), abm_eta);
      cfg.protocol.assign(static_cast<std::size_t>(spec.types()), protocol);
      if (abm_n.size() == 1 && abm_seeds == 1) {
        abm_out.write_trajectory(spec, simulate(spec, cfg, abm_n[0], abm_seed));
        return 0;
      }
      Trajectory reference;
      if (cfg.mode == AbmMode::StateOnly) {
        reference = integrate_async(spec, cfg.initial, abm_t_end, default_step(spec.rate().maxCoeff()));
      } else {
        EvolutionConfig ecfg;
        ecfg.eta = cfg.eta;
        ecfg.protocol = cfg.protocol;
        reference = evolve(spec, cfg.initial, ecfg, abm_t_end, default_step(ecfg.fastest_rate(spec)));
      }
      StudyResult study = convergence_study(spec, cfg, abm_n, abm_seeds, abm_seed, reference);
      std::ostringstream ss;
      write_study_csv(ss, study);
      abm_out.write(ss.str());
      return 0;
    }
  } catch (const Error& e) {
    ojson err;
    err["error"] = e.kind();
    err["message"] = e.what();
    std::cerr << err.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    ojson err;
    err["error"] = "InternalError";
    err["message"] = e.what();
    std::cerr << err.dump() << '\n';
    return 1;
  }
  return 0;
}
