#include "dynpop/io.hpp"

#include <charconv>
#include <cmath>

#include "dynpop/error.hpp"

namespace dynpop {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& out, const GameSpec& spec, const Trajectory& traj) {
  out << 't';
  for (int t = 0; t < spec.types(); ++t)
    for (int x = 0; x < spec.states(); ++x) out << ",d_" << t << '_' << x;
  for (int t = 0; t < spec.types(); ++t)
    for (int x = 0; x < spec.states(); ++x)
      for (int a : spec.mask().actions(t, x)) out << ",pi_" << t << '_' << x << '_' << a;
  out << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const SocialState& s = traj.states[k];
    out << format_number(traj.times[k]);
    for (int t = 0; t < spec.types(); ++t)
      for (int x = 0; x < spec.states(); ++x) out << ',' << format_number(s.d.mass[t](x));
    for (int t = 0; t < spec.types(); ++t)
      for (int x = 0; x < spec.states(); ++x)
        for (int a : spec.mask().actions(t, x)) out << ',' << format_number(s.pi.table[t](x, a));
    out << '\n';
  }
}

ojson social_state_json(const SocialState& s) {
  ojson d = ojson::array(), pi = ojson::array();
  for (const Vector& v : s.d.mass) {
    ojson row = ojson::array();
    for (int x = 0; x < v.size(); ++x) row.push_back(v(x));
    d.push_back(row);
  }
  for (const Matrix& m : s.pi.table) {
    ojson table = ojson::array();
    for (int x = 0; x < m.rows(); ++x) {
      ojson row = ojson::array();
      for (int a = 0; a < m.cols(); ++a) row.push_back(m(x, a));
      table.push_back(row);
    }
    pi.push_back(table);
  }
  ojson out;
  out["d"] = d;
  out["pi"] = pi;
  return out;
}

SocialState social_state_from_json(const GameSpec& spec, const ojson& j) {
  SocialState s = zero_social_state(spec);
  try {
    const ojson& d = j.at("d");
    const ojson& pi = j.at("pi");
    if (d.size() != static_cast<std::size_t>(spec.types()) || pi.size() != static_cast<std::size_t>(spec.types()))
      throw SpecError("social state has the wrong number of types");
    for (int t = 0; t < spec.types(); ++t) {
      if (d[t].size() != static_cast<std::size_t>(spec.states()) || pi[t].size() != static_cast<std::size_t>(spec.states()))
        throw SpecError("social state has the wrong number of states");
      for (int x = 0; x < spec.states(); ++x) {
        s.d.mass[t](x) = d[t][x].get<double>();
        if (pi[t][x].size() != static_cast<std::size_t>(spec.actions()))
          throw SpecError("social state has the wrong number of actions");
        for (int a = 0; a < spec.actions(); ++a) s.pi.table[t](x, a) = pi[t][x][a].get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("malformed social state: ") + e.what());
  }
  return s;
}

ojson trajectory_json(const GameSpec& spec, const Trajectory& traj) {
  ojson out;
  out["schema"] = kSchemaVersion;
  out["game"] = spec.name();
  out["integrator"] = traj.integrator;
  out["step"] = traj.step;
  out["seed"] = traj.seed;
  out["max_correction"] = traj.max_correction;
  out["halvings"] = traj.halvings;
  ojson times = ojson::array(), states = ojson::array();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    times.push_back(traj.times[k]);
    states.push_back(social_state_json(traj.states[k]));
  }
  out["times"] = times;
  out["states"] = states;
  return out;
}

Trajectory trajectory_from_json(const GameSpec& spec, const ojson& j) {
  Trajectory traj;
  try {
    if (j.at("schema").get<int>() != kSchemaVersion) throw SpecError("unsupported trajectory schema");
    traj.integrator = j.at("integrator").get<std::string>();
    traj.step = j.at("step").get<double>();
    traj.seed = j.at("seed").get<std::uint64_t>();
    traj.max_correction = j.at("max_correction").get<double>();
    traj.halvings = j.at("halvings").get<int>();
    for (const auto& t : j.at("times")) traj.times.push_back(t.get<double>());
    for (const auto& s : j.at("states")) traj.states.push_back(social_state_from_json(spec, s));
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("malformed trajectory: ") + e.what());
  }
  return traj;
}

ojson certificate_json(const Certificate& c) {
  ojson out;
  out["pass"] = c.pass;
  out["improvement_steps"] = c.improvement_steps;
  out["value_gap"] = c.value_gap;
  out["q_gap"] = c.q_gap;
  out["worst_tau"] = c.worst_tau;
  out["worst_x"] = c.worst_x;
  return out;
}

ojson report_json(const GameSpec& spec, const EquilibriumReport& report) {
  ojson out;
  out["schema"] = kSchemaVersion;
  out["game"] = spec.name();
  out["converged"] = report.converged;
  out["iterations"] = report.iterations;
  out["residual_pi"] = report.residual.pi;
  out["residual_d"] = report.residual.d;
  out["fixed_point_residual"] = report.fixed_point_residual;
  out["final_damping"] = report.final_damping;
  out["warnings"] = report.warnings;
  out["certificate"] = report.certificate ? certificate_json(*report.certificate) : ojson(nullptr);
  out["state"] = social_state_json(report.state);
  return out;
}

}  // namespace dynpop
