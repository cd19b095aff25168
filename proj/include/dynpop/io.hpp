#ifndef DYNPOP_IO_HPP
#define DYNPOP_IO_HPP

#include <ostream>
#include <string>

#include <json.hpp>

#include "dynpop/dynamics.hpp"
#include "dynpop/equilibrium.hpp"
#include "dynpop/game.hpp"

namespace dynpop {

using ojson = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// Header "t,d_<tau>_<x>...,pi_<tau>_<x>_<a>..." (allowed actions only),
/// then one row per snapshot.
void write_trajectory_csv(std::ostream& out, const GameSpec& spec, const Trajectory& traj);

ojson social_state_json(const SocialState& s);
SocialState social_state_from_json(const GameSpec& spec, const ojson& j);

ojson trajectory_json(const GameSpec& spec, const Trajectory& traj);
Trajectory trajectory_from_json(const GameSpec& spec, const ojson& j);

ojson certificate_json(const Certificate& c);
ojson report_json(const GameSpec& spec, const EquilibriumReport& report);

}  // namespace dynpop

#endif  // DYNPOP_IO_HPP
