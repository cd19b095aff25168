#ifndef DYNPOP_GAME_FILE_HPP
#define DYNPOP_GAME_FILE_HPP

#include <string>
#include <string_view>

#include "dynpop/game.hpp"

namespace dynpop {

/// Parses the JSON game format:
///
///   { "types": 1, "states": 2, "actions": 2,
///     "g": [1], "alpha": [0.8], "delta": [1],
///     "mask": [[tau, x, a], ...],            // allowed triples; absent => all allowed
///     "transitions": [{"tau":0, "x":0, "a":0, "to":1, "prob": "<expr>"}, ...],
///     "rewards":     [{"tau":0, "x":0, "a":0, "value": "<expr>"}, ...] }
///
/// Every allowed (tau, x, a) needs at least one transition entry; missing
/// `to` entries are 0 and missing rewards are 0. Errors carry the JSON
/// line/column (syntax) or the offending entry path (everything else).
GameSpec parse_game_file(std::string_view text);

/// Inverse of parse_game_file for expression-backed games; throws SpecError
/// for games built from native evaluators.
std::string serialize_game(const GameSpec& spec);

/// Reads and parses a game file from disk.
GameSpec load_game_file(const std::string& path);

}  // namespace dynpop

#endif  // DYNPOP_GAME_FILE_HPP
