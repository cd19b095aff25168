#include "dynpop/game_file.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "dynpop/error.hpp"

namespace dynpop {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void rethrow_with_prefix(const std::string& prefix) {
  try {
    throw;
  } catch (const SyntaxError& e) {
    throw SyntaxError(prefix + e.what());
  } catch (const UnknownIdentifierError& e) {
    throw UnknownIdentifierError(prefix + e.what());
  } catch (const ArityError& e) {
    throw ArityError(prefix + e.what());
  } catch (const IndexError& e) {
    throw IndexError(prefix + e.what());
  } catch (const SpecError& e) {
    throw SpecError(prefix + e.what());
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + "missing key '" + key + "'");
  return *it;
}

int require_int(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_integer()) throw ParseError(where + "'" + key + "' must be an integer");
  return v.get<int>();
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw ParseError(where + "'" + key + "' must be an expression string");
  return v.get<std::string>();
}

Vector require_vector(const json& obj, const char* key, int size) {
  const json& v = require(obj, key, "");
  if (!v.is_array()) throw ParseError(std::string("'") + key + "' must be an array");
  if (static_cast<int>(v.size()) != size)
    throw ParseError(std::string("'") + key + "' has " + std::to_string(v.size()) + " entries, expected " + std::to_string(size));
  Vector out(size);
  for (int i = 0; i < size; ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number()) throw ParseError(std::string("'") + key + "' entries must be numbers");
    out(i) = v[static_cast<std::size_t>(i)].get<double>();
  }
  return out;
}

void check_index(int value, int bound, const char* name, const std::string& where) {
  if (value < 0 || value >= bound)
    throw IndexError(where + name + "=" + std::to_string(value) + " out of range [0," + std::to_string(bound) + ")");
}

std::string masked_triple(int t, int x, int a) {
  return "(tau=" + std::to_string(t) + ", x=" + std::to_string(x) + ", a=" + std::to_string(a) + ")";
}

}  // namespace

GameSpec parse_game_file(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t byte = e.byte == 0 ? 0 : e.byte - 1;
    int line = 1, column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw SyntaxError("game file syntax error at line " + std::to_string(line) + ", column " + std::to_string(column));
  }
  if (!doc.is_object()) throw ParseError("game file must be a JSON object");

  Dims dims{require_int(doc, "types", ""), require_int(doc, "states", ""), require_int(doc, "actions", "")};
  if (dims.types < 1 || dims.states < 1 || dims.actions < 1)
    throw SpecError("types, states and actions must all be at least 1");
  Vector g = require_vector(doc, "g", dims.types);
  Vector alpha = require_vector(doc, "alpha", dims.types);
  Vector delta = require_vector(doc, "delta", dims.types);

  ActionMask mask(dims, true);
  if (auto it = doc.find("mask"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("'mask' must be an array of [tau, x, a] triples");
    mask = ActionMask(dims, false);
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& e = (*it)[i];
      std::string where = "mask[" + std::to_string(i) + "]: ";
      if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() || !e[2].is_number_integer())
        throw ParseError(where + "expected [tau, x, a]");
      int t = e[0].get<int>(), x = e[1].get<int>(), a = e[2].get<int>();
      check_index(t, dims.types, "tau", where);
      check_index(x, dims.states, "x", where);
      check_index(a, dims.actions, "a", where);
      mask.set(t, x, a, true);
    }
  }

  ExprTables tables(dims);
  std::set<std::tuple<int, int, int>> has_row;
  const json& transitions = require(doc, "transitions", "");
  if (!transitions.is_array()) throw ParseError("'transitions' must be an array");
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const json& e = transitions[i];
    std::string where = "transitions[" + std::to_string(i) + "]: ";
    if (!e.is_object()) throw ParseError(where + "expected an object");
    int t = require_int(e, "tau", where), x = require_int(e, "x", where), a = require_int(e, "a", where);
    int to = require_int(e, "to", where);
    check_index(t, dims.types, "tau", where);
    check_index(x, dims.states, "x", where);
    check_index(a, dims.actions, "a", where);
    check_index(to, dims.states, "to", where);
    if (!mask.allowed(t, x, a)) throw IndexError(where + "action " + masked_triple(t, x, a) + " is masked");
    if (tables.prob(t, x, a, to)) throw ParseError(where + "duplicate entry");
    std::string src = require_string(e, "prob", where);
    try {
      tables.prob(t, x, a, to) = parse_expr(src);
    } catch (const SpecError&) {
      rethrow_with_prefix("transitions[" + std::to_string(i) + "].prob: ");
    }
    has_row.insert({t, x, a});
  }

  if (auto it = doc.find("rewards"); it != doc.end()) {
    if (!it->is_array()) throw ParseError("'rewards' must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& e = (*it)[i];
      std::string where = "rewards[" + std::to_string(i) + "]: ";
      if (!e.is_object()) throw ParseError(where + "expected an object");
      int t = require_int(e, "tau", where), x = require_int(e, "x", where), a = require_int(e, "a", where);
      check_index(t, dims.types, "tau", where);
      check_index(x, dims.states, "x", where);
      check_index(a, dims.actions, "a", where);
      if (!mask.allowed(t, x, a)) throw IndexError(where + "action " + masked_triple(t, x, a) + " is masked");
      if (tables.reward(t, x, a)) throw ParseError(where + "duplicate entry");
      std::string src = require_string(e, "value", where);
      try {
        tables.reward(t, x, a) = parse_expr(src);
      } catch (const SpecError&) {
        rethrow_with_prefix("rewards[" + std::to_string(i) + "].value: ");
      }
    }
  }

  for (int t = 0; t < dims.types; ++t)
    for (int x = 0; x < dims.states; ++x)
      for (int a = 0; a < dims.actions; ++a)
        if (mask.allowed(t, x, a) && !has_row.count({t, x, a}))
          throw MissingTransitionRowError("missing transition row for " + masked_triple(t, x, a));

  std::string name;
  if (auto it = doc.find("name"); it != doc.end() && it->is_string()) name = it->get<std::string>();
  return GameSpec::from_expressions(dims, std::move(mask), std::move(g), std::move(alpha), std::move(delta),
                                    std::move(tables), std::move(name));
}

std::string serialize_game(const GameSpec& spec) {
  const ExprTables* tables = spec.expressions();
  if (!tables) throw SpecError("game '" + spec.name() + "' is not expression-backed and cannot be serialized");
  Dims dims = spec.dims();
  ojson doc;
  if (!spec.name().empty()) doc["name"] = spec.name();
  doc["types"] = dims.types;
  doc["states"] = dims.states;
  doc["actions"] = dims.actions;
  auto vec = [](const Vector& v) {
    ojson a = ojson::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
  };
  doc["g"] = vec(spec.type_mass());
  doc["alpha"] = vec(spec.discount());
  doc["delta"] = vec(spec.rate());
  bool all_allowed = true;
  ojson mask = ojson::array();
  for (int t = 0; t < dims.types; ++t)
    for (int x = 0; x < dims.states; ++x)
      for (int a = 0; a < dims.actions; ++a) {
        if (spec.allowed(t, x, a))
          mask.push_back({t, x, a});
        else
          all_allowed = false;
      }
  if (!all_allowed) doc["mask"] = mask;
  ojson trans = ojson::array();
  ojson rewards = ojson::array();
  for (int t = 0; t < dims.types; ++t)
    for (int x = 0; x < dims.states; ++x)
      for (int a = 0; a < dims.actions; ++a) {
        if (!spec.allowed(t, x, a)) continue;
        for (int y = 0; y < dims.states; ++y)
          if (const auto& e = tables->prob(t, x, a, y))
            trans.push_back({{"tau", t}, {"x", x}, {"a", a}, {"to", y}, {"prob", e->to_string()}});
        if (const auto& e = tables->reward(t, x, a))
          rewards.push_back({{"tau", t}, {"x", x}, {"a", a}, {"value", e->to_string()}});
      }
  doc["transitions"] = trans;
  doc["rewards"] = rewards;
  return doc.dump(2) + "\n";
}

GameSpec load_game_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError("cannot open game file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  GameSpec spec = parse_game_file(ss.str());
  // Unnamed files are named after the file.
  if (spec.name().empty()) return spec.with_name(std::filesystem::path(path).stem().string());
  return spec;
}

}  // namespace dynpop
