#include "drsim/harness/config.hpp"

#include <fstream>
#include <set>

#include "drsim/adversaries.hpp"
#include "drsim/harness/expr.hpp"
#include "drsim/protocols.hpp"

namespace drsim::harness {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& key, const std::string& what) {
  throw ConfigError(where + ": key '" + key + "': " + what);
}

template <class F>
void each(const nlohmann::json& v, F&& fn) {
  if (v.is_array()) {
    for (const auto& e : v) fn(e);
  } else {
    fn(v);
  }
}

Rational to_rational(const nlohmann::json& v, const std::string& where, const std::string& key) {
  try {
    if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
    if (v.is_number()) return rational_from_double(v.get<double>());
    if (v.is_string()) return parse_rational(v.get<std::string>());
  } catch (const std::exception& e) {
    bad(where, key, e.what());
  }
  bad(where, key, "expected a number or a fraction string");
}

std::int64_t to_int(const nlohmann::json& v, const std::string& where, const std::string& key) {
  if (!v.is_number_integer()) bad(where, key, "expected an integer");
  return v.get<std::int64_t>();
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) bad(where, key, "unknown key");
  }
}

}  // namespace

ExperimentSpec parse_spec(const nlohmann::json& j, const std::string& where) {
  check_keys(j,
             {"name", "protocol", "adversary", "n", "k", "beta", "mode", "trials", "seed", "constants",
              "adversary_params", "protocol_options", "bounds", "round_cap", "record_events"},
             where);
  ExperimentSpec s;
  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  for (const char* req : {"protocol", "n", "k"}) {
    if (!j.contains(req)) bad(where, req, "missing");
  }
  each(j.at("protocol"), [&](const nlohmann::json& v) {
    if (!v.is_string()) bad(where, "protocol", "expected a string");
    const auto id = v.get<std::string>();
    if (!find_protocol(id)) bad(where, "protocol", "unknown protocol id '" + id + "'");
    s.protocols.push_back(id);
  });
  if (j.contains("adversary")) {
    s.adversaries.clear();
    each(j.at("adversary"), [&](const nlohmann::json& v) {
      if (!v.is_string()) bad(where, "adversary", "expected a string");
      const auto id = v.get<std::string>();
      if (!known_adversary(id)) bad(where, "adversary", "unknown adversary id '" + id + "'");
      s.adversaries.push_back(id);
    });
  }
  each(j.at("n"), [&](const nlohmann::json& v) {
    const auto n = to_int(v, where, "n");
    if (n < 1) bad(where, "n", "must be at least 1");
    s.ns.push_back(n);
  });
  each(j.at("k"), [&](const nlohmann::json& v) {
    const auto k = to_int(v, where, "k");
    if (k < 1 || k > 1000000) bad(where, "k", "must lie in 1..1000000");
    s.ks.push_back(static_cast<int>(k));
  });
  if (j.contains("beta")) {
    s.betas.clear();
    each(j.at("beta"), [&](const nlohmann::json& v) {
      const Rational b = to_rational(v, where, "beta");
      if (b < Rational(0) || b >= Rational(1)) bad(where, "beta", "must satisfy 0 <= beta < 1");
      s.betas.push_back(b);
    });
  }
  if (j.contains("mode")) {
    s.mode = j.at("mode").get<std::string>();
    if (s.mode != "broadcast" && s.mode != "point-to-point") bad(where, "mode", "expected broadcast or point-to-point");
  }
  if (j.contains("trials")) {
    s.trials = to_int(j.at("trials"), where, "trials");
    if (s.trials < 1) bad(where, "trials", "must be at least 1");
  }
  if (j.contains("seed")) {
    const auto& v = j.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      bad(where, "seed", "expected a non-negative integer");
    }
    s.seed = v.get<std::uint64_t>();
  }
  if (j.contains("constants")) {
    const auto& c = j.at("constants");
    if (!c.is_object()) bad(where, "constants", "expected an object");
    for (const auto& [name, v] : c.items()) s.constants[name] = to_rational(v, where, "constants." + name);
  }
  if (j.contains("adversary_params")) {
    s.adversary_params = j.at("adversary_params");
    if (!s.adversary_params.is_object()) bad(where, "adversary_params", "expected an object");
  }
  if (j.contains("protocol_options")) {
    s.protocol_options = j.at("protocol_options");
    if (!s.protocol_options.is_object()) bad(where, "protocol_options", "expected an object");
  }
  if (j.contains("bounds")) {
    const auto& b = j.at("bounds");
    if (!b.is_object()) bad(where, "bounds", "expected an object of name: expression");
    for (const auto& [name, v] : b.items()) {
      if (!v.is_string()) bad(where, "bounds." + name, "expected an expression string");
      try {
        Expr::parse(v.get<std::string>());
      } catch (const ExprError& e) {
        bad(where, "bounds." + name, e.what());
      }
      s.bounds.push_back({name, v.get<std::string>()});
    }
  }
  if (j.contains("round_cap")) {
    s.round_cap = to_int(j.at("round_cap"), where, "round_cap");
    if (s.round_cap < 0) bad(where, "round_cap", "must be non-negative");
  }
  if (j.contains("record_events")) s.record_events = j.at("record_events").get<bool>();
  return s;
}

ExperimentSpec load_spec(const std::filesystem::path& path) { return parse_spec(read_json(path), path.string()); }

AttackSpec parse_attack(const nlohmann::json& j, const std::string& where) {
  check_keys(j, {"name", "k", "n", "trials", "seed", "skips"}, where);
  AttackSpec a;
  if (j.contains("k")) a.k = static_cast<int>(to_int(j.at("k"), where, "k"));
  if (j.contains("n")) a.n = to_int(j.at("n"), where, "n");
  if (j.contains("trials")) a.trials = to_int(j.at("trials"), where, "trials");
  if (j.contains("seed")) a.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("skips")) a.skips = static_cast<int>(to_int(j.at("skips"), where, "skips"));
  if (a.k < 3 || a.k % 2 == 0) bad(where, "k", "must be odd and at least 3");
  if (a.n < 1) bad(where, "n", "must be at least 1");
  if (a.trials < 1) bad(where, "trials", "must be at least 1");
  if (a.skips < 1 || a.skips > a.n) bad(where, "skips", "must lie in 1..n");
  return a;
}

AttackSpec load_attack(const std::filesystem::path& path) { return parse_attack(read_json(path), path.string()); }

}  // namespace drsim::harness
