#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "drsim/model.hpp"

namespace drsim::harness {

struct Bound {
  std::string name;
  std::string expr;
};

// A grid of runs. Every list-valued axis multiplies the cell count.
struct ExperimentSpec {
  std::string name = "experiment";
  std::vector<std::string> protocols;
  std::vector<std::string> adversaries{"none"};
  std::vector<std::int64_t> ns;
  std::vector<int> ks;
  std::vector<Rational> betas{Rational(0)};
  std::string mode;  // empty: the protocol's default
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  std::map<std::string, Rational> constants;
  nlohmann::json adversary_params = nlohmann::json::object();
  nlohmann::json protocol_options = nlohmann::json::object();
  std::vector<Bound> bounds;
  std::int64_t round_cap = 0;
  bool record_events = false;
};

// Throws ConfigError naming the offending key.
ExperimentSpec parse_spec(const nlohmann::json& j, const std::string& where = "config");
ExperimentSpec load_spec(const std::filesystem::path& path);

// Mirror attack demo settings.
struct AttackSpec {
  int k = 7;
  std::int64_t n = 7;
  std::int64_t trials = 2000;
  std::uint64_t seed = 0;
  int skips = 1;
};
AttackSpec parse_attack(const nlohmann::json& j, const std::string& where = "config");
AttackSpec load_attack(const std::filesystem::path& path);

}  // namespace drsim::harness
