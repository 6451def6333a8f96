#pragma once

// Run configuration: a JSON document validated field by field. Every
// malformed or unknown field raises ConfigError naming it.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "flashsim/dirac.hpp"
#include "flashsim/fock.hpp"
#include "flashsim/grid.hpp"

namespace flashsim::app {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct InitialState {
  std::string kind;
  nlohmann::json params = nlohmann::json::object();
};

struct Config {
  std::string model;  // grw | fock | multitime | relativistic
  std::string experiment;
  GridSpec grid = GridSpec::centered(1, 16, 0.5);
  double sigma = 1.0;
  double tau = 1.0;
  double mass = 1.0;
  // relativistic momentum window
  double momentum_cutoff = 4.0;
  int modes = 64;
  double momentum_center = 0.0;
  bool positive_energy_only = false;
  int particles = 1;
  Statistics statistics = Statistics::fermion;
  int n_max = 3;
  std::vector<SpacetimePoint> seeds;  // relativistic seed flashes, one per type
  InitialState initial_state;
  double horizon = 5.0;
  std::size_t trajectories = 100;
  std::uint64_t seed = 0;
  std::map<std::string, double> tolerances;

  double tolerance(const std::string& name, double fallback) const {
    auto it = tolerances.find(name);
    return it == tolerances.end() ? fallback : it->second;
  }
};

Config parse_config(const nlohmann::json& doc);
Config load_config(const std::filesystem::path& path);

/// Typed access to initial_state.params with errors naming the field.
class Params {
 public:
  explicit Params(const nlohmann::json& params) : p_(params) {}
  double number(const std::string& key, double fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const;
  std::vector<int> integers(const std::string& key, std::vector<int> fallback) const;

 private:
  const nlohmann::json& p_;
};

}  // namespace flashsim::app
