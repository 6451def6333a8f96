#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "app/config.hpp"
#include "app/output.hpp"

namespace flashsim::app {

struct ExperimentInfo {
  std::string name;
  std::string model;  // the config model it runs under
  std::string description;
};

const std::vector<ExperimentInfo>& experiments();

struct RunResult {
  std::vector<FlashRecord> flashes;  // sorted by trajectory
  int space_dim = 1;
  nlohmann::json summary;
  std::string title;
};

/// Dispatches on config.experiment; throws ConfigError for unknown names or a
/// model mismatch. Results depend only on the config (threads do not matter).
RunResult run_experiment(const Config& config, unsigned threads);

}  // namespace flashsim::app
