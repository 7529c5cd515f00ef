#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "drbeta/model.hpp"
#include "drbeta/montecarlo.hpp"

namespace drbeta::pipeline {

enum class Forecaster { drbeta, arma };

Forecaster forecaster_from_string(const std::string& s);
std::string to_string(Forecaster f);

struct RollingForecast {
  std::vector<std::string> labels;  // target day
  std::vector<double> forecast;
  std::vector<double> target;       // realized series value on the target day
  int failures = 0;
};

/// One-step forecasts of day t from days t-window..t-1 for every t >= window.
RollingForecast rolling_forecast(const std::vector<double>& series,
                                 const std::vector<std::string>& labels, int window,
                                 Forecaster method, int p = 1, int q = 1,
                                 const model::FitOptions& options = {});

struct ChainConfig {
  mc::Design design;
  int m = 780;
  int n = 120;
  int window = 100;
  std::uint64_t seed = 20240607;
};

nlohmann::json to_json(const ChainConfig& c);

/// simulate -> rib/chen/prvb -> fit -> forecast, writing every artifact
/// under `dir`. Returns the manifest (config, file hashes, key numbers).
nlohmann::json run_chain(const ChainConfig& config, const std::string& dir);

/// Paths of entries that differ between two manifests ("" when equal).
std::vector<std::string> manifest_diff(const nlohmann::json& actual, const nlohmann::json& golden,
                                       const std::string& prefix = "");

}  // namespace drbeta::pipeline
