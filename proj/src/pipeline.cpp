#include "drbeta/pipeline.hpp"

#include <filesystem>
#include <limits>

#include "drbeta/io.hpp"
#include "drbeta/rng.hpp"

namespace drbeta::pipeline {

namespace fs = std::filesystem;

Forecaster forecaster_from_string(const std::string& s) {
  if (s == "drbeta") return Forecaster::drbeta;
  if (s == "arma") return Forecaster::arma;
  throw InvalidArgument("unknown forecaster '" + s + "' (expected drbeta or arma)");
}

std::string to_string(Forecaster f) { return f == Forecaster::drbeta ? "drbeta" : "arma"; }

RollingForecast rolling_forecast(const std::vector<double>& series,
                                 const std::vector<std::string>& labels, int window,
                                 Forecaster method, int p, int q,
                                 const model::FitOptions& options) {
  const int n = static_cast<int>(series.size());
  if (window < 1) throw InvalidArgument("rolling_forecast: window must be >= 1");
  if (n <= window) {
    throw InvalidArgument("rolling_forecast: series length " + std::to_string(n) +
                          " must exceed the window " + std::to_string(window));
  }
  if (!labels.empty() && static_cast<int>(labels.size()) != n) {
    throw InvalidArgument("rolling_forecast: label count does not match the series");
  }
  RollingForecast out;
  for (int t = window; t < n; ++t) {
    const std::span<const double> hist(series.data() + (t - window), static_cast<std::size_t>(window));
    double f = std::numeric_limits<double>::quiet_NaN();
    try {
      if (method == Forecaster::drbeta) {
        const auto fit = model::fit(hist, p, q, options);
        f = model::forecast_h(fit.theta_hat, hist, options.init);
      } else {
        f = model::arma_forecaster(hist, p, q).forecast;
      }
    } catch (const ComputationError&) {
      ++out.failures;
    }
    out.labels.push_back(labels.empty() ? std::to_string(t + 1) : labels[static_cast<std::size_t>(t)]);
    out.forecast.push_back(f);
    out.target.push_back(series[static_cast<std::size_t>(t)]);
  }
  return out;
}

nlohmann::json to_json(const ChainConfig& c) {
  nlohmann::json j;
  j["dr"] = c.design.dr;
  j["vol"] = c.design.vol;
  j["noise"] = c.design.noise;
  j["init"] = c.design.init;
  j["m"] = c.m;
  j["n"] = c.n;
  j["window"] = c.window;
  j["seed"] = c.seed;
  return j;
}

nlohmann::json run_chain(const ChainConfig& c, const std::string& dir) {
  if (c.n <= c.window) throw InvalidArgument("run_chain: n must exceed window");
  fs::create_directories(dir);
  const fs::path base(dir);
  const nlohmann::json config = to_json(c);

  const auto out = sim::simulate(c.design.dr, c.design.vol, c.design.noise, TimeGrid{c.m, c.n},
                                 c.design.init, derive_seed(c.seed, 0, "sim"));
  io::write_sim_output((base / "sim").string(), out, config);

  const auto series = rib::estimate_series(
      out.observed, rib::default_tuning(), default_kernel(),
      {rib::Estimator::rib, rib::Estimator::chen, rib::Estimator::prvb});
  const char* names[3] = {"rib.csv", "chen.csv", "prvb.csv"};
  for (int e = 0; e < 3; ++e) {
    if (!series[static_cast<std::size_t>(e)].failures.empty()) {
      throw ComputationError("run_chain: estimation failed on day " +
                             std::to_string(series[static_cast<std::size_t>(e)].failures.front().first + 1));
    }
    io::write_rib_csv((base / names[e]).string(), series[static_cast<std::size_t>(e)]);
  }

  const auto fit = model::fit(series[0].rib, c.design.dr.p(), c.design.dr.q());
  io::write_json((base / "fit.json").string(), model::fit_to_json(fit));
  const double next = model::forecast_h(fit.theta_hat, series[0].rib);

  const auto dr = rolling_forecast(series[0].rib, series[0].labels, c.window, Forecaster::drbeta);
  const auto ap = rolling_forecast(series[2].rib, series[2].labels, c.window, Forecaster::arma);
  std::vector<double> truth(out.true_ibeta.begin() + c.window, out.true_ibeta.end());
  io::write_table_csv((base / "forecast.csv").string(), {"day", "drbeta", "armap", "ibeta"}, dr.labels,
                      {dr.forecast, ap.forecast, truth});

  nlohmann::json m;
  m["config"] = config;
  nlohmann::json files = nlohmann::json::object();
  for (const char* f : {"sim/latent.csv", "sim/observed.csv", "sim/spot_beta.csv", "sim/ibeta.csv",
                        "sim/manifest.json", "rib.csv", "chen.csv", "prvb.csv", "fit.json",
                        "forecast.csv"}) {
    files[f] = io::file_hash((base / f).string());
  }
  m["files"] = files;
  nlohmann::json values;
  std::vector<std::string> theta;
  for (double v : fit.theta_hat.to_vector()) theta.push_back(io::format_double(v));
  values["theta_hat"] = theta;
  values["loglik"] = io::format_double(fit.loglik);
  values["forecast_next"] = io::format_double(next);
  values["msfe_drbeta"] = io::format_double(model::evaluate(dr.forecast, truth, model::Metric::msfe));
  values["msfe_armap"] = io::format_double(model::evaluate(ap.forecast, truth, model::Metric::msfe));
  m["values"] = values;
  io::write_json((base / "manifest.json").string(), m);
  return m;
}

std::vector<std::string> manifest_diff(const nlohmann::json& actual, const nlohmann::json& golden,
                                       const std::string& prefix) {
  std::vector<std::string> diffs;
  if (actual.is_object() && golden.is_object()) {
    for (auto it = golden.begin(); it != golden.end(); ++it) {
      const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
      if (!actual.contains(it.key())) {
        diffs.push_back(path + " (missing)");
        continue;
      }
      auto sub = manifest_diff(actual.at(it.key()), it.value(), path);
      diffs.insert(diffs.end(), sub.begin(), sub.end());
    }
    for (auto it = actual.begin(); it != actual.end(); ++it) {
      if (!golden.contains(it.key())) diffs.push_back((prefix.empty() ? "" : prefix + ".") + it.key() + " (unexpected)");
    }
    return diffs;
  }
  if (actual != golden) diffs.push_back(prefix.empty() ? "<root>" : prefix);
  return diffs;
}

}  // namespace drbeta::pipeline
