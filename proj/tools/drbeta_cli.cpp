#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "drbeta/acceptance.hpp"
#include "drbeta/ingest.hpp"
#include "drbeta/io.hpp"
#include "drbeta/model.hpp"
#include "drbeta/montecarlo.hpp"
#include "drbeta/pipeline.hpp"
#include "drbeta/preavg.hpp"
#include "drbeta/rib.hpp"
#include "drbeta/rng.hpp"
#include "drbeta/sim.hpp"

#ifndef DRBETA_DEFAULT_GOLDEN
#define DRBETA_DEFAULT_GOLDEN ""
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace drbeta;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Command parameters: defaults, then the config file, then explicit flags.
struct Params {
  CLI::App* app = nullptr;
  std::string name;
  json defaults = json::object();
  std::map<std::string, std::string> text;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::Option*> options;

  void opt(const std::string& key, json def, const std::string& help) {
    defaults[key] = def;
    std::string flag = "--" + key;
    for (auto& c : flag) c = c == '_' ? '-' : c;
    if (def.is_boolean()) {
      options[key] = app->add_flag(flag, flags[key], help);
    } else {
      options[key] = app->add_option(flag, text[key], help);
    }
  }

  // Object-valued keys are settable only from the config file.
  void block(const std::string& key, json def) { defaults[key] = std::move(def); }

  json resolve(const std::string& config_path) const {
    json p = defaults;
    if (!config_path.empty()) {
      json cfg;
      try {
        cfg = io::read_json(config_path);
      } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
      }
      if (cfg.contains(name) && cfg[name].is_object()) cfg = cfg[name];
      if (!cfg.is_object()) throw UsageError(config_path + ": config must be a JSON object");
      for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        if (!p.contains(it.key())) {
          throw UsageError(config_path + ": unknown key '" + it.key() + "' for " + name);
        }
        p[it.key()] = it.value();
      }
    }
    for (const auto& [key, o] : options) {
      if (o->count() == 0) continue;
      const json& d = defaults.at(key);
      if (d.is_boolean()) {
        p[key] = flags.at(key);
        continue;
      }
      const std::string& s = text.at(key);
      try {
        if (d.is_number_integer()) {
          std::size_t pos = 0;
          const long long v = std::stoll(s, &pos);
          if (pos != s.size()) throw std::invalid_argument(s);
          p[key] = v;
        } else if (d.is_number()) {
          p[key] = io::parse_double(s);
        } else {
          p[key] = s;
        }
      } catch (const std::exception&) {
        throw UsageError("--" + key + ": cannot parse '" + s + "'");
      }
    }
    return p;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

mc::Design design_from(const json& p) {
  mc::Design d;
  try {
    d.dr = p.at("dr").get<sim::DRBetaParams>();
    d.vol = p.at("vol").get<sim::VolParams>();
    d.noise = p.at("noise").get<sim::NoiseParams>();
    d.init = p.at("init").get<sim::InitialState>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad simulation parameters: ") + e.what());
  }
  return d;
}

void add_design_blocks(Params& p) {
  const mc::Design d;
  p.block("dr", d.dr);
  p.block("vol", d.vol);
  p.block("noise", d.noise);
  p.block("init", d.init);
}

int cmd_simulate(const json& p) {
  const mc::Design d = design_from(p);
  const int m = p.at("m").get<int>(), n = p.at("n").get<int>(), reps = p.at("reps").get<int>();
  const std::string out = p.at("out").get<std::string>();
  if (out.empty()) throw UsageError("simulate: --out is required");
  if (m < 1 || n < 1 || reps < 1) throw UsageError("simulate: m, n and reps must be >= 1");
  const auto seed = p.at("seed").get<std::uint64_t>();
  sim::SimOptions opt;
  opt.refinement = p.at("refinement").get<int>();
  const std::function<int(int)> fn = [&](int r) {
    const auto rep_seed = derive_seed(seed, static_cast<std::uint64_t>(r), "sim");
    const auto o = sim::simulate(d.dr, d.vol, d.noise, TimeGrid{m, n}, d.init, rep_seed, opt);
    json cfg = p;
    cfg["replication"] = r;
    cfg["replication_seed"] = rep_seed;
    char name[32];
    std::snprintf(name, sizeof name, "rep_%05d", r);
    io::write_sim_output(reps == 1 ? out : (fs::path(out) / name).string(), o, cfg);
    return 0;
  };
  const auto res = mc::run_replications<int>(reps, p.at("threads").get<int>(), fn);
  int failed = 0;
  for (std::size_t r = 0; r < res.size(); ++r) {
    if (!res[r].ok) {
      ++failed;
      std::cerr << "replication " << r << " failed: " << res[r].error << "\n";
    }
  }
  std::cout << "wrote " << (reps - failed) << " replication(s) to " << out << "\n";
  return failed ? 1 : 0;
}

int cmd_rib(const json& p) {
  PricePanel panel;
  const std::string panel_path = p.at("panel").get<std::string>();
  const std::string sim_dir = p.at("sim_dir").get<std::string>();
  const std::string mk = p.at("market_ticks").get<std::string>();
  const std::string as = p.at("asset_ticks").get<std::string>();
  const int sources = !panel_path.empty() + !sim_dir.empty() + (!mk.empty() || !as.empty());
  if (sources != 1) throw UsageError("rib: give exactly one of --panel, --sim-dir, or --market-ticks/--asset-ticks");
  if (!panel_path.empty()) {
    panel = io::read_panel_csv(panel_path);
  } else if (!sim_dir.empty()) {
    panel = io::read_panel_csv((fs::path(sim_dir) / "observed.csv").string());
  } else {
    if (mk.empty() || as.empty()) throw UsageError("rib: both --market-ticks and --asset-ticks are needed");
    ingest::LoadOptions lo;
    lo.session_length = p.at("session_length").get<double>();
    const auto ing = ingest::ingest_pair(mk, as, p.at("grid").get<int>(), lo);
    for (const auto& l : ing.log) std::cerr << l << "\n";
    panel = ing.panel;
  }
  if (panel.n_days() == 0) throw UsageError("rib: panel is empty");
  const std::string out = p.at("out").get<std::string>();
  if (out.empty()) throw UsageError("rib: --out is required");

  std::vector<rib::Estimator> est;
  for (const auto& s : split_list(p.at("estimators").get<std::string>())) {
    est.push_back(rib::estimator_from_string(s));
  }
  if (est.empty()) throw UsageError("rib: --estimators is empty");
  json overrides = p.at("tuning");
  const std::string mode = p.at("threshold_mode").get<std::string>();
  if (!mode.empty()) overrides["threshold_mode"] = mode;
  // validate overrides up front so config mistakes are usage errors
  for (int d = 0; d < panel.n_days(); ++d) tuning_from_m(panel.day_m(d), overrides).validate_for(panel.day_m(d));
  const rib::TuningProvider tuning = [overrides](int m) { return tuning_from_m(m, overrides); };
  const auto series = rib::estimate_series(panel, tuning, default_kernel(), est, p.at("threads").get<int>());
  fs::create_directories(out);
  int failures = 0;
  for (const auto& s : series) {
    std::string name = rib::to_string(s.estimator_tag);
    for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    io::write_rib_csv((fs::path(out) / (name + ".csv")).string(), s);
    for (const auto& [day, why] : s.failures) {
      std::cerr << rib::to_string(s.estimator_tag) << " day " << panel.label(day) << ": " << why << "\n";
      ++failures;
    }
  }
  // per-block detail for the manifest and the optional dump
  const std::string blocks = p.at("blocks_csv").get<std::string>();
  std::vector<std::string> labels;
  std::vector<std::vector<double>> cols(11);
  long long inc_terms = 0, noise_terms = 0, r2_floored = 0, theta_floored = 0;
  long long inc_clipped[3] = {0, 0, 0}, noise_clipped[3] = {0, 0, 0};
  json tunings = json::object();
  for (int d = 0; d < panel.n_days(); ++d) {
    const auto cfg = tuning(panel.day_m(d));
    tunings[std::to_string(panel.day_m(d))] = cfg;
    rib::DayResult dr;
    try {
      dr = rib::rib_day(panel.day(d), cfg, default_kernel());
    } catch (const ComputationError&) {
      continue;  // already reported through the series failures
    }
    r2_floored += dr.r2_floored;
    for (const auto& b : dr.blocks) {
      inc_terms += b.cov.truncation.increment_terms;
      noise_terms += b.cov.truncation.noise_terms;
      for (int i = 0; i < 3; ++i) {
        inc_clipped[i] += b.cov.truncation.increment_clipped[static_cast<std::size_t>(i)];
        noise_clipped[i] += b.cov.truncation.noise_clipped[static_cast<std::size_t>(i)];
      }
      theta_floored += b.noise.floored;
      if (blocks.empty()) continue;
      labels.push_back(panel.label(d));
      const double row[11] = {static_cast<double>(b.cov.block_start), b.cov.sigma11, b.cov.sigma12,
                              b.cov.sigma22, b.noise.theta11, b.noise.theta12, b.noise.theta22,
                              b.beta, b.debias, b.r2, static_cast<double>(b.cov.truncation.increment_clipped[0])};
      for (int c = 0; c < 11; ++c) cols[static_cast<std::size_t>(c)].push_back(row[c]);
    }
  }
  if (!blocks.empty()) {
    io::write_table_csv(blocks, {"day", "block_start", "sigma11", "sigma12", "sigma22", "theta11", "theta12",
                                 "theta22", "beta", "debias", "r2", "clipped11"},
                        labels, cols);
  }
  const auto& k = default_kernel();
  json manifest = {{"config", p},
                   {"days", panel.n_days()},
                   {"tuning", tunings},
                   {"kernel", {{"name", k.g.name}, {"psi0", k.psi0}, {"psi1", k.psi1}, {"phi00", k.phi00},
                               {"phi01", k.phi01}, {"phi11", k.phi11}, {"quadrature_points", k.quadrature_points}}},
                   {"truncation", {{"increment_terms", inc_terms},
                                   {"increment_clipped", {inc_clipped[0], inc_clipped[1], inc_clipped[2]}},
                                   {"noise_terms", noise_terms},
                                   {"noise_clipped", {noise_clipped[0], noise_clipped[1], noise_clipped[2]}},
                                   {"theta_floored", theta_floored},
                                   {"r2_floored", r2_floored}}},
                   {"failures", failures}};
  json files = json::object();
  for (const auto& s : series) {
    std::string name = rib::to_string(s.estimator_tag);
    for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    files[name + ".csv"] = io::file_hash((fs::path(out) / (name + ".csv")).string());
  }
  manifest["files"] = files;
  io::write_json((fs::path(out) / "manifest.json").string(), manifest);
  std::cout << "estimated " << panel.n_days() << " day(s) into " << out << "\n";
  return failures ? 1 : 0;
}

model::FitOptions fit_options(const json& p) {
  model::FitOptions o;
  o.grid_starts = p.at("starts").get<int>();
  o.init = model::init_policy_from_string(p.at("init").get<std::string>());
  if (o.grid_starts < 0) throw UsageError("--starts must be >= 0");
  return o;
}

std::vector<double> load_series(const std::string& path, const std::string& column,
                                std::vector<std::string>* labels = nullptr) {
  if (path.empty()) throw UsageError("an input series path is required");
  auto c = io::read_column_csv(path, column);
  if (labels) *labels = c.labels;
  return c.values;
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    io::write_json(out, j);
  }
}

int cmd_fit(const json& p) {
  const auto x = load_series(p.at("rib").get<std::string>(), p.at("column").get<std::string>());
  auto opt = fit_options(p);
  int pp = p.at("p").get<int>(), qq = p.at("q").get<int>();
  json report;
  if (p.at("bic").get<bool>()) {
    const auto b = model::bic_select(x, p.at("max_p").get<int>(), p.at("max_q").get<int>(), opt);
    json table = json::array();
    for (const auto& c : b.table) {
      json row = {{"p", c.p}, {"q", c.q}, {"k", c.k}, {"ok", c.ok}};
      if (c.ok) {
        row["rss"] = c.rss;
        row["bic"] = c.bic;
      } else {
        row["error"] = c.error;
      }
      table.push_back(row);
    }
    report["bic_table"] = table;
    pp = b.p;
    qq = b.q;
  }
  const auto f = model::fit(x, pp, qq, opt);
  json j = model::fit_to_json(f);
  for (auto it = report.begin(); it != report.end(); ++it) j[it.key()] = it.value();
  emit(j, p.at("out").get<std::string>());
  return 0;
}

int cmd_forecast(const json& p) {
  std::vector<std::string> labels;
  const auto x = load_series(p.at("rib").get<std::string>(), p.at("column").get<std::string>(), &labels);
  const auto method = pipeline::forecaster_from_string(p.at("method").get<std::string>());
  const auto r = pipeline::rolling_forecast(x, labels, p.at("window").get<int>(), method, p.at("p").get<int>(),
                                            p.at("q").get<int>(), fit_options(p));
  const std::string out = p.at("out").get<std::string>();
  if (out.empty()) throw UsageError("forecast: --out is required");
  io::write_table_csv(out, {"day", "forecast", "target"}, r.labels, {r.forecast, r.target});
  std::cout << "wrote " << r.forecast.size() << " forecasts to " << out;
  if (r.failures) std::cout << " (" << r.failures << " windows failed to fit)";
  std::cout << "\n";
  return r.failures ? 1 : 0;
}

int cmd_evaluate(const json& p) {
  const auto pred = load_series(p.at("pred").get<std::string>(), p.at("pred_column").get<std::string>());
  const auto target = load_series(p.at("target").get<std::string>(), p.at("target_column").get<std::string>());
  const auto metric = model::metric_from_string(p.at("metric").get<std::string>());
  json j = {{"metric", p.at("metric")}, {"n", pred.size()}, {"value", model::evaluate(pred, target, metric)}};
  const int lags = p.at("acf_lags").get<int>();
  if (lags > 0) {
    const auto a = model::residual_acf_diagnostic(target, pred, lags);
    j["regression"] = {{"a", a.a}, {"b", a.b}, {"degenerate", a.degenerate}, {"acf", a.acf}};
  }
  emit(j, p.at("out").get<std::string>());
  return 0;
}

int cmd_selftest(const json& p) {
  const std::string golden = p.at("golden").get<std::string>();
  const std::string write = p.at("write_golden").get<std::string>();
  if (!write.empty()) {
    const auto dir = fs::temp_directory_path() / "drbeta_golden";
    const auto m = pipeline::run_chain(pipeline::ChainConfig{}, dir.string());
    fs::remove_all(dir);
    io::write_json(write, m);
    std::cout << "wrote golden manifest to " << write << "\n";
    return 0;
  }
  auto scale = p.at("full").get<bool>() ? acceptance::Scale::full() : acceptance::Scale::quick();
  const int threads = p.at("threads").get<int>();
  if (threads > 0) scale.threads = threads;
  acceptance::Suite suite(scale, golden);
  std::vector<int> ids;
  for (const auto& s : split_list(p.at("only").get<std::string>())) {
    try {
      ids.push_back(std::stoi(s));
    } catch (const std::exception&) {
      throw UsageError("--only: bad check number '" + s + "'");
    }
  }
  if (ids.empty()) {
    for (int i = 1; i <= acceptance::Suite::kCount; ++i) ids.push_back(i);
  }
  int failed = 0;
  for (int id : ids) {
    if (id < 1 || id > acceptance::Suite::kCount) throw UsageError("--only: no check numbered " + std::to_string(id));
    const auto r = suite.run(id);
    std::cout << acceptance::format_line(r) << std::endl;
    if (!r.passed) ++failed;
  }
  std::cout << (ids.size() - static_cast<std::size_t>(failed)) << "/" << ids.size() << " checks passed\n";
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic realized beta: simulation, estimation, fitting and forecasting"};
  app.require_subcommand(1);
  std::string config;
  app.add_option("--config", config, "JSON config file; flags override its values");

  std::map<std::string, Params> cmds;
  auto make = [&](const std::string& name, const std::string& help) -> Params& {
    Params& p = cmds[name];
    p.name = name;
    p.app = app.add_subcommand(name, help);
    p.app->add_option("--config", config, "JSON config file; flags override its values");
    return p;
  };

  Params& sim_p = make("simulate", "simulate panels with the jump-diffusion and noise design");
  sim_p.opt("m", 2340, "observations per day");
  sim_p.opt("n", 125, "days");
  sim_p.opt("reps", 1, "replications");
  sim_p.opt("seed", 1, "master seed");
  sim_p.opt("refinement", 1, "Euler substeps per tick");
  sim_p.opt("threads", mc::default_threads(), "worker threads");
  sim_p.opt("out", "", "output directory");
  add_design_blocks(sim_p);

  Params& rib_p = make("rib", "estimate daily integrated betas");
  rib_p.opt("panel", "", "panel CSV (date,index,logp1,logp2)");
  rib_p.opt("sim_dir", "", "simulation output directory (uses observed.csv)");
  rib_p.opt("market_ticks", "", "market tick CSV (date,time,price)");
  rib_p.opt("asset_ticks", "", "asset tick CSV (date,time,price)");
  rib_p.opt("grid", 390, "grid points per day for tick input");
  rib_p.opt("session_length", 23400.0, "session length in seconds for tick input");
  rib_p.opt("estimators", "rib", "comma list of rib, chen, prvb");
  rib_p.opt("threshold_mode", "", "data_driven, absolute or power_law");
  rib_p.opt("threads", mc::default_threads(), "worker threads");
  rib_p.opt("blocks_csv", "", "optional per-block dump of the RIB estimates");
  rib_p.opt("out", "", "output directory");
  rib_p.block("tuning", json::object());

  Params& fit_p = make("fit", "fit the low-frequency model to a daily series");
  fit_p.opt("rib", "", "input series CSV");
  fit_p.opt("column", "", "column to read (default rib)");
  fit_p.opt("p", 1, "order p");
  fit_p.opt("q", 1, "order q");
  fit_p.opt("bic", false, "select (p,q) by BIC first");
  fit_p.opt("max_p", 3, "largest p in the BIC grid");
  fit_p.opt("max_q", 3, "largest q in the BIC grid");
  fit_p.opt("starts", 8, "grid starting points");
  fit_p.opt("init", "sample_mean", "initialization: sample_mean, zero, unconditional");
  fit_p.opt("out", "", "output JSON (stdout when empty)");

  Params& fc_p = make("forecast", "rolling one-step forecasts");
  fc_p.opt("rib", "", "input series CSV");
  fc_p.opt("column", "", "column to read (default rib)");
  fc_p.opt("window", 500, "in-sample window in days");
  fc_p.opt("method", "drbeta", "drbeta or arma");
  fc_p.opt("p", 1, "order p");
  fc_p.opt("q", 1, "order q");
  fc_p.opt("starts", 8, "grid starting points");
  fc_p.opt("init", "sample_mean", "initialization: sample_mean, zero, unconditional");
  fc_p.opt("out", "", "output CSV");

  Params& ev_p = make("evaluate", "compare a forecast series with a target series");
  ev_p.opt("pred", "", "forecast CSV");
  ev_p.opt("target", "", "target CSV");
  ev_p.opt("pred_column", "", "forecast column");
  ev_p.opt("target_column", "", "target column");
  ev_p.opt("metric", "msfe", "msfe or mape");
  ev_p.opt("acf_lags", 0, "also regress target on forecast and report residual ACF");
  ev_p.opt("out", "", "output JSON (stdout when empty)");

  Params& st_p = make("selftest", "run the acceptance checks");
  st_p.opt("golden", std::string(DRBETA_DEFAULT_GOLDEN), "golden manifest of the fixed-seed chain");
  st_p.opt("full", false, "full replication counts");
  st_p.opt("only", "", "comma list of check numbers");
  st_p.opt("threads", 0, "worker threads (0 = all cores)");
  st_p.opt("write_golden", "", "regenerate the golden manifest at this path and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    for (auto& [name, p] : cmds) {
      if (!p.app->parsed()) continue;
      const json params = p.resolve(config);
      if (name == "simulate") return cmd_simulate(params);
      if (name == "rib") return cmd_rib(params);
      if (name == "fit") return cmd_fit(params);
      if (name == "forecast") return cmd_forecast(params);
      if (name == "evaluate") return cmd_evaluate(params);
      if (name == "selftest") return cmd_selftest(params);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: bad configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
