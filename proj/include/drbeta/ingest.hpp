#pragma once

#include <istream>
#include <string>
#include <vector>

#include "drbeta/core.hpp"

namespace drbeta::ingest {

/// Trades of one symbol on one date. Timestamps are seconds since the
/// session open and strictly increasing.
struct TickSeries {
  std::string date;
  std::string symbol;
  std::vector<double> timestamps;
  std::vector<double> prices;
  double session_length = 23400.0;

  std::size_t size() const { return timestamps.size(); }
};

struct LoadOptions {
  double session_length = 23400.0;
  /// Clock time of the open, used for HH:MM:SS timestamps.
  double session_open = 9.5 * 3600.0;
};

struct LoadReport {
  long long rows = 0;
  long long duplicates_collapsed = 0;
  long long outside_session = 0;
};

/// Reads `date,time,price` rows (header required, extra columns ignored).
/// Days are returned in order of first appearance. Rows outside
/// [0, session_length] are dropped and counted.
std::vector<TickSeries> load_ticks(std::istream& in, const std::string& source,
                                   const std::string& symbol, const LoadOptions& options = {},
                                   LoadReport* report = nullptr);
std::vector<TickSeries> load_ticks(const std::string& path, const std::string& symbol,
                                   const LoadOptions& options = {},
                                   LoadReport* report = nullptr);

/// Seconds since the open from either seconds-with-fraction or
/// HH:MM:SS[.ffffff]. Throws InvalidArgument on malformed input.
double parse_time(const std::string& text, double session_open);

/// Log price of the last trade at or before each grid time
/// session_length * j / m, j = 1..m. Throws ComputationError when no
/// trade precedes the first grid time.
std::vector<double> previous_tick(const TickSeries& ticks, int m);

struct DaySeries {
  std::string date;
  std::vector<double> logp;
};

struct SubsampleResult {
  std::vector<DaySeries> days;
  /// (date, reason) for every rejected day.
  std::vector<std::pair<std::string, std::string>> rejected;
};

/// Previous-tick series for every day; days with fewer than min_ticks
/// trades or no trade before the first grid time are rejected.
SubsampleResult subsample(const std::vector<TickSeries>& days, int m, int min_ticks);

struct AlignResult {
  PricePanel panel;
  std::vector<std::string> dropped;
};

/// Panel over the dates present in both inputs, in the market's order.
/// A day's grids must agree in length.
AlignResult align_pair(const std::vector<DaySeries>& market, const std::vector<DaySeries>& asset);

struct IngestResult {
  PricePanel panel;
  std::vector<std::string> log;
};

/// load_ticks + subsample + align_pair for a market and an asset file.
/// The minimum tick count is 2 k_m + 2 for the grid size m.
IngestResult ingest_pair(const std::string& market_path, const std::string& asset_path, int m,
                         const LoadOptions& options = {});

}  // namespace drbeta::ingest
