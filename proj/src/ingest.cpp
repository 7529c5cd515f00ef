#include "drbeta/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace drbeta::ingest {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (*b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  return ec == std::errc() && ptr == e;
}

}  // namespace

double parse_time(const std::string& text, double session_open) {
  const std::string t = trim(text);
  if (t.find(':') == std::string::npos) {
    double v = 0.0;
    if (!parse_double(t, v) || !std::isfinite(v)) {
      throw InvalidArgument("cannot parse time '" + text + "'");
    }
    return v;
  }
  int hh = 0, mm = 0;
  double ss = 0.0;
  const auto c1 = t.find(':');
  const auto c2 = t.find(':', c1 + 1);
  if (c2 == std::string::npos) throw InvalidArgument("cannot parse time '" + text + "'");
  const std::string h = t.substr(0, c1), m = t.substr(c1 + 1, c2 - c1 - 1), s = t.substr(c2 + 1);
  auto to_int = [&](const std::string& x, int& out) {
    auto [ptr, ec] = std::from_chars(x.data(), x.data() + x.size(), out);
    return ec == std::errc() && ptr == x.data() + x.size() && !x.empty();
  };
  if (!to_int(h, hh) || !to_int(m, mm) || !parse_double(s, ss) || hh < 0 || hh > 23 || mm < 0 ||
      mm > 59 || ss < 0.0 || ss >= 61.0) {
    throw InvalidArgument("cannot parse time '" + text + "'");
  }
  return hh * 3600.0 + mm * 60.0 + ss - session_open;
}

std::vector<TickSeries> load_ticks(std::istream& in, const std::string& source,
                                   const std::string& symbol, const LoadOptions& options,
                                   LoadReport* report) {
  if (!(options.session_length > 0.0)) throw InvalidArgument("load_ticks: session_length must be > 0");
  LoadReport rep;
  std::string line;
  long long lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw InvalidArgument(source + ":" + std::to_string(lineno) + ": " + msg);
  };
  int ci_date = -1, ci_time = -1, ci_price = -1;
  std::size_t ncols = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cols = split_csv(line);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] == "date") ci_date = static_cast<int>(i);
      if (cols[i] == "time") ci_time = static_cast<int>(i);
      if (cols[i] == "price") ci_price = static_cast<int>(i);
    }
    ncols = cols.size();
    break;
  }
  if (ci_date < 0 || ci_time < 0 || ci_price < 0) fail("header must contain date,time,price");

  std::vector<TickSeries> days;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<long long> last_line;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cols = split_csv(line);
    if (cols.size() != ncols) {
      fail("expected " + std::to_string(ncols) + " columns, got " + std::to_string(cols.size()));
    }
    ++rep.rows;
    const std::string& date = cols[static_cast<std::size_t>(ci_date)];
    if (date.empty()) fail("empty date");
    double t = 0.0, price = 0.0;
    try {
      t = parse_time(cols[static_cast<std::size_t>(ci_time)], options.session_open);
    } catch (const InvalidArgument& e) {
      fail(e.what());
    }
    if (!parse_double(cols[static_cast<std::size_t>(ci_price)], price) || !std::isfinite(price)) {
      fail("cannot parse price '" + cols[static_cast<std::size_t>(ci_price)] + "'");
    }
    if (!(price > 0.0)) fail("price must be positive, got " + cols[static_cast<std::size_t>(ci_price)]);
    auto it = index.find(date);
    if (it == index.end()) {
      it = index.emplace(date, days.size()).first;
      TickSeries ts;
      ts.date = date;
      ts.symbol = symbol;
      ts.session_length = options.session_length;
      days.push_back(std::move(ts));
      last_line.push_back(0);
    }
    TickSeries& d = days[it->second];
    if (t < 0.0 || t > options.session_length) {
      ++rep.outside_session;
      continue;
    }
    if (!d.timestamps.empty()) {
      const double prev = d.timestamps.back();
      if (t == prev) {
        d.prices.back() = price;
        ++rep.duplicates_collapsed;
        last_line[it->second] = lineno;
        continue;
      }
      if (t < prev) {
        fail("timestamp decreases within date " + date + " (previous row at line " +
             std::to_string(last_line[it->second]) + ")");
      }
    }
    d.timestamps.push_back(t);
    d.prices.push_back(price);
    last_line[it->second] = lineno;
  }
  if (report) *report = rep;
  return days;
}

std::vector<TickSeries> load_ticks(const std::string& path, const std::string& symbol,
                                   const LoadOptions& options, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open tick file '" + path + "'");
  return load_ticks(in, path, symbol, options, report);
}

std::vector<double> previous_tick(const TickSeries& ticks, int m) {
  if (m < 1) throw InvalidArgument("previous_tick: m must be >= 1");
  if (ticks.timestamps.size() != ticks.prices.size()) {
    throw InvalidArgument("previous_tick: timestamps and prices differ in length");
  }
  const double first = ticks.session_length / m;
  if (ticks.timestamps.empty() || ticks.timestamps.front() > first) {
    throw ComputationError("no trade at or before the first grid time " + std::to_string(first) + "s");
  }
  std::vector<double> out(static_cast<std::size_t>(m));
  std::size_t k = 0;
  for (int j = 1; j <= m; ++j) {
    const double t = ticks.session_length * j / m;
    while (k + 1 < ticks.timestamps.size() && ticks.timestamps[k + 1] <= t) ++k;
    out[static_cast<std::size_t>(j - 1)] = std::log(ticks.prices[k]);
  }
  return out;
}

SubsampleResult subsample(const std::vector<TickSeries>& days, int m, int min_ticks) {
  SubsampleResult res;
  for (const auto& d : days) {
    if (static_cast<int>(d.size()) < min_ticks) {
      res.rejected.emplace_back(d.date, std::to_string(d.size()) + " ticks, need at least " +
                                            std::to_string(min_ticks));
      continue;
    }
    try {
      res.days.push_back({d.date, previous_tick(d, m)});
    } catch (const ComputationError& e) {
      res.rejected.emplace_back(d.date, e.what());
    }
  }
  return res;
}

AlignResult align_pair(const std::vector<DaySeries>& market, const std::vector<DaySeries>& asset) {
  std::map<std::string, const DaySeries*> by_date;
  for (const auto& a : asset) by_date[a.date] = &a;
  std::vector<std::vector<double>> d1, d2;
  std::vector<std::string> labels;
  AlignResult res;
  std::map<std::string, bool> matched;
  for (const auto& mk : market) {
    auto it = by_date.find(mk.date);
    if (it == by_date.end()) {
      res.dropped.push_back(mk.date);
      continue;
    }
    if (it->second->logp.size() != mk.logp.size()) {
      throw InvalidArgument("align_pair: grid sizes differ on " + mk.date + " (" +
                            std::to_string(mk.logp.size()) + " vs " +
                            std::to_string(it->second->logp.size()) + ")");
    }
    matched[mk.date] = true;
    d1.push_back(mk.logp);
    d2.push_back(it->second->logp);
    labels.push_back(mk.date);
  }
  for (const auto& a : asset) {
    if (!matched.count(a.date)) res.dropped.push_back(a.date);
  }
  if (d1.empty()) throw InvalidArgument("align_pair: no common dates");
  res.panel = PricePanel::from_days(d1, d2, PanelKind::observed, std::move(labels));
  return res;
}

IngestResult ingest_pair(const std::string& market_path, const std::string& asset_path, int m,
                         const LoadOptions& options) {
  const TuningConfig cfg = tuning_from_m(m - 1);
  const int min_ticks = 2 * cfg.k_m + 2;
  IngestResult out;
  auto side = [&](const std::string& path, const std::string& name) {
    LoadReport rep;
    const auto days = load_ticks(path, name, options, &rep);
    std::ostringstream os;
    os << name << ": " << rep.rows << " rows, " << days.size() << " dates, "
       << rep.duplicates_collapsed << " duplicate timestamps collapsed, " << rep.outside_session
       << " rows outside the session";
    out.log.push_back(os.str());
    auto sub = subsample(days, m, min_ticks);
    for (const auto& [date, why] : sub.rejected) {
      out.log.push_back(name + ": rejected " + date + ": " + why);
    }
    return sub.days;
  };
  const auto mk = side(market_path, "market");
  const auto as = side(asset_path, "asset");
  auto al = align_pair(mk, as);
  for (const auto& d : al.dropped) out.log.push_back("dropped " + d + ": not present in both series");
  out.panel = std::move(al.panel);
  return out;
}

}  // namespace drbeta::ingest
