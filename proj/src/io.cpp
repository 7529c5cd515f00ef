#include "drbeta/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace drbeta::io {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_out(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return in;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<long long> lines;
};

Table read_table(std::istream& in, const std::string& source) {
  Table t;
  std::string line;
  long long n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw InvalidArgument(source + ":" + std::to_string(n) + ": expected " +
                            std::to_string(t.header.size()) + " columns, got " +
                            std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
    t.lines.push_back(n);
  }
  if (t.header.empty()) throw InvalidArgument(source + ": empty file");
  return t;
}

int column_index(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

double cell_double(const Table& t, std::size_t row, int col, const std::string& source) {
  try {
    return parse_double(t.rows[row][static_cast<std::size_t>(col)]);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(source + ":" + std::to_string(t.lines[row]) + ": " + e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  const std::string t = trim(s);
  if (t == "nan" || t == "NaN" || t == "NA" || t.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (t == "inf" || t == "Inf") return kInf;
  if (t == "-inf" || t == "-Inf") return -kInf;
  double v = 0.0;
  const char* b = t.data();
  if (*b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw InvalidArgument("not a number: '" + s + "'");
  }
  return v;
}

void write_panel_csv(std::ostream& out, const PricePanel& panel) {
  out << "date,index,logp1,logp2\n";
  for (int d = 0; d < panel.n_days(); ++d) {
    const DayView v = panel.day(d);
    const std::string label = panel.label(d);
    for (std::size_t i = 0; i < v.y1.size(); ++i) {
      out << label << ',' << i << ',' << format_double(v.y1[i]) << ',' << format_double(v.y2[i]) << '\n';
    }
  }
}

void write_panel_csv(const std::string& path, const PricePanel& panel) {
  auto out = open_out(path);
  write_panel_csv(out, panel);
}

PricePanel read_panel_csv(std::istream& in, const std::string& source) {
  const Table t = read_table(in, source);
  const int cd = column_index(t, "date"), ci = column_index(t, "index");
  const int c1 = column_index(t, "logp1"), c2 = column_index(t, "logp2");
  if (cd < 0 || ci < 0 || c1 < 0 || c2 < 0) {
    throw InvalidArgument(source + ": header must be date,index,logp1,logp2");
  }
  std::vector<std::string> labels;
  std::vector<std::vector<double>> d1, d2;
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& date = t.rows[r][static_cast<std::size_t>(cd)];
    auto it = pos.find(date);
    if (it == pos.end()) {
      it = pos.emplace(date, labels.size()).first;
      labels.push_back(date);
      d1.emplace_back();
      d2.emplace_back();
    }
    const double idx = cell_double(t, r, ci, source);
    if (idx != static_cast<double>(d1[it->second].size())) {
      throw InvalidArgument(source + ":" + std::to_string(t.lines[r]) + ": index " +
                            t.rows[r][static_cast<std::size_t>(ci)] + " out of sequence for " + date);
    }
    d1[it->second].push_back(cell_double(t, r, c1, source));
    d2[it->second].push_back(cell_double(t, r, c2, source));
  }
  if (labels.empty()) throw InvalidArgument(source + ": panel has no rows");
  return PricePanel::from_days(d1, d2, PanelKind::observed, std::move(labels));
}

PricePanel read_panel_csv(const std::string& path) {
  auto in = open_in(path);
  return read_panel_csv(in, path);
}

void write_rib_csv(const std::string& path, const rib::RIBSeries& s) {
  auto out = open_out(path);
  out << "day,rib,avar,estimator_tag\n";
  const std::string tag = rib::to_string(s.estimator_tag);
  for (std::size_t i = 0; i < s.rib.size(); ++i) {
    const std::string label = i < s.labels.size() ? s.labels[i] : std::to_string(i + 1);
    const double av = i < s.avar.size() ? s.avar[i] : std::numeric_limits<double>::quiet_NaN();
    out << label << ',' << format_double(s.rib[i]) << ',' << format_double(av) << ',' << tag << '\n';
  }
}

rib::RIBSeries read_rib_csv(const std::string& path) {
  auto in = open_in(path);
  const Table t = read_table(in, path);
  const int cd = column_index(t, "day"), cr = column_index(t, "rib");
  const int ca = column_index(t, "avar"), ct = column_index(t, "estimator_tag");
  if (cd < 0 || cr < 0) throw InvalidArgument(path + ": header must contain day,rib");
  rib::RIBSeries s;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    s.labels.push_back(t.rows[r][static_cast<std::size_t>(cd)]);
    s.rib.push_back(cell_double(t, r, cr, path));
    s.avar.push_back(ca >= 0 ? cell_double(t, r, ca, path) : std::numeric_limits<double>::quiet_NaN());
    if (ct >= 0 && r == 0) s.estimator_tag = rib::estimator_from_string(t.rows[r][static_cast<std::size_t>(ct)]);
  }
  if (s.rib.empty()) throw InvalidArgument(path + ": series has no rows");
  return s;
}

Column read_column_csv(const std::string& path, const std::string& column) {
  auto in = open_in(path);
  const Table t = read_table(in, path);
  int c = -1;
  if (!column.empty()) {
    c = column_index(t, column);
    if (c < 0) throw InvalidArgument(path + ": no column named '" + column + "'");
  } else {
    c = column_index(t, "rib");
    if (c < 0) c = column_index(t, "forecast");
    if (c < 0) c = static_cast<int>(t.header.size()) - 1;
  }
  Column out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out.labels.push_back(t.rows[r][0]);
    out.values.push_back(cell_double(t, r, c, path));
  }
  return out;
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::string>& labels,
                     const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size() + 1) throw InvalidArgument("write_table_csv: header size mismatch");
  for (const auto& c : columns) {
    if (c.size() != labels.size()) throw InvalidArgument("write_table_csv: column length mismatch");
  }
  auto out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (std::size_t r = 0; r < labels.size(); ++r) {
    out << labels[r];
    for (const auto& c : columns) out << ',' << format_double(c[r]);
    out << '\n';
  }
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_hash(const std::string& path) {
  auto in = open_in(path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a_hex(bytes);
}

nlohmann::json write_sim_output(const std::string& dir, const sim::SimOutput& out,
                                const nlohmann::json& config) {
  fs::create_directories(dir);
  const fs::path base(dir);
  write_panel_csv((base / "latent.csv").string(), out.latent);
  write_panel_csv((base / "observed.csv").string(), out.observed);
  {
    auto f = open_out((base / "spot_beta.csv").string());
    f << "index,beta\n";
    for (std::size_t i = 0; i < out.spot_beta.size(); ++i) f << i << ',' << format_double(out.spot_beta[i]) << '\n';
  }
  {
    auto f = open_out((base / "ibeta.csv").string());
    f << "day,ibeta,h\n";
    for (std::size_t i = 0; i < out.true_ibeta.size(); ++i) {
      f << (i + 1) << ',' << format_double(out.true_ibeta[i]) << ','
        << format_double(i < out.true_h.size() ? out.true_h[i] : std::numeric_limits<double>::quiet_NaN()) << '\n';
    }
  }
  nlohmann::json m = config;
  m["seed"] = out.seed;
  m["next_h"] = format_double(out.next_h);
  m["counters"] = {{"jumps1", out.counters.jumps1},
                   {"jumps2", out.counters.jumps2},
                   {"theta_clamps", out.counters.theta_clamps},
                   {"sigma2_clamps", out.counters.sigma2_clamps}};
  nlohmann::json files = nlohmann::json::object();
  for (const char* name : {"latent.csv", "observed.csv", "spot_beta.csv", "ibeta.csv"}) {
    files[name] = file_hash((base / name).string());
  }
  m["files"] = files;
  write_json((base / "manifest.json").string(), m);
  return m;
}

}  // namespace drbeta::io
