#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "drbeta/core.hpp"
#include "drbeta/rib.hpp"
#include "drbeta/sim.hpp"

namespace drbeta::io {

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite.
std::string format_double(double v);
/// Inverse of format_double; throws InvalidArgument on junk.
double parse_double(const std::string& s);

/// `date,index,logp1,logp2`, one row per grid point.
void write_panel_csv(std::ostream& out, const PricePanel& panel);
void write_panel_csv(const std::string& path, const PricePanel& panel);
/// Days keep the order of first appearance; indices must run 0..m_i.
PricePanel read_panel_csv(std::istream& in, const std::string& source);
PricePanel read_panel_csv(const std::string& path);

/// `day,rib,avar,estimator_tag`.
void write_rib_csv(const std::string& path, const rib::RIBSeries& series);
rib::RIBSeries read_rib_csv(const std::string& path);

/// A named numeric column plus the first column as labels.
struct Column {
  std::vector<std::string> labels;
  std::vector<double> values;
};
/// `column` empty picks "rib", then "forecast", then the last column.
Column read_column_csv(const std::string& path, const std::string& column = "");

/// Header row then rows of labels and numeric columns.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::string>& labels,
                     const std::vector<std::vector<double>>& columns);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

/// 64-bit FNV-1a of a byte string / file, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);
std::string file_hash(const std::string& path);

/// latent.csv, observed.csv, spot_beta.csv, ibeta.csv and manifest.json in
/// `dir`. The manifest is `config` plus file hashes and counters; returns it.
nlohmann::json write_sim_output(const std::string& dir, const sim::SimOutput& out,
                                const nlohmann::json& config);

}  // namespace drbeta::io
