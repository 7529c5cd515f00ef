#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "drbeta/ingest.hpp"
#include "drbeta/io.hpp"

using namespace drbeta;
using namespace drbeta::ingest;

namespace {

std::vector<TickSeries> load(const std::string& text, LoadReport* rep = nullptr) {
  std::istringstream in(text);
  return load_ticks(in, "ticks.csv", "X", {}, rep);
}

}  // namespace

TEST_CASE("well-formed file") {
  const auto d = load("date,time,price\n2020-01-02,1.5,100\n2020-01-02,2.0,101\n2020-01-02,3.25,99.5\n");
  REQUIRE(d.size() == 1);
  CHECK(d[0].size() == 3);
  CHECK(d[0].timestamps[2] == 3.25);
  CHECK(d[0].date == "2020-01-02");
}

TEST_CASE("columns found by name and extra columns ignored") {
  const auto d = load("price,venue,time,date\n100,A,09:30:01.5,d1\n101,B,09:30:02,d1\n");
  REQUIRE(d.size() == 1);
  CHECK(d[0].timestamps[0] == doctest::Approx(1.5));
  CHECK(d[0].prices[1] == 101.0);
}

TEST_CASE("duplicate timestamps keep the last trade") {
  LoadReport rep;
  const auto d = load("date,time,price\nd,5,100.0\nd,5,100.5\nd,6,101\n", &rep);
  REQUIRE(d[0].size() == 2);
  CHECK(d[0].prices[0] == 100.5);
  CHECK(rep.duplicates_collapsed == 1);
}

TEST_CASE("malformed rows name the line") {
  CHECK_THROWS_WITH_AS(load("date,time,price\nd,1,100\nd,2,-3\n"), doctest::Contains("ticks.csv:3"), InvalidArgument);
  CHECK_THROWS_WITH_AS(load("date,time,price\nd,1,abc\n"), doctest::Contains("ticks.csv:2"), InvalidArgument);
  CHECK_THROWS_WITH_AS(load("date,time,price\nd,5,100\nd,4,100\n"), doctest::Contains("ticks.csv:3"), InvalidArgument);
  CHECK_THROWS_AS(load("date,price\nd,100\n"), InvalidArgument);
}

TEST_CASE("rows outside the session are dropped") {
  LoadReport rep;
  const auto d = load("date,time,price\nd,-5,100\nd,5,100\nd,23401,100\n", &rep);
  CHECK(d[0].size() == 1);
  CHECK(rep.outside_session == 2);
}

TEST_CASE("time parsing") {
  CHECK(parse_time("12.25", 34200) == 12.25);
  CHECK(parse_time("09:30:00", 34200) == 0.0);
  CHECK(parse_time("10:00:00.5", 34200) == doctest::Approx(1800.5));
  CHECK_THROWS_AS(parse_time("9:7", 34200), InvalidArgument);
  CHECK_THROWS_AS(parse_time("", 34200), InvalidArgument);
}

TEST_CASE("previous tick") {
  TickSeries t;
  t.session_length = 4.0;
  t.timestamps = {0.4, 1.7};
  t.prices = {100.0, 100.5};
  const auto p = previous_tick(t, 4);
  REQUIRE(p.size() == 4);
  CHECK(p[0] == std::log(100.0));
  CHECK(p[1] == std::log(100.5));
  CHECK(p[3] == std::log(100.5));

  TickSeries open;
  open.session_length = 10.0;
  open.timestamps = {0.0};
  open.prices = {50.0};
  for (double v : previous_tick(open, 5)) CHECK(v == std::log(50.0));

  TickSeries late;
  late.session_length = 10.0;
  late.timestamps = {3.0};
  late.prices = {50.0};
  CHECK_THROWS_AS(previous_tick(late, 5), ComputationError);
}

TEST_CASE("previous tick is idempotent on regular data") {
  TickSeries t;
  t.session_length = 10.0;
  for (int j = 1; j <= 10; ++j) {
    t.timestamps.push_back(j);
    t.prices.push_back(100.0 + j);
  }
  const auto p = previous_tick(t, 10);
  for (int j = 0; j < 10; ++j) CHECK(p[static_cast<std::size_t>(j)] == std::log(101.0 + j));
  TickSeries again = t;
  for (std::size_t j = 0; j < p.size(); ++j) again.prices[j] = std::exp(p[j]);
  const auto q = previous_tick(again, 10);
  for (std::size_t j = 0; j < p.size(); ++j) CHECK(q[j] == doctest::Approx(p[j]).epsilon(1e-15));
}

TEST_CASE("subsample rejects thin days") {
  TickSeries a;
  a.date = "a";
  a.session_length = 10.0;
  a.timestamps = {0.0, 5.0};
  a.prices = {1.0, 2.0};
  TickSeries b = a;
  b.date = "b";
  b.timestamps = {0.0, 1.0, 2.0, 3.0};
  b.prices = {1.0, 2.0, 3.0, 4.0};
  const auto s = subsample({a, b}, 5, 3);
  REQUIRE(s.days.size() == 1);
  CHECK(s.days[0].date == "b");
  REQUIRE(s.rejected.size() == 1);
  CHECK(s.rejected[0].first == "a");
}

TEST_CASE("align pair") {
  const std::vector<DaySeries> m = {{"d1", {1, 2, 3}}, {"d2", {1, 2, 3}}, {"d3", {4, 5, 6}}};
  const std::vector<DaySeries> a = {{"d1", {7, 8, 9}}, {"d3", {1, 1, 1}}};
  const auto r = align_pair(m, a);
  CHECK(r.panel.n_days() == 2);
  CHECK(r.panel.label(1) == "d3");
  REQUIRE(r.dropped.size() == 1);
  CHECK(r.dropped[0].find("d2") != std::string::npos);
  CHECK(align_pair(m, m).panel.n_days() == 3);
  CHECK_THROWS_AS(align_pair(m, {{"d1", {1, 2}}}), InvalidArgument);
  CHECK_THROWS_AS(align_pair(m, {{"x", {1, 2, 3}}}), InvalidArgument);
}

TEST_CASE("ingest pair from files") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "drbeta_ingest_test";
  fs::create_directories(dir);
  const int n = 800;
  for (const char* name : {"m.csv", "a.csv"}) {
    std::ofstream out(dir / name);
    out << "date,time,price\n";
    for (const char* day : {"2021-03-01", "2021-03-02"}) {
      for (int i = 0; i < n; ++i) {
        out << day << "," << (i * 23400.0 / n) << "," << (100.0 + std::sin(i * (name[0] == 'm' ? 0.1 : 0.2))) << "\n";
      }
    }
  }
  const auto r = ingest_pair((dir / "m.csv").string(), (dir / "a.csv").string(), 390);
  CHECK(r.panel.n_days() == 2);
  CHECK(r.panel.day_m(0) == 389);
  fs::remove_all(dir);
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, -2.5e-300, 1.0 / 3.0, 123456789.0}) CHECK(io::parse_double(io::format_double(v)) == v);
  CHECK(io::format_double(NAN) == "nan");
  CHECK(std::isnan(io::parse_double("NA")));
  CHECK(std::isinf(io::parse_double("-inf")));
  CHECK_THROWS_AS(io::parse_double("1.2x"), InvalidArgument);
}

TEST_CASE("panel csv round trip") {
  const auto p = PricePanel::from_days({{1, 2, 3}, {4, 5, 6, 7}}, {{0, 0, 1}, {1, 1, 1, 2}}, PanelKind::observed,
                                       {"x", "y"});
  std::stringstream s;
  io::write_panel_csv(s, p);
  const auto q = io::read_panel_csv(s, "mem");
  CHECK(q.n_days() == 2);
  CHECK(q.day_m(1) == 3);
  CHECK(q.label(1) == "y");
  CHECK(q.day(1).y2[3] == 2.0);
  std::istringstream bad("date,index,logp1,logp2\nx,0,1,1\nx,2,1,1\n");
  CHECK_THROWS_AS(io::read_panel_csv(bad, "mem"), InvalidArgument);
}

TEST_CASE("hashing") {
  CHECK(io::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(io::fnv1a_hex("a") == "af63dc4c8601ec8c");
}
