#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "oracles.hpp"
#include "phcollapse/error.hpp"
#include "phcollapse/harness.hpp"

using namespace phc;

namespace {

ExperimentConfig small_config(const std::string& name) {
  ExperimentConfig c = desk_profile();
  c.n_values = {10};
  c.d_values = {5};
  c.null_suite = {{NullFamily::standard_gaussian}};
  c.B = 100;
  c.R = 50;
  c.tau_B = 20;
  c.master_seed = 7;
  c.out_dir = oracle::scratch_dir(name);
  return c;
}

PowerRecord record(const std::string& family, Mechanism m, std::size_t n, double eps, const std::string& test,
                   std::size_t rejections, std::size_t R) {
  PowerRecord r;
  r.family = family;
  r.mechanism = m;
  r.n = n;
  r.d = 5;
  r.epsilon = eps;
  r.test = test;
  r.rejections = rejections;
  r.R = R;
  r.power = static_cast<double>(rejections) / static_cast<double>(R);
  return r;
}

std::string null_csv(const NullTable& t) {
  std::ostringstream s;
  write_null_table_csv(t, s);
  return s.str();
}

std::string power_csv(const std::vector<PowerRecord>& r) {
  std::ostringstream s;
  write_power_csv(r, s);
  return s.str();
}

std::string records_csv(const std::vector<PowerRecord>& r) {
  std::ostringstream s;
  write_power_records_csv(r, s);
  return s.str();
}

double level_bound(double alpha, std::size_t trials) {
  return alpha + 3.0 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(trials));
}

}  // namespace

TEST_CASE("profiles") {
  const auto p = paper_profile();
  CHECK(p.n_values == std::vector<std::size_t>{10, 50, 100});
  CHECK(p.d_values == std::vector<std::size_t>{5, 10, 20});
  CHECK(p.eps_values == std::vector<double>{0.05, 0.1, 0.2, 0.5, 1.0, 1.5, 2.0});
  CHECK(p.B == 200);
  CHECK(p.R == 200);
  CHECK(p.tau_B == 50);
  CHECK(p.tau_level == 0.9);
  CHECK(p.alpha_corrected() == 0.0125);
  CHECK(p.resolved_alternatives().size() == 8);
  const auto d = desk_profile();
  CHECK(d.n_values == std::vector<std::size_t>{10, 50});
  CHECK(d.d_values == std::vector<std::size_t>{5, 10});
  CHECK(d.B == 100);
  CHECK(d.R == 100);
  CHECK(profile_by_name("desk").profile == "desk");
  CHECK_THROWS_AS(profile_by_name("laptop"), config_error);
}

TEST_CASE("settings and config files") {
  auto c = paper_profile();
  apply_setting(c, "n", "10, 20");
  apply_setting(c, "tests", "VR-MTE:q=0,DTM-TP");
  apply_setting(c, "null", "noisy_sphere:sigma=0.3");
  apply_setting(c, "alt", "torus:eps=1.5,k_plane");
  apply_setting(c, "seed", "99");
  apply_setting(c, "workers", "0");
  CHECK(c.n_values == std::vector<std::size_t>{10, 20});
  CHECK(c.tests.size() == 2);
  CHECK(c.tests[0].q == 0);
  CHECK(c.null_suite.size() == 1);
  CHECK(c.alternatives.size() == 2);
  CHECK(c.alternatives[0].eps_given);
  CHECK(c.master_seed == 99);
  CHECK(c.workers == 1);
  CHECK(c.alpha_corrected() == 0.025);
  CHECK(c.tau_map() == std::filesystem::path("results") / "tau_map.csv");
  apply_setting(c, "tau-map", "/tmp/x.csv");
  CHECK(c.tau_map() == std::filesystem::path("/tmp/x.csv"));
  CHECK_THROWS_AS(apply_setting(c, "colour", "red"), config_error);
  CHECK_THROWS(apply_setting(c, "n", "ten"));

  const auto dir = oracle::scratch_dir("config");
  {
    std::ofstream f(dir / "run.cfg");
    f << "# grid\nn = 12\nd = 4, 6  # trailing comment\n\nprofile = desk\nB = 300\n";
  }
  apply_config_file(c, dir / "run.cfg");
  CHECK(c.n_values == std::vector<std::size_t>{12});
  CHECK(c.d_values == std::vector<std::size_t>{4, 6});
  CHECK(c.B == 300);
  {
    std::ofstream f(dir / "bad.cfg");
    f << "n = 12\nthis line is wrong\n";
  }
  try {
    apply_config_file(c, dir / "bad.cfg");
    FAIL("expected a parse error");
  } catch (const parse_error& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(apply_config_file(c, dir / "missing.cfg"), config_error);
}

TEST_CASE("config validation") {
  auto c = paper_profile();
  CHECK_NOTHROW(c.validate());
  c.tests = {parse_test_spec("VR-TP"), parse_test_spec("VR-TP:p=2")};
  CHECK_THROWS_AS(c.validate(), config_error);
  c = paper_profile();
  c.n_values.clear();
  CHECK_THROWS_AS(c.validate(), config_error);
  c = paper_profile();
  c.alpha = 1.5;
  CHECK_THROWS_AS(c.validate(), config_error);
  c = paper_profile();
  c.null_suite.clear();
  CHECK_THROWS_AS(c.validate(), config_error);
}

TEST_CASE("calibration writes one row per family and test") {
  auto c = small_config("calib_rows");
  const auto run = run_calibration(c);
  CHECK(run.table.rows.size() == 4);
  CHECK(run.rows_computed == 4);
  const auto disk = read_tau_map(c.tau_map());
  CHECK(disk == run.table);
  for (const auto& r : disk.rows) {
    CHECK(r.tau.has_value() == (r.statistic == Statistic::MTE));
    CHECK(r.B == 100);
    CHECK(r.alpha_corrected == 0.0125);
    CHECK(r.master_seed == 7);
    CHECK(r.n == 10);
    CHECK(r.d == 5);
  }

  SUBCASE("rerun reuses every row") {
    const auto before = oracle::slurp(c.tau_map());
    const auto again = run_calibration(c);
    CHECK(again.rows_computed == 0);
    CHECK(oracle::slurp(c.tau_map()) == before);
  }
  SUBCASE("changing B or the seed recomputes") {
    c.master_seed = 8;
    CHECK(run_calibration(c).rows_computed == 4);
  }
  SUBCASE("force recomputes with identical results") {
    const auto before = oracle::slurp(c.tau_map());
    c.force = true;
    CHECK(run_calibration(c).rows_computed == 4);
    CHECK(oracle::slurp(c.tau_map()) == before);
  }
}

TEST_CASE("calibration is resumable") {
  auto full = small_config("resume_full");
  full.n_values = {8, 10};
  full.d_values = {3, 5};
  full.null_suite = {{NullFamily::standard_gaussian}, {NullFamily::noisy_sphere, 1.0, 0.1}};
  full.tests = {parse_test_spec("VR-TP"), parse_test_spec("DTM-MTE")};
  run_calibration(full);
  const auto expected = oracle::slurp(full.tau_map());

  auto part = full;
  part.out_dir = oracle::scratch_dir("resume_part");
  // an interrupted run leaves only its first cells on disk
  auto table = read_tau_map(full.tau_map());
  std::erase_if(table.rows, [](const CutoffRow& r) { return r.n == 10 || (r.d == 5 && r.family.family == NullFamily::noisy_sphere); });
  const auto kept = table.rows.size();
  write_tau_map(table, part.tau_map());
  const auto resumed = run_calibration(part);
  CHECK(resumed.rows_computed == 16 - kept);
  CHECK(oracle::slurp(part.tau_map()) == expected);
}

TEST_CASE("outputs do not depend on the worker count") {
  auto c = small_config("workers1");
  c.null_suite = {{NullFamily::standard_gaussian}, {NullFamily::elliptical_gaussian, 0.3, 0.0}};
  c.n_values = {8, 10};
  c.d_values = {4};
  c.eps_values = {0.1, 2.0};
  c.alternatives = {parse_alt_spec("torus"), parse_alt_spec("contaminated_sphere:eps=0.5")};
  c.R = 20;
  c.workers = 1;
  auto w = c;
  w.out_dir = oracle::scratch_dir("workers4");
  w.workers = 4;

  const auto t1 = run_calibration(c).table;
  const auto t4 = run_calibration(w).table;
  CHECK(oracle::slurp(c.tau_map()) == oracle::slurp(w.tau_map()));
  CHECK(null_csv(run_null_table(c, t1)) == null_csv(run_null_table(w, t4)));
  const auto p1 = run_power(c, t1), p4 = run_power(w, t4);
  CHECK(p1 == p4);
  CHECK(power_csv(p1) == power_csv(p4));
  CHECK(records_csv(p1) == records_csv(p4));
}

TEST_CASE("null table guards") {
  auto c = small_config("null_guard");
  const auto table = run_calibration(c).table;
  c.R = 0;
  CHECK_THROWS(run_null_table(c, table));
  CHECK_THROWS(run_power(c, table));

  c.R = 5;
  c.n_values = {10, 12};
  try {
    run_null_table(c, table);
    FAIL("expected a missing-cell error");
  } catch (const config_error& e) {
    const std::string what = e.what();
    CHECK(what.find("standard_gaussian") != std::string::npos);
    CHECK(what.find("n=12 d=5") != std::string::npos);
    CHECK(what.find("VR-TP") != std::string::npos);
  }
  CHECK_THROWS_AS(run_power(c, table), config_error);
}

TEST_CASE("degenerate null family never rejects") {
  auto c = small_config("point_mass");
  c.null_suite = {{NullFamily::point_mass}};
  const auto run = run_calibration(c);
  CHECK(run.warnings.size() == 2);
  for (const auto& r : run.table.rows) {
    CHECK(r.cutoff == 0.0);
    if (r.tau) CHECK(*r.tau == tau_floor);
  }
  const auto t = run_null_table(c, run.table);
  REQUIRE(t.rows.size() == 1);
  for (double rate : t.rows[0].rates) CHECK(rate == 0.0);
  CHECK(null_csv(t) == "family,VR-TP,VR-MTE,DTM-TP,DTM-MTE\npoint_mass,0,0,0,0\n");
}

TEST_CASE("null table rates stay near the level") {
  auto c = small_config("null_level");
  c.null_suite = {{NullFamily::standard_gaussian}, {NullFamily::noisy_sphere, 1.0, 0.3}};
  c.R = 200;
  for (std::uint64_t seed : {7u, 8u}) {
    c.master_seed = seed;
    c.force = true;
    const auto t = run_null_table(c, run_calibration(c).table);
    CHECK(t.tests == std::vector<std::string>{"VR-TP", "VR-MTE", "DTM-TP", "DTM-MTE"});
    for (const auto& row : t.rows) {
      CHECK(row.trials == 200);
      for (std::size_t i = 0; i < row.rates.size(); ++i) {
        CHECK(row.rates[i] == static_cast<double>(row.rejections[i]) / 200.0);
        CHECK(row.rates[i] <= level_bound(c.alpha_corrected(), 200));
      }
    }
  }
}

TEST_CASE("k_plane at eps 0 rejects at the nominal level") {
  auto c = small_config("kplane_level");
  c.tests = {parse_test_spec("VR-TP")};
  c.B = 999;
  c.R = 1000;
  c.alternatives = {parse_alt_spec("k_plane:eps=0")};
  const auto records = run_power(c, run_calibration(c).table);
  REQUIRE(records.size() == 1);
  const double alpha = c.alpha_corrected();
  CHECK(alpha == 0.05);
  CHECK(std::abs(records[0].power - alpha) <= 3.0 * std::sqrt(alpha * (1 - alpha) / 1000.0));
}

TEST_CASE("power records") {
  auto c = small_config("power_records");
  c.n_values = {8, 10};
  c.eps_values = {0.5, 2.0};
  c.alternatives = {parse_alt_spec("torus"), parse_alt_spec("k_plane:eps=1")};
  c.R = 10;
  const auto records = run_power(c, run_calibration(c).table);
  CHECK(records.size() == (2 + 1) * 2 * 4);
  for (const auto& r : records) {
    CHECK(r.R == 10);
    CHECK(r.power == static_cast<double>(r.rejections) / 10.0);
  }
  // alternatives in configured order, then n, d, eps and test
  CHECK(records.front().family == "torus");
  CHECK(records.front().mechanism == Mechanism::B);
  CHECK(records.front().n == 8);
  CHECK(records.front().epsilon == 0.5);
  CHECK(records.front().test == "VR-TP");
  CHECK(records[4].epsilon == 2.0);
  CHECK(records[8].n == 10);
  CHECK(records.back().family == "k_plane");
  CHECK(records.back().epsilon == 1.0);
  CHECK(records.back().n == 10);
  CHECK(records.back().test == "DTM-MTE");

  std::stringstream s(records_csv(records));
  CHECK(read_power_records_csv(s) == records);

  std::stringstream bad("family,mechanism,n,d,eps,test,rejections,R,power\ntorus,Z,10,5,1,VR-TP,1,10,0.1\n");
  try {
    read_power_records_csv(bad);
    FAIL("expected a parse error");
  } catch (const parse_error& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("power csv averages over the grid") {
  const std::vector<PowerRecord> records{
      record("torus", Mechanism::B, 10, 0.05, "VR-TP", 1, 10), record("torus", Mechanism::B, 50, 0.05, "VR-TP", 4, 10),
      record("torus", Mechanism::B, 10, 2.0, "VR-TP", 2, 10), record("torus", Mechanism::B, 50, 2.0, "VR-TP", 2, 10)};
  CHECK(power_csv(records) == "family,mechanism,test,0.05,2\ntorus,B,VR-TP,0.25,0.2\n");
}

TEST_CASE("mechanism map examples") {
  SUBCASE("mean over records") {
    const auto map = build_mechanism_map(
        {record("k_plane", Mechanism::A, 10, 0.1, "VR-TP", 0, 500), record("k_plane", Mechanism::A, 50, 0.1, "VR-TP", 6, 500)});
    CHECK(map.power(Mechanism::A, "VR-TP") == doctest::Approx(0.006).epsilon(1e-15));
    CHECK(map.rows.size() == 1);
  }
  SUBCASE("single record") {
    const auto map = build_mechanism_map({record("torus", Mechanism::B, 10, 0.1, "DTM-MTE", 3, 7)});
    CHECK(map.power(Mechanism::B, "DTM-MTE") == 3.0 / 7.0);
    CHECK(map.rows[0].best == std::vector<bool>{true});
  }
  SUBCASE("ties flag every maximum in fixed order") {
    std::vector<PowerRecord> rs;
    for (const char* t : {"DTM-MTE", "VR-TP", "DTM-TP", "VR-MTE"})
      rs.push_back(record("torus", Mechanism::B, 10, 0.1, t, std::string(t).find("MTE") != std::string::npos ? 5 : 2, 10));
    const auto map = build_mechanism_map(rs);
    CHECK(map.tests == std::vector<std::string>{"VR-TP", "VR-MTE", "DTM-TP", "DTM-MTE"});
    CHECK(map.rows[0].best == std::vector<bool>{false, true, false, true});
    std::ostringstream s;
    write_mechanism_map_csv(map, s);
    CHECK(s.str() == "mechanism,VR-TP,VR-MTE,DTM-TP,DTM-MTE,best\nB,0.2,0.5,0.2,0.5,VR-MTE;DTM-MTE\n");
  }
  SUBCASE("empty input") { CHECK_THROWS_AS(build_mechanism_map({}), parameter_error); }
}

TEST_CASE("mechanism map equals the mean of its records") {
  std::mt19937 rng(12);
  std::vector<PowerRecord> rs;
  const std::vector<std::pair<std::string, Mechanism>> fams{
      {"k_plane", Mechanism::A}, {"spiked_gaussian", Mechanism::A}, {"torus", Mechanism::B},
      {"contaminated_sphere", Mechanism::C}, {"contaminated_k_cube", Mechanism::C}};
  for (const auto& [fam, mech] : fams)
    for (std::size_t n : {10u, 50u})
      for (double e : {0.05, 1.0, 2.0})
        for (const char* t : {"VR-TP", "VR-MTE", "DTM-TP", "DTM-MTE"}) rs.push_back(record(fam, mech, n, e, t, rng() % 101, 100));
  const auto map = build_mechanism_map(rs);

  // every family contributes the same number of cells, so the map is the plain mean
  for (Mechanism m : {Mechanism::A, Mechanism::B, Mechanism::C})
    for (const char* t : {"VR-TP", "VR-MTE", "DTM-TP", "DTM-MTE"}) {
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& r : rs)
        if (r.mechanism == m && r.test == t) {
          sum += r.power;
          ++count;
        }
      CHECK(map.power(m, t) == doctest::Approx(sum / count).epsilon(1e-14));
    }

  // the same numbers are recoverable from the power csv
  std::istringstream csv(power_csv(rs));
  std::string line;
  std::getline(csv, line);
  std::map<std::pair<char, std::string>, std::vector<double>> from_csv;
  while (std::getline(csv, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    for (std::size_t i = 3; i < f.size(); ++i) from_csv[{f[1][0], f[2]}].push_back(std::stod(f[i]));
  }
  for (const auto& [key, values] : from_csv) {
    const Mechanism m = key.first == 'A' ? Mechanism::A : key.first == 'B' ? Mechanism::B : Mechanism::C;
    CHECK(map.power(m, key.second) ==
          doctest::Approx(std::accumulate(values.begin(), values.end(), 0.0) / values.size()).epsilon(1e-12));
  }
}

TEST_CASE("meta files") {
  auto c = small_config("meta");
  write_meta(c.out_dir / "x.meta", c, "x.csv", {"extra = 1"});
  const auto text = oracle::slurp(c.out_dir / "x.meta");
  CHECK(text.find("output = x.csv\n") != std::string::npos);
  CHECK(text.find("version = " + version_string() + "\n") != std::string::npos);
  CHECK(text.find("seed = 7\n") != std::string::npos);
  CHECK(text.find("alpha_corrected = 0.0125\n") != std::string::npos);
  CHECK(text.find("null = standard_gaussian\n") != std::string::npos);
  CHECK(text.find("extra = 1\n") != std::string::npos);
  CHECK(text.find("workers") == std::string::npos);
}

TEST_CASE("self test passes") {
  const auto r = run_selftest(3, 10);
  CHECK(r.checks.size() == 3);
  CHECK(r.passed());
}
