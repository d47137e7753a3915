#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "phcollapse/error.hpp"
#include "phcollapse/harness.hpp"
#include "text.hpp"

namespace phc {

namespace {

struct Flag {
  std::string key;
  std::vector<std::string> values;
  CLI::Option* option = nullptr;
};

// `profile = ...` line of a config file, if any.
std::optional<std::string> profile_in_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path.string());
  std::string line;
  std::optional<std::string> found;
  while (std::getline(in, line)) {
    auto body = detail::trim(std::string_view(line).substr(0, line.find('#')));
    auto eq = body.find('=');
    if (eq != std::string_view::npos && detail::trim(body.substr(0, eq)) == "profile")
      found = std::string(detail::trim(body.substr(eq + 1)));
  }
  return found;
}

std::filesystem::path meta_path(std::filesystem::path p) { return p.replace_extension(".meta"); }

std::string render(const auto& write, const auto& value) {
  std::ostringstream s;
  write(value, s);
  return s.str();
}

CutoffTable load_cutoffs(const ExperimentConfig& c) {
  const auto path = c.tau_map();
  if (!std::filesystem::exists(path))
    throw config_error("calibration file " + path.string() + " not found; run `phc calibrate` first");
  return read_tau_map(path);
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Calibrated persistent-homology tests for point-cloud collapse", "phc"};
  app.require_subcommand(1);

  std::string config_file, profile;
  app.add_option("--config", config_file, "key = value settings file (flags override it)");
  app.add_option("--profile", profile, "desk or paper grid defaults")->check(CLI::IsMember({"desk", "paper"}));

  std::vector<Flag> flags = {
      {"n", {}},     {"d", {}},       {"eps", {}},     {"null", {}},    {"alt", {}},
      {"tests", {}}, {"B", {}},       {"R", {}},       {"alpha", {}},   {"seed", {}},
      {"workers", {}}, {"out", {}},   {"tau-map", {}}, {"tau-B", {}},   {"tau-level", {}},
      {"dtm-m", {}},
  };
  const std::map<std::string, std::string> help = {
      {"n", "point counts (comma list)"},
      {"d", "ambient dimensions (comma list)"},
      {"eps", "collapse strengths (comma list)"},
      {"null", "null family tokens, e.g. noisy_sphere:sigma=0.3"},
      {"alt", "alternative tokens, e.g. torus or torus:eps=1.5"},
      {"tests", "tests, e.g. VR-MTE,DTM-TP:q=0"},
      {"B", "calibration replicates per null family"},
      {"R", "fresh trials per cell"},
      {"alpha", "family-wise level before the Bonferroni split"},
      {"seed", "master seed"},
      {"workers", "worker threads"},
      {"out", "output directory"},
      {"tau-map", "calibration file (default <out>/tau_map.csv)"},
      {"tau-B", "replicates in the tau batch"},
      {"tau-level", "quantile level for tau"},
      {"dtm-m", "DTM mass parameter"},
  };
  for (auto& f : flags) f.option = app.add_option("--" + f.key, f.values, help.at(f.key));
  bool force = false;
  app.add_flag("--force", force, "recompute calibration rows that already exist");

  auto* calibrate = app.add_subcommand("calibrate", "calibrate tau and cutoffs, write tau_map.csv");
  auto* nulltable = app.add_subcommand("nulltable", "rejection rates under the null suite");
  auto* power = app.add_subcommand("power", "power over the alternative families and epsilon grid");
  auto* report = app.add_subcommand("report", "mechanism map from power_records.csv");
  auto* selftest = app.add_subcommand("selftest", "oracle-equivalence and MST checks");
  for (auto* sub : {calibrate, nulltable, power, report, selftest}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "phc: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  auto log = [&err](const std::string& msg) { err << "[phc] " << msg << '\n'; };

  try {
    if (selftest->parsed()) {
      const auto result = run_selftest();
      for (const auto& [name, ok] : result.checks) out << (ok ? "PASS " : "FAIL ") << name << '\n';
      return result.passed() ? 0 : 1;
    }

    if (profile.empty() && !config_file.empty()) profile = profile_in_file(config_file).value_or("");
    auto config = profile_by_name(profile.empty() ? "paper" : profile);
    config.workers = std::max(1u, std::thread::hardware_concurrency());
    if (!config_file.empty()) apply_config_file(config, config_file);
    for (const auto& f : flags)
      if (f.option->count() > 0) {
        std::string joined;
        for (const auto& v : f.values) joined += (joined.empty() ? "" : ",") + v;
        apply_setting(config, f.key, joined);
      }
    if (force) config.force = true;
    config.validate();

    if (calibrate->parsed()) {
      const auto run = run_calibration(config, log);
      for (const auto& w : run.warnings) err << "[phc] warning: " << w << '\n';
      write_meta(meta_path(config.tau_map()), config, "tau_map.csv");
      out << "calibration: " << run.table.rows.size() << " rows in " << config.tau_map().string() << " ("
          << run.rows_computed << " computed)\n";
      return 0;
    }
    if (nulltable->parsed()) {
      const auto table = run_null_table(config, load_cutoffs(config), log);
      const auto csv = render([](const NullTable& t, std::ostream& o) { write_null_table_csv(t, o); }, table);
      write_text_file(config.out_dir / "null_table.csv", csv);
      write_meta(config.out_dir / "null_table.meta", config, "null_table.csv");
      out << csv;
      return 0;
    }
    if (power->parsed()) {
      const auto records = run_power(config, load_cutoffs(config), log);
      const auto csv = render([](const auto& r, std::ostream& o) { write_power_csv(r, o); }, records);
      write_text_file(config.out_dir / "power.csv", csv);
      write_text_file(config.out_dir / "power_records.csv",
                      render([](const auto& r, std::ostream& o) { write_power_records_csv(r, o); }, records));
      write_meta(config.out_dir / "power.meta", config, "power.csv");
      write_meta(config.out_dir / "power_records.meta", config, "power_records.csv");
      out << csv;
      return 0;
    }
    if (report->parsed()) {
      const auto path = config.out_dir / "power_records.csv";
      std::ifstream in(path);
      if (!in) throw config_error("power records " + path.string() + " not found; run `phc power` first");
      const auto map = build_mechanism_map(read_power_records_csv(in));
      const auto csv = render([](const MechanismMap& m, std::ostream& o) { write_mechanism_map_csv(m, o); }, map);
      write_text_file(config.out_dir / "mechanism_map.csv", csv);
      write_meta(config.out_dir / "mechanism_map.meta", config, "mechanism_map.csv");
      out << csv;
      return 0;
    }
  } catch (const std::exception& e) {
    err << "phc: error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace phc
