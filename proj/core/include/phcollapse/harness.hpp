#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "phcollapse/calibration.hpp"
#include "phcollapse/generators.hpp"
#include "phcollapse/summaries.hpp"

namespace phc {

/// Seed-path stage tags. Each batch of draws lives under its own stage so
/// the tau batch, the cutoff batch and the fresh trials never share a stream.
enum class Stage : std::uint64_t { tau = 1, cutoff = 2, null_trials = 3, power_trials = 4 };

struct ExperimentConfig {
  std::string profile = "paper";
  std::vector<std::size_t> n_values{10, 50, 100};
  std::vector<std::size_t> d_values{5, 10, 20};
  std::vector<double> eps_values{0.05, 0.1, 0.2, 0.5, 1.0, 1.5, 2.0};
  std::vector<NullSpec> null_suite = default_null_suite();
  std::vector<AltToken> alternatives;  // empty means default_alternatives()
  std::vector<TestSpec> tests = default_tests();
  std::size_t B = 200;       // calibration replicates per family
  std::size_t R = 200;       // fresh trials per cell
  std::size_t tau_B = 50;    // independent tau batch
  double tau_level = 0.90;
  double alpha = 0.05;
  std::uint64_t master_seed = 1;
  std::size_t workers = 1;
  DTMParams dtm;
  std::filesystem::path out_dir = "results";
  std::optional<std::filesystem::path> tau_map_path;
  bool force = false;

  /// Bonferroni over the reported tests.
  double alpha_corrected() const;
  std::filesystem::path tau_map() const;
  std::vector<AltToken> resolved_alternatives() const;
  void validate() const;
};

/// n in {10,50,100}, d in {5,10,20}, B = R = 200.
ExperimentConfig paper_profile();
/// n in {10,50}, d in {5,10}, B = 100, R = 100.
ExperimentConfig desk_profile();
ExperimentConfig profile_by_name(const std::string& name);

/// Applies one `key = value` setting (keys match the CLI flag names).
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);
/// Line-oriented `key = value` file; `#` starts a comment.
void apply_config_file(ExperimentConfig& config, const std::filesystem::path& path);

using LogFn = std::function<void(const std::string&)>;

// ---------------------------------------------------------------------------
// Calibration

struct CalibrationRun {
  CutoffTable table;
  std::size_t rows_computed = 0;
  std::vector<std::string> warnings;
};

/// Cutoffs for every (family, n, d, test) cell. Rows already present in the
/// tau map with the same B, alpha and seed are reused unless config.force;
/// the file is rewritten after every (n, d) cell so an interrupted run can
/// resume.
CalibrationRun run_calibration(const ExperimentConfig& config, const LogFn& log = {});

/// Batch seed of the tau draws for one (n, d, test) cell; replicate r uses
/// .child(r).
SeedSequence tau_batch_seed(const ExperimentConfig& config, std::size_t n, std::size_t d, const TestSpec& test);
/// Batch seed of the cutoff draws for one (n, d) cell; see family_seed.
SeedSequence cutoff_batch_seed(const ExperimentConfig& config, std::size_t n, std::size_t d);

/// A test with its tau filled in and its suite-wide cutoff.
struct ResolvedTest {
  TestSpec spec;
  double cutoff = 0.0;
};

/// Throws config_error naming the missing (family, n, d, test) cell.
std::vector<ResolvedTest> resolve_tests(const CutoffTable& table, const ExperimentConfig& config, std::size_t n,
                                        std::size_t d);

// ---------------------------------------------------------------------------
// Null table

struct NullRateRow {
  NullSpec family;
  std::vector<std::size_t> rejections;  // per test
  std::size_t trials = 0;               // per test, summed over the grid
  std::vector<double> rates;            // rejections / trials
};

struct NullTable {
  std::vector<std::string> tests;  // column labels
  std::vector<NullRateRow> rows;
};

NullTable run_null_table(const ExperimentConfig& config, const CutoffTable& table, const LogFn& log = {});
void write_null_table_csv(const NullTable& table, std::ostream& out);

// ---------------------------------------------------------------------------
// Power

struct PowerRecord {
  std::string family;  // alternative token without epsilon
  Mechanism mechanism = Mechanism::A;
  std::size_t n = 0;
  std::size_t d = 0;
  double epsilon = 0.0;
  std::string test;
  std::size_t rejections = 0;
  std::size_t R = 0;
  double power = 0.0;

  friend bool operator==(const PowerRecord&, const PowerRecord&) = default;
};

std::vector<PowerRecord> run_power(const ExperimentConfig& config, const CutoffTable& table, const LogFn& log = {});

/// Rows (family, mechanism, test), one column per epsilon holding the mean
/// power over the (n, d) grid.
void write_power_csv(const std::vector<PowerRecord>& records, std::ostream& out);
/// One line per record.
void write_power_records_csv(const std::vector<PowerRecord>& records, std::ostream& out);
std::vector<PowerRecord> read_power_records_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Mechanism map

struct MechanismRow {
  Mechanism mechanism = Mechanism::A;
  std::vector<double> mean_power;  // per test, MechanismMap::tests order
  std::vector<bool> best;          // every test attaining the row maximum
};

struct MechanismMap {
  std::vector<std::string> tests;  // VR-TP, VR-MTE, DTM-TP, DTM-MTE first, then others
  std::vector<MechanismRow> rows;  // A, B, C order, only mechanisms present

  const MechanismRow* row(Mechanism m) const;
  double power(Mechanism m, const std::string& test) const;
};

/// Mean over families (each family first averaged over its grid) per
/// mechanism and test. Throws parameter_error on empty input.
MechanismMap build_mechanism_map(const std::vector<PowerRecord>& records);
void write_mechanism_map_csv(const MechanismMap& map, std::ostream& out);

// ---------------------------------------------------------------------------
// Outputs

/// `key = value` metadata describing the run that produced an output file.
void write_meta(const std::filesystem::path& path, const ExperimentConfig& config, const std::string& kind,
                const std::vector<std::string>& extra = {});

/// Writes via a temporary sibling and rename.
void write_text_file(const std::filesystem::path& path, const std::string& content);

std::string version_string();

// ---------------------------------------------------------------------------
// Self test

struct SelfTestResult {
  std::vector<std::pair<std::string, bool>> checks;
  bool passed() const;
};

/// Oracle equivalence on random small clouds (VR and DTM) and the
/// H0 / minimum-spanning-tree identity.
SelfTestResult run_selftest(std::uint64_t seed = 7, std::size_t clouds = 40);

/// Command-line entry point. Returns 0 on success, 1 on failure, 2 on usage
/// errors.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace phc
