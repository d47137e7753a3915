#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phcollapse/generators.hpp"
#include "phcollapse/summaries.hpp"

namespace phc {

/// Smallest positive double; the threshold used when no positive lifetime
/// was pooled.
inline constexpr double tau_floor = std::numeric_limits<double>::denorm_min();

/// Linear-interpolation quantile: with sorted x and h = (N-1) level,
/// x[floor h] + (h - floor h) (x[floor h + 1] - x[floor h]).
double linear_quantile(std::vector<double> values, double level);

/// ceil((B+1)(1-alpha)); throws parameter_error when it exceeds B.
std::size_t cutoff_rank(std::size_t B, double alpha);

/// The cutoff_rank(B, alpha)-th smallest value.
double order_statistic_cutoff(std::vector<double> values, double alpha);

struct TauResult {
  double tau = tau_floor;
  bool degenerate = false;  // no positive lifetime pooled; tau fell back to tau_floor
  std::size_t pooled = 0;
};

/// Pools the positive degree-q lifetimes of B null draws, spread round-robin
/// over the suite, and takes their `level` linear quantile. Replicate r is
/// drawn from seed.child(r).
TauResult calibrate_tau(std::span<const NullSpec> null_suite, FiltrationKind filtration, int q, std::size_t n,
                        std::size_t d, std::size_t B, double level, const SeedSequence& seed,
                        const DTMParams& dtm = {}, std::size_t workers = 1);

struct CutoffResult {
  double cutoff = 0.0;                 // max over families
  std::vector<double> family_cutoffs;  // suite order
};

/// Per-family upper-tail cutoffs from B draws per family; the suite cutoff
/// is their maximum. Family f replicate r is drawn from
/// seed.child(stable_hash(to_string(family))).child(r). MTE tests must carry
/// a resolved tau.
CutoffResult calibrate_cutoff(std::span<const NullSpec> null_suite, const TestSpec& test, std::size_t n,
                              std::size_t d, std::size_t B, double alpha_corrected, const SeedSequence& seed,
                              const DTMParams& dtm = {}, std::size_t workers = 1);

/// Several tests at once; every replicate's diagrams are computed once per
/// filtration and shared by all tests.
std::vector<CutoffResult> calibrate_cutoffs(std::span<const NullSpec> null_suite, std::span<const TestSpec> tests,
                                            std::size_t n, std::size_t d, std::size_t B, double alpha_corrected,
                                            const SeedSequence& seed, const DTMParams& dtm = {},
                                            std::size_t workers = 1);

/// Seed used for family `family` inside a calibrate_cutoff batch.
SeedSequence family_seed(const SeedSequence& batch, const NullSpec& family);

struct Decision {
  double value = 0.0;
  double cutoff = 0.0;
  bool reject = false;
};

/// Rejects iff value > cutoff.
Decision decide(double value, double cutoff);

// ---------------------------------------------------------------------------
// tau_map.csv

struct CutoffRow {
  NullSpec family;
  std::size_t n = 0;
  std::size_t d = 0;
  FiltrationKind filtration = FiltrationKind::VR;
  Statistic statistic = Statistic::TP;
  int q = 1;
  std::optional<double> tau;  // present iff statistic == MTE
  double cutoff = 0.0;
  std::size_t B = 0;
  double alpha_corrected = 0.0;
  std::uint64_t master_seed = 0;

  bool same_key(const CutoffRow& other) const;
  bool matches(const NullSpec& f, std::size_t n_, std::size_t d_, const TestSpec& test) const;
  friend bool operator==(const CutoffRow&, const CutoffRow&) = default;
};

struct CutoffTable {
  std::vector<CutoffRow> rows;

  const CutoffRow* find(const NullSpec& family, std::size_t n, std::size_t d, const TestSpec& test) const;
  /// Inserts, replacing any row with the same key.
  void upsert(CutoffRow row);
  /// Sorts rows by (n, d, family, filtration, statistic, q).
  void sort();

  friend bool operator==(const CutoffTable&, const CutoffTable&) = default;
};

inline constexpr const char* tau_map_header =
    "family,family_params,n,d,filtration,statistic,q,tau,cutoff,B,alpha_corrected,master_seed";

void write_tau_map(const CutoffTable& table, std::ostream& out);
/// Writes to a temporary sibling and renames it into place.
void write_tau_map(const CutoffTable& table, const std::filesystem::path& path);
/// Throws parse_error naming the offending line.
CutoffTable read_tau_map(std::istream& in);
CutoffTable read_tau_map(const std::filesystem::path& path);

}  // namespace phc
