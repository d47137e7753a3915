#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phcollapse/filtration.hpp"
#include "phcollapse/persistence.hpp"

namespace phc {

enum class Statistic { TP, MTE };

/// One test: filtration x statistic at homology degree q. TP uses the
/// exponent p; MTE needs a calibrated threshold tau before evaluation.
struct TestSpec {
  FiltrationKind filtration = FiltrationKind::VR;
  Statistic statistic = Statistic::TP;
  int q = 1;
  double p = 1.0;
  std::optional<double> tau;

  /// `VR-TP` style column label; degree and exponent are appended only
  /// when they differ from the defaults (`DTM-MTE:q=0`, `VR-TP:q=1:p=2`).
  std::string label() const;
  /// Label ignoring q and p: `VR-TP`, `DTM-MTE`.
  std::string short_label() const;

  friend bool operator==(const TestSpec&, const TestSpec&) = default;
};

/// `VR-MTE`, `VR-MTE:q=1`, `DTM-TP:q=0:p=2`.
TestSpec parse_test_spec(std::string_view token);
std::string to_string(FiltrationKind kind);
std::string to_string(Statistic statistic);
FiltrationKind parse_filtration(std::string_view text);
Statistic parse_statistic(std::string_view text);

/// VR-TP, VR-MTE, DTM-TP, DTM-MTE at q = 1, p = 1.
std::vector<TestSpec> default_tests();

/// Sum of lifetime^p. Throws parameter_error for p < 1.
double total_persistence(const Lifetimes& lifetimes, double p);

/// Mean of (l - tau) over lifetimes strictly above tau; 0 when none exceed.
/// Throws parameter_error for tau <= 0.
double mean_tail_excess(const Lifetimes& lifetimes, double tau);

/// Statistic of an already computed set of diagrams (indexed by degree).
double evaluate_on_diagrams(const std::vector<PersistenceDiagram>& diagrams, const TestSpec& spec);

/// Diagrams q = 0..q_max of the chosen filtration of `cloud`.
std::vector<PersistenceDiagram> cloud_diagrams(const PointCloud& cloud, FiltrationKind kind, const DTMParams& dtm,
                                               int q_max, std::size_t size_cap = default_size_cap);

/// All tests on one cloud; each filtration's diagrams are computed once,
/// up to the largest degree any test needs.
std::vector<double> evaluate_statistics(const PointCloud& cloud, std::span<const TestSpec> tests,
                                        const DTMParams& dtm = {}, std::size_t size_cap = default_size_cap);

/// distances -> filtration -> persistence -> lifetimes -> TP or MTE.
/// Throws config_error when an MTE spec has no tau.
double evaluate_statistic(const PointCloud& cloud, const TestSpec& spec, const DTMParams& dtm = {});

}  // namespace phc
