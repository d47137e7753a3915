#include "phcollapse/summaries.hpp"

#include <algorithm>
#include <cmath>

#include "phcollapse/error.hpp"
#include "text.hpp"

namespace phc {

std::string to_string(FiltrationKind kind) { return kind == FiltrationKind::VR ? "VR" : "DTM"; }
std::string to_string(Statistic statistic) { return statistic == Statistic::TP ? "TP" : "MTE"; }

FiltrationKind parse_filtration(std::string_view text) {
  if (text == "VR") return FiltrationKind::VR;
  if (text == "DTM") return FiltrationKind::DTM;
  throw parse_error("unknown filtration '" + std::string(text) + "'");
}

Statistic parse_statistic(std::string_view text) {
  if (text == "TP") return Statistic::TP;
  if (text == "MTE") return Statistic::MTE;
  throw parse_error("unknown statistic '" + std::string(text) + "'");
}

std::string TestSpec::short_label() const { return to_string(filtration) + "-" + to_string(statistic); }

std::string TestSpec::label() const {
  std::string s = short_label();
  if (q != 1) s += ":q=" + std::to_string(q);
  if (statistic == Statistic::TP && p != 1.0) s += ":p=" + detail::format_short(p);
  return s;
}

TestSpec parse_test_spec(std::string_view token) {
  auto fields = detail::split(detail::trim(token), ':');
  auto head = detail::trim(fields[0]);
  auto dash = head.find('-');
  if (dash == std::string_view::npos) throw parse_error("test token must look like VR-TP, got '" + std::string(token) + "'");
  TestSpec spec;
  spec.filtration = parse_filtration(head.substr(0, dash));
  spec.statistic = parse_statistic(head.substr(dash + 1));
  for (std::size_t i = 1; i < fields.size(); ++i) {
    auto f = detail::trim(fields[i]);
    auto eq = f.find('=');
    if (eq == std::string_view::npos) throw parse_error("expected key=value in test token '" + std::string(token) + "'");
    auto key = f.substr(0, eq);
    auto value = f.substr(eq + 1);
    if (key == "q") {
      const auto q = detail::parse_int(value);
      if (q < 0 || q > 2) throw parameter_error("q must be in 0..2");
      spec.q = static_cast<int>(q);
    } else if (key == "p" && spec.statistic == Statistic::TP) {
      spec.p = detail::parse_double(value);
      if (!(spec.p >= 1.0)) throw parameter_error("TP exponent p must be >= 1");
    } else {
      throw parse_error("parameter '" + std::string(key) + "' not valid in test token");
    }
  }
  return spec;
}

std::vector<TestSpec> default_tests() {
  std::vector<TestSpec> tests;
  for (auto kind : {FiltrationKind::VR, FiltrationKind::DTM})
    for (auto statistic : {Statistic::TP, Statistic::MTE}) {
      TestSpec t;
      t.filtration = kind;
      t.statistic = statistic;
      tests.push_back(t);
    }
  return tests;
}

double total_persistence(const Lifetimes& lifetimes, double p) {
  if (!(p >= 1.0)) throw parameter_error("TP exponent p must be >= 1");
  double s = 0.0;
  for (double l : lifetimes.values) s += p == 1.0 ? l : std::pow(l, p);
  return s;
}

double mean_tail_excess(const Lifetimes& lifetimes, double tau) {
  if (!(tau > 0.0)) throw parameter_error("MTE threshold tau must be > 0");
  double s = 0.0;
  std::size_t count = 0;
  for (double l : lifetimes.values)
    if (l > tau) {
      s += l - tau;
      ++count;
    }
  return count == 0 ? 0.0 : s / static_cast<double>(count);
}

double evaluate_on_diagrams(const std::vector<PersistenceDiagram>& diagrams, const TestSpec& spec) {
  if (spec.q < 0 || static_cast<std::size_t>(spec.q) >= diagrams.size())
    throw parameter_error("no diagram computed for q = " + std::to_string(spec.q));
  const auto l = lifetimes(diagrams[static_cast<std::size_t>(spec.q)]);
  if (spec.statistic == Statistic::TP) return total_persistence(l, spec.p);
  if (!spec.tau) throw config_error("test " + spec.label() + " has no calibrated tau");
  return mean_tail_excess(l, *spec.tau);
}

std::vector<PersistenceDiagram> cloud_diagrams(const PointCloud& cloud, FiltrationKind kind, const DTMParams& dtm,
                                               int q_max, std::size_t size_cap) {
  const int max_dim = q_max + 1;
  auto complex = kind == FiltrationKind::VR ? vr_filtration(pairwise_distances(cloud), max_dim, size_cap)
                                            : dtm_filtration(cloud, dtm, max_dim, size_cap);
  return compute_persistence(complex, q_max);
}

std::vector<double> evaluate_statistics(const PointCloud& cloud, std::span<const TestSpec> tests,
                                        const DTMParams& dtm, std::size_t size_cap) {
  std::vector<double> out(tests.size());
  for (auto kind : {FiltrationKind::VR, FiltrationKind::DTM}) {
    int q_max = -1;
    for (const auto& t : tests)
      if (t.filtration == kind) q_max = std::max(q_max, t.q);
    if (q_max < 0) continue;
    const auto diagrams = cloud_diagrams(cloud, kind, dtm, q_max, size_cap);
    for (std::size_t i = 0; i < tests.size(); ++i)
      if (tests[i].filtration == kind) out[i] = evaluate_on_diagrams(diagrams, tests[i]);
  }
  return out;
}

double evaluate_statistic(const PointCloud& cloud, const TestSpec& spec, const DTMParams& dtm) {
  if (spec.statistic == Statistic::MTE && !spec.tau)
    throw config_error("test " + spec.label() + " has no calibrated tau");
  return evaluate_on_diagrams(cloud_diagrams(cloud, spec.filtration, dtm, spec.q), spec);
}

}  // namespace phc
