#include "phcollapse/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "phcollapse/error.hpp"
#include "phcollapse/parallel.hpp"
#include "text.hpp"

namespace phc {

double linear_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw parameter_error("quantile of an empty sample");
  if (!(level >= 0.0 && level <= 1.0)) throw parameter_error("quantile level must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * level;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::size_t cutoff_rank(std::size_t B, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw parameter_error("alpha must be in (0, 1)");
  // (B+1)(1-alpha) is often an integer up to rounding, e.g. 20 * 0.95
  const double raw = std::ceil(static_cast<double>(B + 1) * (1.0 - alpha) - 1e-9);
  const auto rank = static_cast<std::size_t>(std::max(1.0, raw));
  if (rank > B)
    throw parameter_error("B = " + std::to_string(B) + " replicates are too few for level " +
                          detail::format_short(alpha));
  return rank;
}

double order_statistic_cutoff(std::vector<double> values, double alpha) {
  const std::size_t rank = cutoff_rank(values.size(), alpha);
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

TauResult calibrate_tau(std::span<const NullSpec> null_suite, FiltrationKind filtration, int q, std::size_t n,
                        std::size_t d, std::size_t B, double level, const SeedSequence& seed, const DTMParams& dtm,
                        std::size_t workers) {
  if (null_suite.empty()) throw parameter_error("empty null suite");
  if (B < 20) throw parameter_error("tau calibration needs B >= 20");
  if (!(level > 0.0 && level < 1.0)) throw parameter_error("tau quantile level must be in (0, 1)");

  std::vector<std::vector<double>> per_replicate(B);
  parallel_for(B, workers, [&](std::size_t r) {
    const auto& family = null_suite[r % null_suite.size()];
    const auto cloud = sample_null(family, n, d, seed.child(r));
    const auto diagrams = cloud_diagrams(cloud, filtration, dtm, q);
    for (double l : lifetimes(diagrams[static_cast<std::size_t>(q)]).values)
      if (l > 0.0) per_replicate[r].push_back(l);
  });

  std::vector<double> pooled;
  for (const auto& v : per_replicate) pooled.insert(pooled.end(), v.begin(), v.end());

  TauResult out;
  out.pooled = pooled.size();
  if (pooled.empty()) {
    out.degenerate = true;
    return out;
  }
  out.tau = linear_quantile(std::move(pooled), level);
  if (!(out.tau > 0.0)) {
    out.tau = tau_floor;
    out.degenerate = true;
  }
  return out;
}

SeedSequence family_seed(const SeedSequence& batch, const NullSpec& family) {
  return batch.child(stable_hash(to_string(family)));
}

std::vector<CutoffResult> calibrate_cutoffs(std::span<const NullSpec> null_suite, std::span<const TestSpec> tests,
                                            std::size_t n, std::size_t d, std::size_t B, double alpha_corrected,
                                            const SeedSequence& seed, const DTMParams& dtm, std::size_t workers) {
  if (null_suite.empty()) throw parameter_error("empty null suite");
  cutoff_rank(B, alpha_corrected);
  for (const auto& t : tests)
    if (t.statistic == Statistic::MTE && !t.tau) throw config_error("test " + t.label() + " has no calibrated tau");

  const std::size_t F = null_suite.size(), T = tests.size();
  std::vector<double> values(F * B * T);  // [family][replicate][test]
  parallel_for(F * B, workers, [&](std::size_t task) {
    const std::size_t f = task / B, r = task % B;
    const auto cloud = sample_null(null_suite[f], n, d, family_seed(seed, null_suite[f]).child(r));
    const auto stats = evaluate_statistics(cloud, tests, dtm);
    std::copy(stats.begin(), stats.end(), values.begin() + static_cast<std::ptrdiff_t>(task * T));
  });

  std::vector<CutoffResult> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    out[t].family_cutoffs.resize(F);
    for (std::size_t f = 0; f < F; ++f) {
      std::vector<double> sample(B);
      for (std::size_t r = 0; r < B; ++r) sample[r] = values[(f * B + r) * T + t];
      out[t].family_cutoffs[f] = order_statistic_cutoff(std::move(sample), alpha_corrected);
    }
    out[t].cutoff = *std::max_element(out[t].family_cutoffs.begin(), out[t].family_cutoffs.end());
  }
  return out;
}

CutoffResult calibrate_cutoff(std::span<const NullSpec> null_suite, const TestSpec& test, std::size_t n,
                              std::size_t d, std::size_t B, double alpha_corrected, const SeedSequence& seed,
                              const DTMParams& dtm, std::size_t workers) {
  return calibrate_cutoffs(null_suite, std::span(&test, 1), n, d, B, alpha_corrected, seed, dtm, workers).front();
}

Decision decide(double value, double cutoff) {
  if (!std::isfinite(value) || !std::isfinite(cutoff)) throw parameter_error("decide needs finite inputs");
  return {value, cutoff, value > cutoff};
}

// ---------------------------------------------------------------------------
// CutoffTable

bool CutoffRow::same_key(const CutoffRow& o) const {
  return family == o.family && n == o.n && d == o.d && filtration == o.filtration && statistic == o.statistic &&
         q == o.q;
}

bool CutoffRow::matches(const NullSpec& f, std::size_t n_, std::size_t d_, const TestSpec& test) const {
  return family == f && n == n_ && d == d_ && filtration == test.filtration && statistic == test.statistic &&
         q == test.q;
}

const CutoffRow* CutoffTable::find(const NullSpec& family, std::size_t n, std::size_t d, const TestSpec& test) const {
  for (const auto& r : rows)
    if (r.matches(family, n, d, test)) return &r;
  return nullptr;
}

void CutoffTable::upsert(CutoffRow row) {
  for (auto& r : rows)
    if (r.same_key(row)) {
      r = std::move(row);
      return;
    }
  rows.push_back(std::move(row));
}

void CutoffTable::sort() {
  auto key = [](const CutoffRow& r) {
    return std::make_tuple(r.n, r.d, to_string(r.family), static_cast<int>(r.filtration),
                           static_cast<int>(r.statistic), r.q);
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const CutoffRow& a, const CutoffRow& b) { return key(a) < key(b); });
}

void write_tau_map(const CutoffTable& table, std::ostream& out) {
  out << tau_map_header << '\n';
  for (const auto& r : table.rows) {
    out << family_name(r.family.family) << ',' << family_params(r.family) << ',' << r.n << ',' << r.d << ','
        << to_string(r.filtration) << ',' << to_string(r.statistic) << ',' << r.q << ','
        << (r.tau ? detail::format_exact(*r.tau) : std::string()) << ',' << detail::format_exact(r.cutoff) << ','
        << r.B << ',' << detail::format_exact(r.alpha_corrected) << ',' << r.master_seed << '\n';
  }
}

void write_tau_map(const CutoffTable& table, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw error("cannot write " + tmp.string());
    write_tau_map(table, out);
    if (!out) throw error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CutoffTable read_tau_map(std::istream& in) {
  CutoffTable table;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw parse_error("missing header", 1);
  ++lineno;
  if (detail::trim(line) != tau_map_header) throw parse_error("unexpected header", lineno);

  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != 12) throw parse_error("expected 12 fields, got " + std::to_string(f.size()), lineno);
    try {
      CutoffRow r;
      const auto family = std::string(detail::trim(f[0]));
      const auto params = std::string(detail::trim(f[1]));
      r.family = parse_null_spec(params.empty() ? family : family + ":" + params);
      r.n = detail::parse_uint(f[2]);
      r.d = detail::parse_uint(f[3]);
      r.filtration = parse_filtration(detail::trim(f[4]));
      r.statistic = parse_statistic(detail::trim(f[5]));
      r.q = static_cast<int>(detail::parse_int(f[6]));
      if (!detail::trim(f[7]).empty()) r.tau = detail::parse_double(f[7]);
      r.cutoff = detail::parse_double(f[8]);
      r.B = detail::parse_uint(f[9]);
      r.alpha_corrected = detail::parse_double(f[10]);
      r.master_seed = detail::parse_uint(f[11]);
      if (r.tau.has_value() != (r.statistic == Statistic::MTE))
        throw parse_error("tau must be present exactly for MTE rows");
      if (r.q < 0 || r.q > 2) throw parse_error("q must be in 0..2");
      table.rows.push_back(std::move(r));
    } catch (const parse_error& e) {
      if (e.line() != 0) throw;
      throw parse_error(e.what(), lineno);
    } catch (const error& e) {
      throw parse_error(e.what(), lineno);
    }
  }
  return table;
}

CutoffTable read_tau_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot open " + path.string());
  return read_tau_map(in);
}

}  // namespace phc
