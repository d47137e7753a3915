#include "phcollapse/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "phcollapse/error.hpp"
#include "phcollapse/parallel.hpp"
#include "text.hpp"

#ifndef PHC_VERSION
#define PHC_VERSION "unknown"
#endif

namespace phc {

namespace {

template <class T, class Parse>
std::vector<T> parse_list(const std::string& value, Parse parse) {
  std::vector<T> out;
  for (auto item : detail::split(value, ',')) {
    item = detail::trim(item);
    if (!item.empty()) out.push_back(parse(item));
  }
  return out;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? sep : "") + items[i];
  return s;
}

SeedSequence stage_seed(const ExperimentConfig& c, Stage stage, std::size_t n, std::size_t d) {
  return SeedSequence(c.master_seed, {static_cast<std::uint64_t>(stage), n, d});
}

void say(const LogFn& log, const std::string& msg) {
  if (log) log(msg);
}

std::string cell_name(std::size_t n, std::size_t d) { return "n=" + std::to_string(n) + " d=" + std::to_string(d); }

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

double ExperimentConfig::alpha_corrected() const { return alpha / static_cast<double>(std::max<std::size_t>(1, tests.size())); }

std::filesystem::path ExperimentConfig::tau_map() const { return tau_map_path ? *tau_map_path : out_dir / "tau_map.csv"; }

std::vector<AltToken> ExperimentConfig::resolved_alternatives() const {
  if (!alternatives.empty()) return alternatives;
  std::vector<AltToken> out;
  for (const auto& a : default_alternatives()) out.push_back({a, false});
  return out;
}

void ExperimentConfig::validate() const {
  if (n_values.empty() || d_values.empty()) throw config_error("the n and d grids must be nonempty");
  if (null_suite.empty()) throw config_error("the null suite is empty");
  if (tests.empty()) throw config_error("no tests configured");
  if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("alpha must be in (0, 1)");
  for (std::size_t i = 0; i < tests.size(); ++i)
    for (std::size_t j = i + 1; j < tests.size(); ++j)
      if (tests[i].filtration == tests[j].filtration && tests[i].statistic == tests[j].statistic &&
          tests[i].q == tests[j].q)
        throw config_error("tests " + tests[i].label() + " and " + tests[j].label() + " share a calibration key");
  for (double e : eps_values)
    if (!(e >= 0.0)) throw config_error("epsilon values must be >= 0");
  for (std::size_t n : n_values)
    if (n == 0) throw config_error("n must be >= 1");
  for (std::size_t d : d_values)
    if (d == 0) throw config_error("d must be >= 1");
}

ExperimentConfig paper_profile() { return ExperimentConfig{}; }

ExperimentConfig desk_profile() {
  ExperimentConfig c;
  c.profile = "desk";
  c.n_values = {10, 50};
  c.d_values = {5, 10};
  c.B = 100;
  c.R = 100;
  return c;
}

ExperimentConfig profile_by_name(const std::string& name) {
  if (name == "paper") return paper_profile();
  if (name == "desk") return desk_profile();
  throw config_error("unknown profile '" + name + "' (expected desk or paper)");
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  auto as_size = [](std::string_view v) { return static_cast<std::size_t>(detail::parse_uint(v)); };
  if (key == "n") c.n_values = parse_list<std::size_t>(value, as_size);
  else if (key == "d") c.d_values = parse_list<std::size_t>(value, as_size);
  else if (key == "eps") c.eps_values = parse_list<double>(value, detail::parse_double);
  else if (key == "null") c.null_suite = parse_list<NullSpec>(value, parse_null_spec);
  else if (key == "alt") c.alternatives = parse_list<AltToken>(value, parse_alt_spec);
  else if (key == "tests") c.tests = parse_list<TestSpec>(value, parse_test_spec);
  else if (key == "B") c.B = as_size(value);
  else if (key == "R") c.R = as_size(value);
  else if (key == "tau-B") c.tau_B = as_size(value);
  else if (key == "tau-level") c.tau_level = detail::parse_double(value);
  else if (key == "alpha") c.alpha = detail::parse_double(value);
  else if (key == "seed") c.master_seed = detail::parse_uint(value);
  else if (key == "workers") c.workers = std::max<std::size_t>(1, as_size(value));
  else if (key == "dtm-m") c.dtm.m = detail::parse_double(value);
  else if (key == "out") c.out_dir = value;
  else if (key == "tau-map") c.tau_map_path = std::filesystem::path(value);
  else if (key == "force") c.force = value.empty() || value == "true" || value == "1";
  else throw config_error("unknown setting '" + key + "'");
}

void apply_config_file(ExperimentConfig& c, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    auto body = detail::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos) throw parse_error("expected key = value", lineno);
    const std::string key(detail::trim(body.substr(0, eq)));
    const std::string value(detail::trim(body.substr(eq + 1)));
    if (key == "profile") continue;  // resolved before the file is applied
    try {
      apply_setting(c, key, value);
    } catch (const parse_error& e) {
      throw parse_error(e.what(), lineno);
    }
  }
}

// ---------------------------------------------------------------------------
// Calibration

CalibrationRun run_calibration(const ExperimentConfig& c, const LogFn& log) {
  c.validate();
  const double alpha_c = c.alpha_corrected();
  cutoff_rank(c.B, alpha_c);
  const auto path = c.tau_map();

  CalibrationRun run;
  const bool existed = std::filesystem::exists(path);
  if (existed && !c.force) run.table = read_tau_map(path);

  auto reusable = [&](const NullSpec& f, std::size_t n, std::size_t d, const TestSpec& t) {
    const auto* row = run.table.find(f, n, d, t);
    return row && row->B == c.B && row->alpha_corrected == alpha_c && row->master_seed == c.master_seed;
  };

  for (std::size_t n : c.n_values)
    for (std::size_t d : c.d_values) {
      std::vector<NullSpec> needed;
      for (const auto& f : c.null_suite) {
        bool missing = false;
        for (const auto& t : c.tests) missing = missing || !reusable(f, n, d, t);
        if (missing) needed.push_back(f);
      }
      if (needed.empty()) continue;
      say(log, "calibrating " + cell_name(n, d) + " (" + std::to_string(needed.size()) + " families)");

      auto tests = c.tests;
      for (auto& t : tests) {
        if (t.statistic != Statistic::MTE) continue;
        const auto tau = calibrate_tau(c.null_suite, t.filtration, t.q, n, d, c.tau_B, c.tau_level,
                                       tau_batch_seed(c, n, d, t), c.dtm, c.workers);
        if (tau.degenerate)
          run.warnings.push_back("no positive lifetimes pooled for " + t.label() + " at " + cell_name(n, d) +
                                 "; tau set to the positive floor");
        t.tau = tau.tau;
      }

      const auto results = calibrate_cutoffs(needed, tests, n, d, c.B, alpha_c, cutoff_batch_seed(c, n, d),
                                             c.dtm, c.workers);
      for (std::size_t f = 0; f < needed.size(); ++f)
        for (std::size_t t = 0; t < tests.size(); ++t) {
          CutoffRow row;
          row.family = needed[f];
          row.n = n;
          row.d = d;
          row.filtration = tests[t].filtration;
          row.statistic = tests[t].statistic;
          row.q = tests[t].q;
          row.tau = tests[t].tau;
          row.cutoff = results[t].family_cutoffs[f];
          row.B = c.B;
          row.alpha_corrected = alpha_c;
          row.master_seed = c.master_seed;
          run.table.upsert(std::move(row));
          ++run.rows_computed;
        }
      run.table.sort();
      write_tau_map(run.table, path);
    }

  if (!existed && run.rows_computed == 0) write_tau_map(run.table, path);
  return run;
}

SeedSequence tau_batch_seed(const ExperimentConfig& c, std::size_t n, std::size_t d, const TestSpec& test) {
  return stage_seed(c, Stage::tau, n, d)
      .child(static_cast<std::uint64_t>(test.filtration))
      .child(static_cast<std::uint64_t>(test.q));
}

SeedSequence cutoff_batch_seed(const ExperimentConfig& c, std::size_t n, std::size_t d) {
  return stage_seed(c, Stage::cutoff, n, d);
}

std::vector<ResolvedTest> resolve_tests(const CutoffTable& table, const ExperimentConfig& c, std::size_t n,
                                        std::size_t d) {
  std::vector<ResolvedTest> out;
  for (const auto& t : c.tests) {
    ResolvedTest r{t, -infinity};
    for (const auto& f : c.null_suite) {
      const auto* row = table.find(f, n, d, t);
      if (!row)
        throw config_error("no calibrated cutoff for family " + to_string(f) + ", " + cell_name(n, d) + ", test " +
                           t.label() + "; run calibrate first");
      r.cutoff = std::max(r.cutoff, row->cutoff);
      if (t.statistic == Statistic::MTE) {
        if (!row->tau) throw config_error("MTE row without tau for " + to_string(f) + " at " + cell_name(n, d));
        if (!r.spec.tau) r.spec.tau = row->tau;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Null table

NullTable run_null_table(const ExperimentConfig& c, const CutoffTable& table, const LogFn& log) {
  c.validate();
  if (c.R == 0) throw parameter_error("R must be >= 1 for the null table");
  const std::size_t F = c.null_suite.size(), T = c.tests.size();

  NullTable out;
  for (const auto& t : c.tests) out.tests.push_back(t.label());
  for (const auto& f : c.null_suite) out.rows.push_back({f, std::vector<std::size_t>(T, 0), 0, {}});

  for (std::size_t n : c.n_values)
    for (std::size_t d : c.d_values) {
      const auto resolved = resolve_tests(table, c, n, d);
      std::vector<TestSpec> specs;
      for (const auto& r : resolved) specs.push_back(r.spec);
      say(log, "null trials " + cell_name(n, d));

      std::vector<char> reject(F * c.R * T, 0);
      const auto base = stage_seed(c, Stage::null_trials, n, d);
      parallel_for(F * c.R, c.workers, [&](std::size_t task) {
        const std::size_t f = task / c.R, r = task % c.R;
        const auto cloud = sample_null(c.null_suite[f], n, d, family_seed(base, c.null_suite[f]).child(r));
        const auto stats = evaluate_statistics(cloud, specs, c.dtm);
        for (std::size_t t = 0; t < T; ++t) reject[task * T + t] = decide(stats[t], resolved[t].cutoff).reject;
      });
      for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t r = 0; r < c.R; ++r)
          for (std::size_t t = 0; t < T; ++t) out.rows[f].rejections[t] += reject[(f * c.R + r) * T + t];
        out.rows[f].trials += c.R;
      }
    }

  for (auto& row : out.rows) {
    row.rates.resize(T);
    for (std::size_t t = 0; t < T; ++t)
      row.rates[t] = static_cast<double>(row.rejections[t]) / static_cast<double>(row.trials);
  }
  return out;
}

void write_null_table_csv(const NullTable& table, std::ostream& out) {
  out << "family";
  for (const auto& t : table.tests) out << ',' << t;
  out << '\n';
  for (const auto& row : table.rows) {
    out << to_string(row.family);
    for (double r : row.rates) out << ',' << detail::format_short(r);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Power

std::vector<PowerRecord> run_power(const ExperimentConfig& c, const CutoffTable& table, const LogFn& log) {
  c.validate();
  if (c.R == 0) throw parameter_error("R must be >= 1 for power runs");
  const auto alts = c.resolved_alternatives();
  const std::size_t T = c.tests.size();

  struct Job {
    std::size_t alt;
    double eps;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < alts.size(); ++a) {
    if (alts[a].eps_given) jobs.push_back({a, alts[a].spec.epsilon});
    else
      for (double e : c.eps_values) jobs.push_back({a, e});
  }

  // [alt][n][d][eps] ordering is restored below from this keyed collection.
  std::map<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>, std::vector<std::size_t>> counts;
  for (std::size_t n : c.n_values)
    for (std::size_t d : c.d_values) {
      const auto resolved = resolve_tests(table, c, n, d);
      std::vector<TestSpec> specs;
      for (const auto& r : resolved) specs.push_back(r.spec);
      say(log, "power trials " + cell_name(n, d));

      std::vector<char> reject(jobs.size() * c.R * T, 0);
      const auto base = stage_seed(c, Stage::power_trials, n, d);
      parallel_for(jobs.size() * c.R, c.workers, [&](std::size_t task) {
        const auto& job = jobs[task / c.R];
        const std::size_t r = task % c.R;
        auto spec = alts[job.alt].spec;
        spec.epsilon = job.eps;
        const auto seed = base.child(stable_hash(to_string(spec))).child(stable_hash(detail::format_short(job.eps))).child(r);
        const auto cloud = sample_alternative(spec, n, d, seed);
        const auto stats = evaluate_statistics(cloud, specs, c.dtm);
        for (std::size_t t = 0; t < T; ++t) reject[task * T + t] = decide(stats[t], resolved[t].cutoff).reject;
      });
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        std::vector<std::size_t> k(T, 0);
        for (std::size_t r = 0; r < c.R; ++r)
          for (std::size_t t = 0; t < T; ++t) k[t] += reject[(j * c.R + r) * T + t];
        counts[{jobs[j].alt, n, d, j}] = std::move(k);
      }
    }

  std::vector<PowerRecord> records;
  for (const auto& [key, k] : counts) {
    const auto& [a, n, d, j] = key;
    for (std::size_t t = 0; t < T; ++t) {
      PowerRecord rec;
      rec.family = to_string(alts[a].spec);
      rec.mechanism = alts[a].spec.mechanism();
      rec.n = n;
      rec.d = d;
      rec.epsilon = jobs[j].eps;
      rec.test = c.tests[t].label();
      rec.rejections = k[t];
      rec.R = c.R;
      rec.power = static_cast<double>(k[t]) / static_cast<double>(c.R);
      records.push_back(std::move(rec));
    }
  }
  return records;
}

void write_power_csv(const std::vector<PowerRecord>& records, std::ostream& out) {
  std::vector<double> eps;
  std::vector<std::tuple<std::string, Mechanism, std::string>> keys;
  for (const auto& r : records) {
    if (std::find(eps.begin(), eps.end(), r.epsilon) == eps.end()) eps.push_back(r.epsilon);
    std::tuple key{r.family, r.mechanism, r.test};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::sort(eps.begin(), eps.end());

  out << "family,mechanism,test";
  for (double e : eps) out << ',' << detail::format_short(e);
  out << '\n';
  for (const auto& [family, mech, test] : keys) {
    out << family << ',' << mechanism_label(mech) << ',' << test;
    for (double e : eps) {
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& r : records)
        if (r.family == family && r.test == test && r.epsilon == e) {
          sum += r.power;
          ++count;
        }
      out << ',';
      if (count) out << detail::format_short(sum / static_cast<double>(count));
    }
    out << '\n';
  }
}

void write_power_records_csv(const std::vector<PowerRecord>& records, std::ostream& out) {
  out << "family,mechanism,n,d,eps,test,rejections,R,power\n";
  for (const auto& r : records)
    out << r.family << ',' << mechanism_label(r.mechanism) << ',' << r.n << ',' << r.d << ','
        << detail::format_short(r.epsilon) << ',' << r.test << ',' << r.rejections << ',' << r.R << ','
        << detail::format_short(r.power) << '\n';
}

std::vector<PowerRecord> read_power_records_csv(std::istream& in) {
  std::vector<PowerRecord> out;
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || detail::trim(line) != "family,mechanism,n,d,eps,test,rejections,R,power")
    throw parse_error("unexpected header", 1);
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != 9) throw parse_error("expected 9 fields", lineno);
    try {
      PowerRecord r;
      r.family = std::string(detail::trim(f[0]));
      const auto mech = detail::trim(f[1]);
      if (mech == "A") r.mechanism = Mechanism::A;
      else if (mech == "B") r.mechanism = Mechanism::B;
      else if (mech == "C") r.mechanism = Mechanism::C;
      else throw parse_error("unknown mechanism '" + std::string(mech) + "'");
      r.n = detail::parse_uint(f[2]);
      r.d = detail::parse_uint(f[3]);
      r.epsilon = detail::parse_double(f[4]);
      r.test = std::string(detail::trim(f[5]));
      r.rejections = detail::parse_uint(f[6]);
      r.R = detail::parse_uint(f[7]);
      r.power = detail::parse_double(f[8]);
      out.push_back(std::move(r));
    } catch (const parse_error& e) {
      throw parse_error(e.what(), lineno);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mechanism map

const MechanismRow* MechanismMap::row(Mechanism m) const {
  for (const auto& r : rows)
    if (r.mechanism == m) return &r;
  return nullptr;
}

double MechanismMap::power(Mechanism m, const std::string& test) const {
  const auto* r = row(m);
  auto it = std::find(tests.begin(), tests.end(), test);
  if (!r || it == tests.end()) throw parameter_error("no mechanism-map entry for " + test);
  return r->mean_power[static_cast<std::size_t>(it - tests.begin())];
}

MechanismMap build_mechanism_map(const std::vector<PowerRecord>& records) {
  if (records.empty()) throw parameter_error("mechanism map needs at least one power record");
  MechanismMap map;
  for (const char* t : {"VR-TP", "VR-MTE", "DTM-TP", "DTM-MTE"})
    for (const auto& r : records)
      if (r.test == t) {
        map.tests.push_back(t);
        break;
      }
  for (const auto& r : records)
    if (std::find(map.tests.begin(), map.tests.end(), r.test) == map.tests.end()) map.tests.push_back(r.test);

  for (Mechanism m : {Mechanism::A, Mechanism::B, Mechanism::C}) {
    // family -> test -> (sum, count)
    std::map<std::string, std::map<std::string, std::pair<double, std::size_t>>> acc;
    for (const auto& r : records)
      if (r.mechanism == m) {
        auto& cell = acc[r.family][r.test];
        cell.first += r.power;
        ++cell.second;
      }
    if (acc.empty()) continue;

    MechanismRow row;
    row.mechanism = m;
    for (const auto& t : map.tests) {
      double sum = 0.0;
      std::size_t families = 0;
      for (const auto& [family, per_test] : acc) {
        auto it = per_test.find(t);
        if (it == per_test.end()) continue;
        sum += it->second.first / static_cast<double>(it->second.second);
        ++families;
      }
      row.mean_power.push_back(families ? sum / static_cast<double>(families) : 0.0);
    }
    const double best = *std::max_element(row.mean_power.begin(), row.mean_power.end());
    for (double p : row.mean_power) row.best.push_back(p == best);
    map.rows.push_back(std::move(row));
  }
  return map;
}

void write_mechanism_map_csv(const MechanismMap& map, std::ostream& out) {
  out << "mechanism";
  for (const auto& t : map.tests) out << ',' << t;
  out << ",best\n";
  for (const auto& row : map.rows) {
    out << mechanism_label(row.mechanism);
    std::vector<std::string> best;
    for (std::size_t t = 0; t < map.tests.size(); ++t) {
      out << ',' << detail::format_short(row.mean_power[t]);
      if (row.best[t]) best.push_back(map.tests[t]);
    }
    out << ',' << join(best, ";") << '\n';
  }
}

// ---------------------------------------------------------------------------
// Outputs

std::string version_string() { return std::string("phcollapse ") + PHC_VERSION; }

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw error("cannot write " + tmp.string());
    out << content;
    if (!out) throw error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_meta(const std::filesystem::path& path, const ExperimentConfig& c, const std::string& kind,
                const std::vector<std::string>& extra) {
  std::vector<std::string> nulls, alts, tests, ns, ds, eps;
  for (const auto& f : c.null_suite) nulls.push_back(to_string(f));
  for (const auto& a : c.resolved_alternatives()) alts.push_back(to_string(a.spec, a.eps_given));
  for (const auto& t : c.tests) tests.push_back(t.label());
  for (auto n : c.n_values) ns.push_back(std::to_string(n));
  for (auto d : c.d_values) ds.push_back(std::to_string(d));
  for (auto e : c.eps_values) eps.push_back(detail::format_short(e));

  std::ostringstream s;
  s << "output = " << kind << '\n'
    << "version = " << version_string() << '\n'
    << "profile = " << c.profile << '\n'
    << "n = " << join(ns, ",") << '\n'
    << "d = " << join(ds, ",") << '\n'
    << "eps = " << join(eps, ",") << '\n'
    << "null = " << join(nulls, ",") << '\n'
    << "alt = " << join(alts, ",") << '\n'
    << "tests = " << join(tests, ",") << '\n'
    << "B = " << c.B << '\n'
    << "R = " << c.R << '\n'
    << "tau-B = " << c.tau_B << '\n'
    << "tau-level = " << detail::format_short(c.tau_level) << '\n'
    << "alpha = " << detail::format_short(c.alpha) << '\n'
    << "alpha_corrected = " << detail::format_short(c.alpha_corrected()) << '\n'
    << "correction = bonferroni over tests\n"
    << "cutoff_rule = ceil((B+1)(1-alpha_corrected)) order statistic, max over null families\n"
    << "tau_rule = linear quantile of pooled positive lifetimes\n"
    << "dtm-m = " << detail::format_short(c.dtm.m) << '\n'
    << "seed = " << c.master_seed << '\n';
  for (const auto& line : extra) s << line << '\n';
  write_text_file(path, s.str());
}

}  // namespace phc
