#include <algorithm>
#include <numeric>
#include <random>

#include "phcollapse/harness.hpp"

namespace phc {

namespace {

// Kruskal with union-find over all edges of the complete graph.
std::vector<double> mst_edge_lengths(const DistanceMatrix& dm) {
  const std::size_t n = dm.size();
  std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(dm(i, j), i, j);
  std::sort(edges.begin(), edges.end());
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<double> out;
  for (const auto& [w, i, j] : edges) {
    const auto a = root(i), b = root(j);
    if (a == b) continue;
    parent[a] = b;
    out.push_back(w);
  }
  return out;
}

}  // namespace

bool SelfTestResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second; });
}

SelfTestResult run_selftest(std::uint64_t seed, std::size_t clouds) {
  SelfTestResult result;
  const SeedSequence root(seed);
  std::mt19937_64 pick = root.child(0).engine();

  for (auto kind : {FiltrationKind::VR, FiltrationKind::DTM}) {
    bool ok = true;
    for (std::size_t i = 0; i < clouds && ok; ++i) {
      const std::size_t n = 4 + pick() % 5;
      const std::size_t d = 2 + pick() % 2;
      const auto cloud = sample_null({NullFamily::standard_gaussian}, n, d, root.child(1).child(i));
      const auto complex = kind == FiltrationKind::VR ? vr_filtration(pairwise_distances(cloud), 3)
                                                      : dtm_filtration(cloud, {}, 3);
      ok = compute_persistence(complex, 2) == persistence_bruteforce(complex, 2);
    }
    result.checks.emplace_back("oracle equivalence (" + to_string(kind) + ", " + std::to_string(clouds) + " clouds)",
                               ok);
  }

  bool mst_ok = true;
  for (std::size_t i = 0; i < clouds / 4 + 1 && mst_ok; ++i) {
    const auto cloud = sample_null({NullFamily::standard_gaussian}, 30, 3, root.child(2).child(i));
    const auto dm = pairwise_distances(cloud);
    const auto dg = compute_persistence(vr_filtration(dm, 1), 0);
    std::vector<double> deaths;
    for (const auto& p : dg[0].pairs)
      if (!p.essential()) deaths.push_back(p.death);
    auto mst = mst_edge_lengths(dm);
    std::sort(deaths.begin(), deaths.end());
    std::sort(mst.begin(), mst.end());
    mst_ok = deaths == mst;
  }
  result.checks.emplace_back("H0 deaths equal MST edge lengths", mst_ok);
  return result;
}

}  // namespace phc
