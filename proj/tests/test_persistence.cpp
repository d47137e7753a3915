#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "phcollapse/error.hpp"
#include "phcollapse/generators.hpp"
#include "phcollapse/persistence.hpp"

using namespace phc;

namespace {

PersistenceDiagram diagram(int q, std::vector<PersistencePair> pairs) {
  std::sort(pairs.begin(), pairs.end());
  return {q, std::move(pairs)};
}

std::vector<PersistencePair> nonzero(const PersistenceDiagram& d) {
  std::vector<PersistencePair> out;
  for (const auto& p : d.pairs)
    if (p.death > p.birth) out.push_back(p);
  return out;
}

PointCloud jitter(const PointCloud& c, double delta, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud out = c;
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::vector<double> v(c.dim());
    double s = 0.0;
    for (double& x : v) {
      x = g(rng);
      s += x * x;
    }
    const double r = delta * u(rng) / std::sqrt(s);
    for (std::size_t j = 0; j < c.dim(); ++j) out(i, j) += r * v[j];
  }
  return out;
}

}  // namespace

TEST_CASE("single point") {
  const auto c = vr_filtration(pairwise_distances(oracle::make_cloud(2, {1, 1})), 3);
  for (const auto& dgms : {compute_persistence(c, 2), persistence_bruteforce(c, 2)}) {
    REQUIRE(dgms.size() == 3);
    CHECK(dgms[0].pairs == std::vector<PersistencePair>{{0.0, infinity}});
    CHECK(dgms[1].pairs.empty());
    CHECK(dgms[2].pairs.empty());
  }
}

TEST_CASE("two points") {
  const double r = 2.5;
  const auto c = vr_filtration(pairwise_distances(oracle::make_cloud(1, {0, r})), 3);
  for (const auto& dgms : {compute_persistence(c, 2), persistence_bruteforce(c, 2)}) {
    CHECK(dgms[0].pairs == std::vector<PersistencePair>{{0.0, r}, {0.0, infinity}});
    CHECK(dgms[1].pairs.empty());
  }
}

TEST_CASE("unit square diagrams") {
  const auto c = vr_filtration(pairwise_distances(oracle::unit_square()), 3);
  const auto dgms = compute_persistence(c, 2);
  CHECK(dgms == persistence_bruteforce(c, 2));
  CHECK(nonzero(dgms[1]) == std::vector<PersistencePair>{{1.0, std::sqrt(2.0)}});
  CHECK(nonzero(dgms[2]).empty());
  std::size_t finite0 = 0, essential0 = 0;
  for (const auto& p : dgms[0].pairs) (p.essential() ? essential0 : finite0) += 1;
  CHECK(finite0 == 3);
  CHECK(essential0 == 1);
  for (const auto& p : dgms[0].pairs)
    if (!p.essential()) CHECK(p.death == 1.0);
}

TEST_CASE("diagram invariants on random clouds") {
  for (std::uint32_t seed = 0; seed < 10; ++seed) {
    const auto dgms = compute_persistence(vr_filtration(pairwise_distances(oracle::uniform_cloud(12, 3, seed)), 3), 2);
    std::size_t essential = 0;
    for (const auto& d : dgms)
      for (const auto& p : d.pairs) {
        CHECK(p.death >= p.birth);
        if (p.essential()) {
          ++essential;
          CHECK(d.q == 0);
        }
      }
    CHECK(essential == 1);
    for (const auto& d : dgms) CHECK(std::is_sorted(d.pairs.begin(), d.pairs.end()));
  }
}

TEST_CASE("H0 deaths equal minimum spanning tree lengths") {
  for (std::uint32_t seed = 0; seed < 10; ++seed) {
    const auto dm = pairwise_distances(oracle::uniform_cloud(40, 3, 100 + seed));
    const auto dgms = compute_persistence(vr_filtration(dm, 1), 0);
    std::vector<double> deaths;
    for (const auto& p : dgms[0].pairs)
      if (!p.essential()) deaths.push_back(p.death);
    std::sort(deaths.begin(), deaths.end());
    CHECK(deaths == oracle::prim_mst(dm));
  }
}

TEST_CASE("reduction matches the brute-force oracle") {
  std::mt19937 rng(77);
  for (int i = 0; i < 60; ++i) {
    const std::size_t n = 4 + rng() % 5, d = 2 + rng() % 2;
    const auto cloud = oracle::uniform_cloud(n, d, rng());
    const auto vr = vr_filtration(pairwise_distances(cloud), 3);
    CHECK(compute_persistence(vr, 2) == persistence_bruteforce(vr, 2));
    const auto dtm = dtm_filtration(cloud, {0.4}, 3);
    CHECK(compute_persistence(dtm, 2) == persistence_bruteforce(dtm, 2));
  }
  // tied values: grid points
  const auto grid = oracle::make_cloud(2, {0, 0, 1, 0, 2, 0, 0, 1, 1, 1, 2, 1, 0, 2, 1, 2});
  const auto c = vr_filtration(pairwise_distances(grid), 3);
  CHECK(compute_persistence(c, 2) == persistence_bruteforce(c, 2));
}

TEST_CASE("Euler characteristic consistency") {
  std::mt19937 rng(5);
  for (std::uint32_t seed = 0; seed < 6; ++seed) {
    const auto c = vr_filtration(pairwise_distances(oracle::uniform_cloud(10, 3, seed)), 3);
    const auto dgms = compute_persistence(c, 2);
    const double top = c.simplices.back().value;
    std::uniform_real_distribution<double> u(0.0, top);
    for (int k = 0; k < 5; ++k) {
      const double t = u(rng);
      // b3 of the 3-dimensional complex: tetrahedra present minus H2 deaths so far
      long tets = 0, killed2 = 0;
      for (const auto& s : c.simplices) tets += s.dim == 3 && s.value <= t;
      for (const auto& p : dgms[2].pairs) killed2 += !p.essential() && p.death <= t;
      CHECK(oracle::alive_betti_sum(dgms, t) - (tets - killed2) == oracle::euler_characteristic(c, t));
    }
  }
}

TEST_CASE("stability under small perturbations") {
  const double delta = 0.01;
  for (std::uint32_t seed = 0; seed < 8; ++seed) {
    const auto x = oracle::uniform_cloud(15, 3, seed);
    const auto y = jitter(x, delta, seed + 1000);
    const auto a = compute_persistence(vr_filtration(pairwise_distances(x), 3), 2);
    const auto b = compute_persistence(vr_filtration(pairwise_distances(y), 3), 2);
    for (int q = 0; q <= 2; ++q) CHECK(bottleneck_distance(a[q], b[q]) <= 2 * delta + 1e-12);
  }
}

TEST_CASE("lifetimes") {
  CHECK(lifetimes(diagram(0, {{0.0, infinity}})).values.empty());
  const auto l = lifetimes(diagram(1, {{1.0, std::sqrt(2.0)}}));
  CHECK(l.q == 1);
  CHECK(l.values == std::vector<double>{std::sqrt(2.0) - 1.0});
  auto m = lifetimes(diagram(0, {{0, 1}, {0, 3}, {2, 2}})).values;
  std::sort(m.begin(), m.end());
  CHECK(m == std::vector<double>{0, 1, 3});
}

TEST_CASE("bottleneck examples") {
  const auto a = diagram(1, {{0, 2}});
  CHECK(bottleneck_distance(a, a) == 0.0);
  CHECK(bottleneck_distance(a, diagram(1, {})) == 1.0);
  CHECK(bottleneck_distance(a, diagram(1, {{0.5, 2.5}})) == 0.5);
  CHECK(bottleneck_distance(diagram(1, {{1, 1}, {0, 2}}), a) == 0.0);
  CHECK(bottleneck_distance(diagram(0, {{0, infinity}}), diagram(0, {{0.25, infinity}})) == 0.25);
  CHECK(bottleneck_distance(diagram(0, {{0, infinity}}), diagram(0, {})) == infinity);
  CHECK_THROWS_AS(bottleneck_distance(diagram(0, {}), diagram(1, {})), parameter_error);
  std::vector<PersistencePair> many;
  for (int i = 0; i < 101; ++i) many.push_back({0.0, 1.0 + i});
  CHECK_THROWS_AS(bottleneck_distance(diagram(1, many), diagram(1, {})), resource_error);
}

TEST_CASE("bottleneck agrees with exhaustive matching") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 150; ++trial) {
    auto draw = [&](std::size_t count) {
      std::vector<PersistencePair> out;
      for (std::size_t i = 0; i < count; ++i) {
        const double b = u(rng), l = u(rng);
        out.push_back({b, b + l});
      }
      return out;
    };
    const auto pa = draw(rng() % 5), pb = draw(rng() % 5);
    CHECK(bottleneck_distance(diagram(1, pa), diagram(1, pb)) ==
          doctest::Approx(oracle::bottleneck_exhaustive(pa, pb)).epsilon(1e-12));
  }
}

TEST_CASE("contract violations") {
  auto c = vr_filtration(pairwise_distances(oracle::unit_square()), 3);

  SUBCASE("missing higher simplices") {
    const auto low = vr_filtration(pairwise_distances(oracle::unit_square()), 1);
    CHECK_THROWS_AS(compute_persistence(low, 1), contract_error);
    CHECK_NOTHROW(compute_persistence(low, 0));
  }
  SUBCASE("unsorted") {
    std::swap(c.simplices[0], c.simplices.back());
    CHECK_THROWS_AS(compute_persistence(c, 2), contract_error);
  }
  SUBCASE("non-monotone") {
    for (auto& s : c.simplices)
      if (s.dim == 0 && s.vertices[0] == 3) s.value = 10.0;
    std::stable_sort(c.simplices.begin(), c.simplices.end(), filtration_less);
    CHECK_THROWS_AS(compute_persistence(c, 2), contract_error);
    CHECK_THROWS_AS(persistence_bruteforce(c, 2), contract_error);
  }
  SUBCASE("missing face") {
    c.simplices.erase(c.simplices.begin() + 5);
    CHECK_THROWS_AS(compute_persistence(c, 2), contract_error);
    CHECK_THROWS_AS(persistence_bruteforce(c, 2), contract_error);
  }
  SUBCASE("duplicate") {
    c.simplices.insert(c.simplices.begin() + 5, c.simplices[5]);
    CHECK_THROWS_AS(compute_persistence(c, 2), contract_error);
    CHECK_THROWS_AS(persistence_bruteforce(c, 2), contract_error);
  }
  SUBCASE("degree range") {
    CHECK_THROWS_AS(compute_persistence(c, 3), parameter_error);
    CHECK_THROWS_AS(compute_persistence(c, -1), parameter_error);
  }
}

TEST_CASE("brute force size limit") {
  const auto c = vr_filtration(pairwise_distances(oracle::uniform_cloud(11, 2, 1)), 2);
  CHECK_THROWS_AS(persistence_bruteforce(c, 1), resource_error);
  CHECK_NOTHROW(compute_persistence(c, 1));
}

TEST_CASE("diagram csv dump") {
  const std::vector<PersistenceDiagram> dgms{diagram(0, {{0, 5}, {0, infinity}}), diagram(1, {{1, 1.5}})};
  std::ostringstream out;
  write_diagrams_csv(dgms, out);
  CHECK(out.str() == "q,birth,death\n0,0,5\n0,0,inf\n1,1,1.5\n");
}

TEST_CASE("generated clouds of the experiment sizes") {
  const auto cloud = sample_null({NullFamily::noisy_sphere, 1.0, 0.1}, 50, 5, SeedSequence(1));
  const auto dgms = compute_persistence(vr_filtration(pairwise_distances(cloud), 2), 1);
  CHECK(dgms.size() == 2);
  CHECK(dgms[0].pairs.size() == 50);
}
