#include "phcollapse/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "phcollapse/error.hpp"
#include "text.hpp"

namespace phc {

namespace {

void check_build_args(std::size_t n, int max_dim, std::size_t size_cap) {
  if (max_dim < 0 || max_dim > 3) throw parameter_error("max_dim must be in 0..3");
  if (n == 0) throw parameter_error("filtration needs at least one point");
  if (n > size_cap)
    throw resource_error("filtration on " + std::to_string(n) + " points exceeds the size cap of " +
                         std::to_string(size_cap));
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Full max_dim-skeleton on n vertices; a simplex takes the maximum over its
// vertex values and edge values.
FilteredComplex build_clique_complex(std::size_t n, std::span<const double> vertex_value,
                                     const std::vector<double>& edge_value, int max_dim, FiltrationKind kind) {
  FilteredComplex c;
  c.n_vertices = n;
  c.kind = kind;
  c.max_dim = static_cast<std::uint8_t>(max_dim);

  std::size_t total = 0;
  for (int k = 0; k <= max_dim; ++k) total += binomial(n, static_cast<std::size_t>(k) + 1);
  c.simplices.reserve(total);

  auto ev = [&](std::size_t i, std::size_t j) { return edge_value[i * n + j]; };
  using V = std::uint32_t;

  for (std::size_t a = 0; a < n; ++a) {
    c.simplices.push_back({{V(a)}, 0, vertex_value[a]});
    if (max_dim < 1) continue;
    for (std::size_t b = a + 1; b < n; ++b) {
      const double ab = ev(a, b);
      c.simplices.push_back({{V(a), V(b)}, 1, ab});
      if (max_dim < 2) continue;
      for (std::size_t e = b + 1; e < n; ++e) {
        const double abe = std::max({ab, ev(a, e), ev(b, e)});
        c.simplices.push_back({{V(a), V(b), V(e)}, 2, abe});
        if (max_dim < 3) continue;
        for (std::size_t f = e + 1; f < n; ++f) {
          const double abef = std::max({abe, ev(a, f), ev(b, f), ev(e, f)});
          c.simplices.push_back({{V(a), V(b), V(e), V(f)}, 3, abef});
        }
      }
    }
  }
  std::sort(c.simplices.begin(), c.simplices.end(), filtration_less);
  return c;
}

}  // namespace

bool filtration_less(const Simplex& a, const Simplex& b) {
  if (a.value != b.value) return a.value < b.value;
  if (a.dim != b.dim) return a.dim < b.dim;
  return a.vertices < b.vertices;
}

std::size_t DTMParams::neighbours(std::size_t n) const {
  if (!(m > 0.0 && m <= 1.0)) throw parameter_error("DTM mass parameter m must be in (0, 1]");
  // guard against m*n landing a rounding step above an integer
  const double raw = std::ceil(m * static_cast<double>(n) - 1e-9);
  const auto k = static_cast<std::size_t>(std::max(1.0, raw));
  return std::min(k, n);
}

FilteredComplex vr_filtration(const DistanceMatrix& dm, int max_dim, std::size_t size_cap) {
  const std::size_t n = dm.size();
  check_build_args(n, max_dim, size_cap);
  const std::vector<double> zeros(n, 0.0);
  return build_clique_complex(n, zeros, dm.entries(), max_dim, FiltrationKind::VR);
}

std::vector<double> dtm_values(const PointCloud& cloud, const DTMParams& params) {
  const std::size_t n = cloud.size();
  const std::size_t k = params.neighbours(n);
  std::vector<double> out(n);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double r = euclidean_distance(cloud.point(i), cloud.point(j));
      sq[j] = r * r;
    }
    std::nth_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(k - 1), sq.end());
    std::sort(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(k));
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += sq[j];
    out[i] = std::sqrt(s / static_cast<double>(k));
  }
  return out;
}

double weighted_edge_value(double distance, double fi, double fj) {
  if (distance <= std::abs(fi - fj)) return std::max(fi, fj);
  return (distance + fi + fj) / 2.0;
}

FilteredComplex weighted_rips_filtration(const DistanceMatrix& dm, std::span<const double> weights, int max_dim,
                                         std::size_t size_cap) {
  const std::size_t n = dm.size();
  check_build_args(n, max_dim, size_cap);
  if (weights.size() != n) throw parameter_error("one weight per vertex required");
  std::vector<double> edges(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      edges[i * n + j] = i == j ? weights[i] : weighted_edge_value(dm(i, j), weights[i], weights[j]);
  return build_clique_complex(n, weights, edges, max_dim, FiltrationKind::DTM);
}

FilteredComplex dtm_filtration(const PointCloud& cloud, const DTMParams& params, int max_dim, std::size_t size_cap) {
  check_build_args(cloud.size(), max_dim, size_cap);
  const auto f = dtm_values(cloud, params);
  return weighted_rips_filtration(pairwise_distances(cloud), f, max_dim, size_cap);
}

void write_complex_csv(const FilteredComplex& complex, std::ostream& out) {
  out << "dim,v0,v1,v2,v3,value\n";
  for (const auto& s : complex.simplices) {
    out << int(s.dim);
    for (int k = 0; k < 4; ++k) {
      out << ',';
      if (k <= s.dim) out << s.vertices[static_cast<std::size_t>(k)];
    }
    out << ',' << detail::format_exact(s.value) << '\n';
  }
}

}  // namespace phc
