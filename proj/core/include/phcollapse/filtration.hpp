#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "phcollapse/geometry.hpp"

namespace phc {

enum class FiltrationKind { VR, DTM };

/// Largest point count accepted by the filtration builders. At 128 points
/// the full 3-skeleton has about 1.1e7 simplices.
inline constexpr std::size_t default_size_cap = 128;

struct Simplex {
  std::array<std::uint32_t, 4> vertices{};  // ascending; only the first dim+1 are used
  std::uint8_t dim = 0;
  double value = 0.0;

  std::span<const std::uint32_t> verts() const { return {vertices.data(), std::size_t{dim} + 1u}; }
  friend bool operator==(const Simplex&, const Simplex&) = default;
};

/// Filtration order: value, then dimension, then lexicographic vertices.
bool filtration_less(const Simplex& a, const Simplex& b);

/// Simplices sorted in filtration order, closed under faces.
struct FilteredComplex {
  std::size_t n_vertices = 0;
  FiltrationKind kind = FiltrationKind::VR;
  std::uint8_t max_dim = 0;
  std::vector<Simplex> simplices;
};

/// Distance-to-measure mass parameter. Uses k = max(1, ceil(m n)) neighbours.
struct DTMParams {
  double m = 0.1;
  std::size_t neighbours(std::size_t n) const;
};

/// Every simplex enters at its diameter; truncated at the largest pairwise
/// distance, so the full max_dim-skeleton is present.
FilteredComplex vr_filtration(const DistanceMatrix& dm, int max_dim, std::size_t size_cap = default_size_cap);

/// Root-mean-square distance from each point to its k nearest sample points
/// (itself included).
std::vector<double> dtm_values(const PointCloud& cloud, const DTMParams& params);

/// Weighted-Rips filtration with exponent 1 and DTM vertex weights.
FilteredComplex dtm_filtration(const PointCloud& cloud, const DTMParams& params, int max_dim,
                               std::size_t size_cap = default_size_cap);

/// Same construction from a distance matrix and precomputed vertex weights.
FilteredComplex weighted_rips_filtration(const DistanceMatrix& dm, std::span<const double> weights, int max_dim,
                                         std::size_t size_cap = default_size_cap);

/// Edge value of the exponent-1 weighted-Rips construction.
double weighted_edge_value(double distance, double fi, double fj);

/// Debug dump: header then one `dim,v0,v1,v2,v3,value` line per simplex.
void write_complex_csv(const FilteredComplex& complex, std::ostream& out);

}  // namespace phc
