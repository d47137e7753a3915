#pragma once

#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "phcollapse/filtration.hpp"

namespace phc {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

struct PersistencePair {
  double birth = 0.0;
  double death = infinity;

  bool essential() const noexcept { return death == infinity; }
  friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
  friend auto operator<=>(const PersistencePair&, const PersistencePair&) = default;
};

/// Degree-q diagram. Pairs are kept sorted by (birth, death); zero-length
/// pairs are retained.
struct PersistenceDiagram {
  int q = 0;
  std::vector<PersistencePair> pairs;

  friend bool operator==(const PersistenceDiagram&, const PersistenceDiagram&) = default;
};

struct Lifetimes {
  int q = 0;
  std::vector<double> values;
};

/// Diagrams for q = 0..q_max over Z/2, by column reduction with clearing:
/// dimensions are reduced top-down and every pivot row found in dimension
/// k+1 zeroes the corresponding column of dimension k before it is visited.
///
/// The complex must be sorted in filtration order, closed under faces and
/// contain simplices up to dimension q_max + 1; violations raise
/// contract_error.
std::vector<PersistenceDiagram> compute_persistence(const FilteredComplex& complex, int q_max);

/// Reference implementation: dense boundary matrix over every simplex,
/// plain left-to-right reduction, no clearing. Only for n <= 10.
std::vector<PersistenceDiagram> persistence_bruteforce(const FilteredComplex& complex, int q_max);

inline constexpr std::size_t bruteforce_max_vertices = 10;

/// death - birth for every finite pair; essential pairs are dropped.
Lifetimes lifetimes(const PersistenceDiagram& diagram);

/// Exact bottleneck distance (L-infinity ground metric, diagonal matching).
/// Diagonal points are ignored; at most bottleneck_max_points off-diagonal
/// points per diagram.
double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b);

inline constexpr std::size_t bottleneck_max_points = 100;

/// Header then `q,birth,death` lines, `inf` for essential deaths.
void write_diagrams_csv(std::span<const PersistenceDiagram> diagrams, std::ostream& out);

}  // namespace phc
