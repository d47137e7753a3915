#include "phcollapse/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <string>

#include "phcollapse/error.hpp"
#include "text.hpp"

namespace phc {

namespace {

using Column = std::vector<std::uint32_t>;
constexpr std::uint32_t none = std::numeric_limits<std::uint32_t>::max();

void check_degree(const FilteredComplex& complex, int q_max) {
  if (q_max < 0 || q_max > 2) throw parameter_error("q_max must be in 0..2");
  if (complex.max_dim < q_max + 1)
    throw contract_error("complex must contain simplices up to dimension " + std::to_string(q_max + 1));
}

std::vector<PersistenceDiagram> empty_diagrams(int q_max) {
  std::vector<PersistenceDiagram> out(static_cast<std::size_t>(q_max) + 1);
  for (int q = 0; q <= q_max; ++q) out[static_cast<std::size_t>(q)].q = q;
  return out;
}

void finish(std::vector<PersistenceDiagram>& diagrams) {
  for (auto& d : diagrams) std::sort(d.pairs.begin(), d.pairs.end());
}

// Combinatorial number system: a k-simplex {v0 < ... < vk} maps to
// sum_i C(v_i, i+1), a bijection onto [0, C(n, k+1)).
class SimplexIndex {
public:
  SimplexIndex(std::size_t n, int max_dim) : n_(n), binom_((n + 1) * 5, 0) {
    for (std::size_t v = 0; v <= n; ++v) {
      binom(v, 0) = 1;
      for (std::size_t k = 1; k <= 4; ++k) binom(v, k) = v == 0 ? 0 : binom(v - 1, k - 1) + binom(v - 1, k);
    }
    slots_.resize(static_cast<std::size_t>(max_dim) + 1);
    for (int k = 0; k <= max_dim; ++k) slots_[static_cast<std::size_t>(k)].assign(binom(n, static_cast<std::size_t>(k) + 1), none);
  }

  std::uint32_t& slot(std::span<const std::uint32_t> verts) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < verts.size(); ++i) {
      if (verts[i] >= n_ || (i > 0 && verts[i] <= verts[i - 1]))
        throw contract_error("simplex vertices must be ascending and below n_vertices");
      idx += binom(verts[i], i + 1);
    }
    return slots_[verts.size() - 1][idx];
  }

private:
  std::size_t& binom(std::size_t v, std::size_t k) { return binom_[v * 5 + k]; }
  std::size_t n_;
  std::vector<std::size_t> binom_;
  std::vector<std::vector<std::uint32_t>> slots_;
};

// Symmetric difference of two ascending columns, written into `a`.
void add_column(Column& a, const Column& b, Column& scratch) {
  scratch.clear();
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(scratch));
  a.swap(scratch);
}

}  // namespace

std::vector<PersistenceDiagram> compute_persistence(const FilteredComplex& complex, int q_max) {
  check_degree(complex, q_max);
  const auto& s = complex.simplices;
  if (s.size() >= none) throw resource_error("complex too large to index");
  const int top = q_max + 1;

  // Validate order and closure while locating every simplex.
  SimplexIndex index(complex.n_vertices, complex.max_dim);
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (j > 0 && !filtration_less(s[j - 1], s[j]))
      throw contract_error("complex is not sorted in filtration order at position " + std::to_string(j));
    if (s[j].dim > complex.max_dim) throw contract_error("simplex dimension exceeds complex max_dim");
    auto& slot = index.slot(s[j].verts());
    if (slot != none) throw contract_error("simplex listed twice");
    slot = static_cast<std::uint32_t>(j);
  }

  auto boundary = [&](std::size_t j, Column& col) {
    col.clear();
    const auto& sx = s[j];
    std::array<std::uint32_t, 3> face{};
    for (std::size_t drop = 0; drop <= sx.dim; ++drop) {
      std::size_t m = 0;
      for (std::size_t i = 0; i <= sx.dim; ++i)
        if (i != drop) face[m++] = sx.vertices[i];
      const std::uint32_t pos = index.slot(std::span<const std::uint32_t>(face.data(), m));
      if (pos == none || pos >= j)
        throw contract_error("non-monotone complex: a face of the simplex at position " + std::to_string(j) +
                             " is missing or enters later");
      col.push_back(pos);
    }
    std::sort(col.begin(), col.end());
  };

  // Faces of simplices above `top` are never needed, but closure below it is.
  for (std::size_t j = 0; j < s.size(); ++j)
    if (s[j].dim >= 1 && s[j].dim <= top) {
      Column probe;
      boundary(j, probe);
    }

  std::vector<std::uint32_t> pivot_owner(s.size(), none);  // row -> index into `reduced`
  std::vector<char> cleared(s.size(), 0);
  std::vector<char> killed(s.size(), 0);  // column reduced to a nonzero pivot
  std::vector<Column> reduced;
  auto diagrams = empty_diagrams(q_max);

  Column col, scratch;
  for (int dim = top; dim >= 1; --dim) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s[j].dim != dim || cleared[j]) continue;
      boundary(j, col);
      while (!col.empty()) {
        const std::uint32_t owner = pivot_owner[col.back()];
        if (owner == none) break;
        add_column(col, reduced[owner], scratch);
      }
      if (col.empty()) continue;
      const std::uint32_t pivot = col.back();
      pivot_owner[pivot] = static_cast<std::uint32_t>(reduced.size());
      reduced.push_back(col);
      cleared[pivot] = 1;
      killed[j] = 1;
      const int q = dim - 1;
      if (q <= q_max) diagrams[static_cast<std::size_t>(q)].pairs.push_back({s[pivot].value, s[j].value});
    }
  }

  for (std::size_t j = 0; j < s.size(); ++j)
    if (s[j].dim <= q_max && !cleared[j] && !killed[j])
      diagrams[s[j].dim].pairs.push_back({s[j].value, infinity});

  finish(diagrams);
  return diagrams;
}

std::vector<PersistenceDiagram> persistence_bruteforce(const FilteredComplex& complex, int q_max) {
  check_degree(complex, q_max);
  if (complex.n_vertices > bruteforce_max_vertices)
    throw resource_error("brute-force persistence is limited to " + std::to_string(bruteforce_max_vertices) +
                         " vertices");
  const auto& s = complex.simplices;
  const std::size_t N = s.size();

  std::map<std::vector<std::uint32_t>, std::size_t> position;
  for (std::size_t j = 0; j < N; ++j) {
    std::vector<std::uint32_t> key(s[j].verts().begin(), s[j].verts().end());
    if (!position.emplace(key, j).second) throw contract_error("simplex listed twice");
  }

  // Dense Z/2 boundary matrix, column-major.
  std::vector<std::vector<char>> D(N, std::vector<char>(N, 0));
  for (std::size_t j = 0; j < N; ++j) {
    if (s[j].dim == 0) continue;
    for (std::size_t drop = 0; drop <= s[j].dim; ++drop) {
      std::vector<std::uint32_t> face;
      for (std::size_t i = 0; i <= s[j].dim; ++i)
        if (i != drop) face.push_back(s[j].vertices[i]);
      auto it = position.find(face);
      if (it == position.end()) throw contract_error("complex is not closed under faces");
      if (it->second >= j || s[it->second].value > s[j].value) throw contract_error("non-monotone complex");
      D[j][it->second] = 1;
    }
  }

  auto low = [&](std::size_t j) -> long {
    for (std::size_t i = N; i-- > 0;)
      if (D[j][i]) return static_cast<long>(i);
    return -1;
  };

  for (std::size_t j = 0; j < N; ++j) {
    for (;;) {
      const long lj = low(j);
      if (lj < 0) break;
      long other = -1;
      for (std::size_t l = 0; l < j; ++l)
        if (low(l) == lj) {
          other = static_cast<long>(l);
          break;
        }
      if (other < 0) break;
      for (std::size_t i = 0; i < N; ++i) D[j][i] ^= D[static_cast<std::size_t>(other)][i];
    }
  }

  auto diagrams = empty_diagrams(q_max);
  std::vector<char> is_birth(N, 0), is_death(N, 0);
  for (std::size_t j = 0; j < N; ++j) {
    const long lj = low(j);
    if (lj < 0) continue;
    const auto i = static_cast<std::size_t>(lj);
    is_birth[i] = 1;
    is_death[j] = 1;
    if (s[i].dim <= q_max) diagrams[s[i].dim].pairs.push_back({s[i].value, s[j].value});
  }
  for (std::size_t j = 0; j < N; ++j)
    if (!is_birth[j] && !is_death[j] && s[j].dim <= q_max) diagrams[s[j].dim].pairs.push_back({s[j].value, infinity});

  finish(diagrams);
  return diagrams;
}

Lifetimes lifetimes(const PersistenceDiagram& diagram) {
  Lifetimes out{diagram.q, {}};
  out.values.reserve(diagram.pairs.size());
  for (const auto& p : diagram.pairs)
    if (!p.essential()) out.values.push_back(p.death - p.birth);
  return out;
}

// ---------------------------------------------------------------------------
// Bottleneck distance

namespace {

// Kuhn's augmenting-path matching on a dense bipartite graph.
class BipartiteMatcher {
public:
  explicit BipartiteMatcher(std::size_t n) : n_(n), adj_(n * n, 0), match_right_(n), seen_(n) {}
  void set_edge(std::size_t l, std::size_t r, bool on) { adj_[l * n_ + r] = on; }

  bool perfect() {
    std::fill(match_right_.begin(), match_right_.end(), none_);
    for (std::size_t l = 0; l < n_; ++l) {
      std::fill(seen_.begin(), seen_.end(), 0);
      if (!augment(l)) return false;
    }
    return true;
  }

private:
  bool augment(std::size_t l) {
    for (std::size_t r = 0; r < n_; ++r) {
      if (!adj_[l * n_ + r] || seen_[r]) continue;
      seen_[r] = 1;
      if (match_right_[r] == none_ || augment(match_right_[r])) {
        match_right_[r] = l;
        return true;
      }
    }
    return false;
  }

  static constexpr std::size_t none_ = std::numeric_limits<std::size_t>::max();
  std::size_t n_;
  std::vector<char> adj_;
  std::vector<std::size_t> match_right_;
  std::vector<char> seen_;
};

}  // namespace

double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b) {
  if (a.q != b.q) throw parameter_error("bottleneck distance needs diagrams of the same degree");

  std::vector<PersistencePair> fa, fb;
  std::vector<double> ia, ib;
  for (const auto& p : a.pairs) {
    if (p.essential()) ia.push_back(p.birth);
    else if (p.death > p.birth) fa.push_back(p);
  }
  for (const auto& p : b.pairs) {
    if (p.essential()) ib.push_back(p.birth);
    else if (p.death > p.birth) fb.push_back(p);
  }
  if (ia.size() != ib.size()) return infinity;
  if (fa.size() + ia.size() > bottleneck_max_points || fb.size() + ib.size() > bottleneck_max_points)
    throw resource_error("bottleneck distance is limited to " + std::to_string(bottleneck_max_points) +
                         " points per diagram");

  // Essential points only match each other; sorted order is optimal in 1-D.
  std::sort(ia.begin(), ia.end());
  std::sort(ib.begin(), ib.end());
  double essential_part = 0.0;
  for (std::size_t i = 0; i < ia.size(); ++i) essential_part = std::max(essential_part, std::abs(ia[i] - ib[i]));

  // Left: fa then diagonal copies of fb. Right: fb then diagonal copies of fa.
  const std::size_t na = fa.size(), nb = fb.size(), n = na + nb;
  if (n == 0) return essential_part;
  std::vector<double> cost(n * n, infinity);
  auto linf = [](const PersistencePair& p, const PersistencePair& q) {
    return std::max(std::abs(p.birth - q.birth), std::abs(p.death - q.death));
  };
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) cost[i * n + j] = linf(fa[i], fb[j]);
    cost[i * n + nb + i] = (fa[i].death - fa[i].birth) / 2.0;
  }
  for (std::size_t j = 0; j < nb; ++j) {
    cost[(na + j) * n + j] = (fb[j].death - fb[j].birth) / 2.0;
    for (std::size_t i = 0; i < na; ++i) cost[(na + j) * n + nb + i] = 0.0;
  }

  std::vector<double> candidates;
  for (double c : cost)
    if (c != infinity) candidates.push_back(c);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  BipartiteMatcher matcher(n);
  auto feasible = [&](double r) {
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t rr = 0; rr < n; ++rr) matcher.set_edge(l, rr, cost[l * n + rr] <= r);
    return matcher.perfect();
  };
  std::size_t lo = 0, hi = candidates.size() - 1;  // the largest candidate is always feasible
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (feasible(candidates[mid])) hi = mid;
    else lo = mid + 1;
  }
  return std::max(essential_part, candidates[lo]);
}

void write_diagrams_csv(std::span<const PersistenceDiagram> diagrams, std::ostream& out) {
  out << "q,birth,death\n";
  for (const auto& d : diagrams)
    for (const auto& p : d.pairs)
      out << d.q << ',' << detail::format_exact(p.birth) << ',' << detail::format_exact(p.death) << '\n';
}

}  // namespace phc
