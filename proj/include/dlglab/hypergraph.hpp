#pragma once

#include <vector>

#include "dlglab/types.hpp"

namespace dlglab {

/// One weighted directed hyperedge. Vertices are dense 0-based ids. The head
/// and tail sets are disjoint; an empty tail makes the hyperedge undirected.
struct Hyperedge {
  std::vector<int> head;
  std::vector<int> tail;
  double weight = 1.0;
  int label = -1;  // class id, -1 when unlabeled
};

/// Smallest weight accepted by the builder; anything below is treated as
/// nonpositive so the degree-matrix inversions stay well conditioned.
inline constexpr double kMinEdgeWeight = 1e-12;

/// Weighted directed hypergraph, immutable after construction. The
/// constructor validates every structural invariant and throws `Error` on
/// violation (overlapping head/tail, empty head, nonpositive weight,
/// out-of-range vertex, isolated vertex). Duplicate ids inside a single role
/// list collapse to one occurrence, keeping first-seen order.
class DirectedHypergraph {
 public:
  DirectedHypergraph(std::vector<Hyperedge> edges, int vertex_count);

  int vertex_count() const noexcept { return n_; }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }
  const Hyperedge& edge(int e) const { return edges_.at(static_cast<std::size_t>(e)); }
  const std::vector<Hyperedge>& edges() const noexcept { return edges_; }

  /// True iff every hyperedge has an empty tail.
  bool is_undirected() const noexcept;

 private:
  int n_ = 0;
  std::vector<Hyperedge> edges_;
};

inline DirectedHypergraph build_hypergraph(std::vector<Hyperedge> edges, int vertex_count) {
  return DirectedHypergraph(std::move(edges), vertex_count);
}

/// Vertex degrees d_u = sum of |w_e| over incident hyperedges, and hyperedge
/// densities delta_e = |head| + |tail|. Both strictly positive for a valid
/// hypergraph.
struct DegreeVectors {
  RVec d;
  IVec delta;
};

DegreeVectors degrees(const DirectedHypergraph& hg);

/// Complex incidence matrix, n x m: +1 for head incidences, -i for tail
/// incidences, 0 elsewhere. Columns of undirected hyperedges are real.
CMat incidence_matrix(const DirectedHypergraph& hg);

/// Direction-blind 0/1 incidence matrix (every incidence counts as 1).
RMat real_incidence(const DirectedHypergraph& hg);

}  // namespace dlglab
