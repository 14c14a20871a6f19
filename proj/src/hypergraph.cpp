#include "dlglab/hypergraph.hpp"

#include <algorithm>
#include <unordered_set>

namespace dlglab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::overlapping_head_tail: return "OverlappingHeadTail";
    case ErrorCode::empty_head: return "EmptyHead";
    case ErrorCode::nonpositive_weight: return "NonpositiveWeight";
    case ErrorCode::isolated_vertex: return "IsolatedVertex";
    case ErrorCode::vertex_out_of_range: return "VertexOutOfRange";
    case ErrorCode::empty_hypergraph: return "EmptyHypergraph";
    case ErrorCode::not_hermitian: return "NotHermitian";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::residual_width_mismatch: return "ResidualWidthMismatch";
    case ErrorCode::empty_split: return "EmptySplit";
    case ErrorCode::too_few_samples: return "TooFewSamples";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::io_error: return "IoError";
  }
  return "UnknownError";
}

namespace {

std::vector<int> dedupe_in_order(const std::vector<int>& ids) {
  std::vector<int> out;
  out.reserve(ids.size());
  std::unordered_set<int> seen;
  for (int v : ids) {
    if (seen.insert(v).second) out.push_back(v);
  }
  return out;
}

}  // namespace

DirectedHypergraph::DirectedHypergraph(std::vector<Hyperedge> edges, int vertex_count)
    : n_(vertex_count), edges_(std::move(edges)) {
  if (edges_.empty()) fail(ErrorCode::empty_hypergraph, "hypergraph needs at least one hyperedge");
  if (n_ <= 0) fail(ErrorCode::vertex_out_of_range, "vertex count must be positive");

  std::vector<char> covered(static_cast<std::size_t>(n_), 0);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    Hyperedge& he = edges_[e];
    he.head = dedupe_in_order(he.head);
    he.tail = dedupe_in_order(he.tail);
    const std::string where = "hyperedge " + std::to_string(e);

    if (he.head.empty()) fail(ErrorCode::empty_head, where + " has an empty head set");
    if (!(he.weight >= kMinEdgeWeight) || !std::isfinite(he.weight))
      fail(ErrorCode::nonpositive_weight,
           where + " has weight " + std::to_string(he.weight) + " below " + std::to_string(kMinEdgeWeight));

    std::unordered_set<int> head_set;
    for (int v : he.head) {
      if (v < 0 || v >= n_)
        fail(ErrorCode::vertex_out_of_range, where + " references vertex " + std::to_string(v));
      head_set.insert(v);
      covered[static_cast<std::size_t>(v)] = 1;
    }
    for (int v : he.tail) {
      if (v < 0 || v >= n_)
        fail(ErrorCode::vertex_out_of_range, where + " references vertex " + std::to_string(v));
      if (head_set.count(v))
        fail(ErrorCode::overlapping_head_tail,
             where + " has vertex " + std::to_string(v) + " in both head and tail");
      covered[static_cast<std::size_t>(v)] = 1;
    }
  }

  for (int v = 0; v < n_; ++v) {
    if (!covered[static_cast<std::size_t>(v)])
      fail(ErrorCode::isolated_vertex, "vertex " + std::to_string(v) + " appears in no hyperedge");
  }
}

bool DirectedHypergraph::is_undirected() const noexcept {
  return std::all_of(edges_.begin(), edges_.end(),
                     [](const Hyperedge& e) { return e.tail.empty(); });
}

DegreeVectors degrees(const DirectedHypergraph& hg) {
  const int n = hg.vertex_count();
  const int m = hg.edge_count();
  DegreeVectors out{RVec::Zero(n), IVec::Zero(m)};
  for (int e = 0; e < m; ++e) {
    const Hyperedge& he = hg.edge(e);
    out.delta[e] = static_cast<int>(he.head.size() + he.tail.size());
    const double w = std::abs(he.weight);
    for (int v : he.head) out.d[v] += w;
    for (int v : he.tail) out.d[v] += w;
  }
  return out;
}

CMat incidence_matrix(const DirectedHypergraph& hg) {
  CMat b = CMat::Zero(hg.vertex_count(), hg.edge_count());
  for (int e = 0; e < hg.edge_count(); ++e) {
    const Hyperedge& he = hg.edge(e);
    for (int v : he.head) b(v, e) = cxd(1.0, 0.0);
    for (int v : he.tail) b(v, e) = cxd(0.0, -1.0);
  }
  return b;
}

RMat real_incidence(const DirectedHypergraph& hg) {
  RMat b = RMat::Zero(hg.vertex_count(), hg.edge_count());
  for (int e = 0; e < hg.edge_count(); ++e) {
    const Hyperedge& he = hg.edge(e);
    for (int v : he.head) b(v, e) = 1.0;
    for (int v : he.tail) b(v, e) = 1.0;
  }
  return b;
}

}  // namespace dlglab
