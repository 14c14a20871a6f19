#pragma once

#include <string>

#include "dlglab/data.hpp"
#include "dlglab/rng.hpp"

namespace dlglab::testing {

/// Small directed hypergraph whose line-graph matrices are known in closed
/// form: 5 vertices a..e (ids 0..4), three hyperedges
///   e0: head {b, c}, tail {a}
///   e1: head {a, b}, tail {d}
///   e2: head {e},    tail {d}
/// with unit weights. Golden values below were computed by hand from the
/// definitions.
DirectedHypergraph golden_hypergraph();

/// Hand-computed adjacency of the line graph of golden_hypergraph():
/// [[0, 1+i, 0], [1-i, 0, 1], [0, 1, 0]].
CMat golden_adjacency();

/// Hand-computed Laplacian of golden_hypergraph() to three decimals:
/// [[0.333, -0.167-0.167i, 0], [-0.167+0.167i, 0.5, -0.204], [0, -0.204, 0.25]].
CMat golden_laplacian_3dp();

/// The same hypergraph in the dataset JSON schema, with one singleton class
/// per hyperedge and scalar unit features.
std::string golden_dataset_json();

/// Random valid hypergraph: n in [2, max_n], m in [1, max_m], hyperedge sizes
/// up to 4 distinct vertices, every vertex covered. With undirected_only all
/// tails are empty; otherwise tails may be empty or not. Weights are drawn
/// from (0, 3] unless unit_weights is set.
DirectedHypergraph random_hypergraph(Rng& rng, int max_n, int max_m, bool undirected_only,
                                     bool unit_weights = false);

/// Complex signal with components uniform on [-1, 1]^2.
CVec random_signal(Rng& rng, int m);

}  // namespace dlglab::testing

#include "dlglab/net.hpp"

namespace dlglab::testing {

/// Worst relative error (with an absolute floor) between the analytic
/// gradient and central finite differences over every parameter component.
double max_gradient_mismatch(const DlgModel& model, const CMat& op, const CMat& incidence,
                             const RMat& node_features, bool imag_features,
                             const std::vector<int>& batch, const std::vector<int>& labels,
                             double weight_decay, double step = 1e-5, double abs_floor = 1e-8);

}  // namespace dlglab::testing
