#include "test_support.hpp"

#include <numeric>

namespace dlglab::testing {

DirectedHypergraph golden_hypergraph() {
  // a=0, b=1, c=2, d=3, e=4
  std::vector<Hyperedge> edges{
      {{1, 2}, {0}, 1.0, 0},
      {{0, 1}, {3}, 1.0, 1},
      {{4}, {3}, 1.0, 2},
  };
  return DirectedHypergraph(std::move(edges), 5);
}

CMat golden_adjacency() {
  CMat a(3, 3);
  a << cxd(0, 0), cxd(1, 1), cxd(0, 0),
       cxd(1, -1), cxd(0, 0), cxd(1, 0),
       cxd(0, 0), cxd(1, 0), cxd(0, 0);
  return a;
}

CMat golden_laplacian_3dp() {
  CMat l(3, 3);
  l << cxd(0.333, 0), cxd(-0.167, -0.167), cxd(0, 0),
       cxd(-0.167, 0.167), cxd(0.5, 0), cxd(-0.204, 0),
       cxd(0, 0), cxd(-0.204, 0), cxd(0.25, 0);
  return l;
}

std::string golden_dataset_json() {
  return R"({
  "classes": ["r0", "r1", "r2"],
  "vertices": [
    {"name": "a", "features": [1.0]},
    {"name": "b", "features": [1.0]},
    {"name": "c", "features": [1.0]},
    {"name": "d", "features": [1.0]},
    {"name": "e", "features": [1.0]}
  ],
  "hyperedges": [
    {"head": ["b", "c"], "tail": ["a"], "weight": 1.0, "label": "r0"},
    {"head": ["a", "b"], "tail": ["d"], "weight": 1.0, "label": "r1"},
    {"head": ["e"], "tail": ["d"], "weight": 1.0, "label": "r2"}
  ]
})";
}

DirectedHypergraph random_hypergraph(Rng& rng, int max_n, int max_m, bool undirected_only,
                                     bool unit_weights) {
  const int n = rng.uniform_int(2, max_n);
  const int m = rng.uniform_int(1, max_m);

  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);

  std::vector<Hyperedge> edges;
  for (int e = 0; e < m; ++e) {
    rng.shuffle(pool);
    const int size = rng.uniform_int(1, std::min(4, n));
    Hyperedge he;
    he.weight = unit_weights ? 1.0 : rng.uniform(0.05, 3.0);
    if (undirected_only) {
      he.head.assign(pool.begin(), pool.begin() + size);
    } else {
      const int head_count = rng.uniform_int(1, size);
      he.head.assign(pool.begin(), pool.begin() + head_count);
      he.tail.assign(pool.begin() + head_count, pool.begin() + size);
    }
    edges.push_back(std::move(he));
  }

  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  for (const Hyperedge& he : edges) {
    for (int v : he.head) covered[static_cast<std::size_t>(v)] = 1;
    for (int v : he.tail) covered[static_cast<std::size_t>(v)] = 1;
  }
  for (int v = 0; v < n; ++v) {
    if (!covered[static_cast<std::size_t>(v)])
      edges[static_cast<std::size_t>(rng.uniform_int(0, m - 1))].head.push_back(v);
  }
  return DirectedHypergraph(std::move(edges), n);
}

CVec random_signal(Rng& rng, int m) {
  CVec x(m);
  for (int i = 0; i < m; ++i) x[i] = cxd(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  return x;
}

double max_gradient_mismatch(const DlgModel& model, const CMat& op, const CMat& incidence,
                             const RMat& node_features, bool imag_features,
                             const std::vector<int>& batch, const std::vector<int>& labels,
                             double weight_decay, double step, double abs_floor) {
  const Forward fwd = forward(model, op, incidence, node_features, imag_features);
  const LossAndGrads lg = loss_and_grads(model, op, fwd.trace, batch, labels, weight_decay);
  const RVec analytic = pack_parameters(lg.grads.conv, lg.grads.linear);

  DlgModel probe = model;
  RVec params = pack_parameters(probe.conv, probe.linear);
  double worst = 0.0;
  for (Eigen::Index p = 0; p < params.size(); ++p) {
    const double saved = params[p];
    params[p] = saved + step;
    unpack_parameters(params, probe.conv, probe.linear);
    const double up = training_loss(probe, op, incidence, node_features, imag_features, batch,
                                    labels, weight_decay);
    params[p] = saved - step;
    unpack_parameters(params, probe.conv, probe.linear);
    const double down = training_loss(probe, op, incidence, node_features, imag_features, batch,
                                      labels, weight_decay);
    params[p] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double err = std::abs(analytic[p] - numeric);
    const double rel = err / std::max(abs_floor, std::max(std::abs(analytic[p]), std::abs(numeric)));
    worst = std::max(worst, rel);
  }
  unpack_parameters(params, probe.conv, probe.linear);
  return worst;
}

}  // namespace dlglab::testing
