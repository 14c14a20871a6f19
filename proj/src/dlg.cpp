#include "dlglab/dlg.hpp"

#include <unordered_set>

namespace dlglab {

namespace {

RVec edge_weights(const DirectedHypergraph& hg) {
  RVec w(hg.edge_count());
  for (int e = 0; e < hg.edge_count(); ++e) w[e] = hg.edge(e).weight;
  return w;
}

/// The Gram-style assembly below is Hermitian up to roundoff; store the exact
/// Hermitian representative (upper triangle wins, diagonal made real).
void make_hermitian(CMat& m) {
  double asym = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i; j < m.cols(); ++j) {
      asym = std::max(asym, std::abs(m(i, j) - std::conj(m(j, i))));
    }
  }
  if (asym > 1e-12)
    fail(ErrorCode::not_hermitian, "assembled matrix asymmetry " + std::to_string(asym));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m(i, i) = cxd(m(i, i).real(), 0.0);
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) m(j, i) = std::conj(m(i, j));
  }
}

void make_symmetric(RMat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) m(j, i) = m(i, j);
}

// D_e^{-1/2} sqrt(W) B^H D_v^{-1} B sqrt(W) D_e^{-1/2}, grouped as
// (B sqrt(W))^H (D_v^{-1} (B sqrt(W))) so the cost stays O(m^2 n).
template <typename Mat>
Mat normalized_signless_impl(const Mat& b, const RVec& w, const DegreeVectors& deg) {
  const RVec sqrt_w = w.array().sqrt();
  const RVec d_inv = deg.d.array().inverse();
  const RVec de_isqrt = deg.delta.cast<double>().array().rsqrt();

  Mat weighted = b * sqrt_w.asDiagonal();
  Mat q = weighted.adjoint() * (d_inv.asDiagonal() * weighted);
  q = de_isqrt.asDiagonal() * q * de_isqrt.asDiagonal();
  return q;
}

}  // namespace

CMat dlg_adjacency(const DirectedHypergraph& hg) {
  const CMat b = incidence_matrix(hg);
  const RVec w = edge_weights(hg);
  const DegreeVectors deg = degrees(hg);
  const RVec sqrt_w = w.array().sqrt();

  const CMat gram = b.adjoint() * b;  // Gaussian-integer entries, exact
  const int m = hg.edge_count();
  CMat a(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) {
        // gram(e,e) = delta_e exactly, so the diagonal vanishes identically
        a(i, i) = cxd(w[i] * (gram(i, i).real() - deg.delta[i]), 0.0);
      } else {
        a(i, j) = sqrt_w[i] * sqrt_w[j] * gram(i, j);
      }
    }
  }
  make_hermitian(a);
  return a;
}

DlgMatrices directed_laplacians(const DirectedHypergraph& hg) {
  const CMat b = incidence_matrix(hg);
  const RVec w = edge_weights(hg);
  const DegreeVectors deg = degrees(hg);

  DlgMatrices out;
  out.adjacency = dlg_adjacency(hg);
  out.signless = normalized_signless_impl(b, w, deg);
  make_hermitian(out.signless);
  out.laplacian = CMat::Identity(out.signless.rows(), out.signless.cols()) - out.signless;
  return out;
}

RMat undirected_signless(const DirectedHypergraph& hg) {
  RMat q = normalized_signless_impl(real_incidence(hg), edge_weights(hg), degrees(hg));
  make_symmetric(q);
  return q;
}

RMat undirected_laplacian(const DirectedHypergraph& hg) {
  const RMat q = undirected_signless(hg);
  return RMat::Identity(q.rows(), q.cols()) - q;
}

cxd scalar_laplacian_entry(const DirectedHypergraph& hg, int i, int j) {
  const int m = hg.edge_count();
  if (i < 0 || i >= m || j < 0 || j >= m)
    fail(ErrorCode::vertex_out_of_range, "hyperedge index out of range");

  const DegreeVectors deg = degrees(hg);
  const Hyperedge& ei = hg.edge(i);
  const Hyperedge& ej = hg.edge(j);

  if (i == j) {
    double s = 0.0;
    for (int u : ei.head) s += ei.weight / (deg.d[u] * deg.delta[i]);
    for (int u : ei.tail) s += ei.weight / (deg.d[u] * deg.delta[i]);
    return cxd(1.0 - s, 0.0);
  }

  const std::unordered_set<int> head_j(ej.head.begin(), ej.head.end());
  const std::unordered_set<int> tail_j(ej.tail.begin(), ej.tail.end());

  // Same-role overlaps push the real part down; opposite roles land on the
  // imaginary axis with a sign that tracks which hyperedge holds the head.
  double same = 0.0, head_i_tail_j = 0.0, tail_i_head_j = 0.0;
  for (int u : ei.head) {
    if (head_j.count(u)) same += 1.0 / deg.d[u];
    if (tail_j.count(u)) head_i_tail_j += 1.0 / deg.d[u];
  }
  for (int u : ei.tail) {
    if (tail_j.count(u)) same += 1.0 / deg.d[u];
    if (head_j.count(u)) tail_i_head_j += 1.0 / deg.d[u];
  }

  const double scale = std::sqrt(ei.weight) * std::sqrt(ej.weight) /
                       std::sqrt(static_cast<double>(deg.delta[i]) * deg.delta[j]);
  return scale * cxd(-same, head_i_tail_j - tail_i_head_j);
}

}  // namespace dlglab
