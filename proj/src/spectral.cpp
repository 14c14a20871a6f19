#include "dlglab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "dlglab/rng.hpp"

namespace dlglab {

double hermitian_asymmetry(const CMat& m) {
  double asym = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i; j < m.cols(); ++j)
      asym = std::max(asym, std::abs(m(i, j) - std::conj(m(j, i))));
  return asym;
}

namespace {

double off_diagonal_norm(const RMat& s) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      if (i != j) acc += s(i, j) * s(i, j);
  return std::sqrt(acc);
}

// One cyclic sweep of classical Jacobi rotations over the upper triangle.
void jacobi_sweep(RMat& a, RMat& v) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index p = 0; p < n - 1; ++p) {
    for (Eigen::Index q = p + 1; q < n; ++q) {
      const double apq = a(p, q);
      if (apq == 0.0) continue;
      const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
      const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                    : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
      const double c = 1.0 / std::sqrt(1.0 + t * t);
      const double s = t * c;

      for (Eigen::Index k = 0; k < n; ++k) {
        if (k == p || k == q) continue;
        const double akp = a(k, p);
        const double akq = a(k, q);
        a(k, p) = a(p, k) = c * akp - s * akq;
        a(k, q) = a(q, k) = s * akp + c * akq;
      }
      const double app = a(p, p), aqq = a(q, q);
      a(p, p) = c * c * app - 2.0 * s * c * apq + s * s * aqq;
      a(q, q) = s * s * app + 2.0 * s * c * apq + c * c * aqq;
      a(p, q) = a(q, p) = 0.0;

      for (Eigen::Index k = 0; k < n; ++k) {
        const double vkp = v(k, p);
        const double vkq = v(k, q);
        v(k, p) = c * vkp - s * vkq;
        v(k, q) = s * vkp + c * vkq;
      }
    }
  }
}

}  // namespace

EigResult eig_hermitian(const CMat& m, const JacobiOptions& opts) {
  if (m.rows() != m.cols()) fail(ErrorCode::shape_mismatch, "eigensolver needs a square matrix");
  const double asym = hermitian_asymmetry(m);
  if (asym > opts.hermitian_tol)
    fail(ErrorCode::not_hermitian, "asymmetry " + std::to_string(asym));

  const CMat h = 0.5 * (m + m.adjoint());
  const Eigen::Index dim = h.rows();

  // Real symmetric embedding; every eigenvalue of h appears twice.
  RMat s(2 * dim, 2 * dim);
  s.topLeftCorner(dim, dim) = h.real();
  s.bottomRightCorner(dim, dim) = h.real();
  s.topRightCorner(dim, dim) = -h.imag();
  s.bottomLeftCorner(dim, dim) = h.imag();

  RMat v = RMat::Identity(2 * dim, 2 * dim);
  const double target = opts.off_norm_tol * std::max(s.norm(), 1e-300);
  bool converged = false;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    if (off_diagonal_norm(s) <= target) {
      converged = true;
      break;
    }
    jacobi_sweep(s, v);
  }
  if (!converged && off_diagonal_norm(s) > target)
    fail(ErrorCode::no_convergence,
         "Jacobi off-norm " + std::to_string(off_diagonal_norm(s)) + " after " +
             std::to_string(opts.max_sweeps) + " sweeps");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(2 * dim));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return s(a, a) < s(b, b); });

  EigResult out;
  out.eigenvalues.resize(dim);
  out.eigenvectors.resize(dim, dim);

  double scale = 0.0;
  for (Eigen::Index k = 0; k < 2 * dim; ++k) scale = std::max(scale, std::abs(s(k, k)));
  const double pair_tol = opts.pair_tol * std::max(1.0, scale);

  for (Eigen::Index k = 0; k < dim; ++k) {
    const double lo = s(order[2 * k], order[2 * k]);
    const double hi = s(order[2 * k + 1], order[2 * k + 1]);
    if (std::abs(hi - lo) > pair_tol)
      fail(ErrorCode::no_convergence, "eigenvalue pair mismatch " + std::to_string(hi - lo));
    out.eigenvalues[k] = lo;
  }

  // A complex eigenvalue of multiplicity c doubles into a 2c-dimensional real
  // eigenspace whose columns map onto a c-dimensional complex space under
  // (top, bottom) -> top + i bottom. Walk eigenvalue clusters and greedily
  // orthonormalize the mapped candidates until each cluster is filled.
  Eigen::Index k = 0;
  while (k < dim) {
    Eigen::Index end = k + 1;
    while (end < dim && out.eigenvalues[end] - out.eigenvalues[end - 1] <= pair_tol) ++end;
    const Eigen::Index count = end - k;
    Eigen::Index placed = 0;
    for (Eigen::Index c = 2 * k; c < 2 * end && placed < count; ++c) {
      const RVec col = v.col(order[c]);
      CVec z = col.head(dim) + cxd(0.0, 1.0) * col.tail(dim);
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index p = k; p < k + placed; ++p)
          z -= out.eigenvectors.col(p).dot(z) * out.eigenvectors.col(p);
      const double norm = z.norm();
      if (norm > 1e-6) {
        out.eigenvectors.col(k + placed) = z / norm;
        ++placed;
      }
    }
    if (placed < count)
      fail(ErrorCode::no_convergence, "degenerate eigenspace extraction failed");
    k = end;
  }
  return out;
}

double quadratic_form(const CMat& m, const CVec& x) {
  if (m.rows() != m.cols() || m.rows() != x.size())
    fail(ErrorCode::shape_mismatch, "quadratic form shape mismatch");
  if (hermitian_asymmetry(m) > 1e-10)
    fail(ErrorCode::not_hermitian, "quadratic form needs a Hermitian matrix");
  const cxd value = x.adjoint() * (m * x);
  return value.real();
}

double dirichlet_energy(const DirectedHypergraph& hg, const CVec& x) {
  const int m = hg.edge_count();
  if (x.size() != m) fail(ErrorCode::shape_mismatch, "signal length must equal hyperedge count");
  const DegreeVectors deg = degrees(hg);

  // Per-vertex incidence with the vertex role inside each hyperedge.
  struct Inc {
    int edge;
    bool head;
  };
  std::vector<std::vector<Inc>> incident(static_cast<std::size_t>(hg.vertex_count()));
  for (int e = 0; e < m; ++e) {
    for (int u : hg.edge(e).head) incident[static_cast<std::size_t>(u)].push_back({e, true});
    for (int u : hg.edge(e).tail) incident[static_cast<std::size_t>(u)].push_back({e, false});
  }

  RVec sqrt_w(m), a_scaled(m), b_scaled(m);
  for (int e = 0; e < m; ++e) {
    sqrt_w[e] = std::sqrt(hg.edge(e).weight);
    const double isq = 1.0 / std::sqrt(static_cast<double>(deg.delta[e]));
    a_scaled[e] = x[e].real() * isq;
    b_scaled[e] = x[e].imag() * isq;
  }

  double pair_sum = 0.0;
  for (int u = 0; u < hg.vertex_count(); ++u) {
    double local = 0.0;
    for (const Inc& ii : incident[static_cast<std::size_t>(u)]) {
      for (const Inc& jj : incident[static_cast<std::size_t>(u)]) {
        const int i = ii.edge, j = jj.edge;
        double term;
        if (ii.head == jj.head) {
          const double da = a_scaled[i] - a_scaled[j];
          const double db = b_scaled[i] - b_scaled[j];
          term = da * da + db * db;
        } else if (ii.head) {  // u in H(i) and T(j)
          const double da = a_scaled[i] - b_scaled[j];
          const double db = a_scaled[j] + b_scaled[i];
          term = da * da + db * db;
        } else {  // u in T(i) and H(j)
          const double da = a_scaled[i] + b_scaled[j];
          const double db = a_scaled[j] - b_scaled[i];
          term = da * da + db * db;
        }
        local += sqrt_w[i] * sqrt_w[j] * term;
      }
    }
    pair_sum += 0.5 * local / deg.d[u];
  }

  // The squared-difference expansion reproduces the diagonal of the quadratic
  // form only when hyperedge weights are uniform; this term restores the
  // exact diagonal for arbitrary positive weights and vanishes identically in
  // the uniform case.
  RVec s_u = RVec::Zero(hg.vertex_count());
  for (int e = 0; e < m; ++e) {
    for (int u : hg.edge(e).head) s_u[u] += sqrt_w[e];
    for (int u : hg.edge(e).tail) s_u[u] += sqrt_w[e];
  }
  double correction = 0.0;
  for (int e = 0; e < m; ++e) {
    double ratio = 0.0;
    for (int u : hg.edge(e).head) ratio += s_u[u] / deg.d[u];
    for (int u : hg.edge(e).tail) ratio += s_u[u] / deg.d[u];
    const double coeff = 1.0 - sqrt_w[e] * ratio / deg.delta[e];
    correction += std::norm(x[e]) * coeff;
  }
  return pair_sum + correction;
}

std::string SpectrumReport::to_json() const {
  nlohmann::json j;
  j["eigenvalues"] = std::vector<double>(eigenvalues.begin(), eigenvalues.end());
  j["hermitian_asymmetry"] = hermitian_asymmetry;
  j["is_hermitian"] = is_hermitian;
  j["psd_margin"] = psd_margin;
  j["upper_margin"] = upper_margin;
  j["dirichlet_residual"] = dirichlet_residual;
  if (undirected_gap) j["undirected_gap"] = *undirected_gap;
  j["passed"] = passed;
  return j.dump(2);
}

SpectrumReport verify_hypergraph(const DirectedHypergraph& hg, int trials, std::uint64_t seed) {
  return verify_matrices(hg, directed_laplacians(hg), trials, seed);
}

SpectrumReport verify_matrices(const DirectedHypergraph& hg, const DlgMatrices& dm, int trials,
                               std::uint64_t seed) {
  SpectrumReport report;
  report.hermitian_asymmetry =
      std::max(dlglab::hermitian_asymmetry(dm.laplacian), dlglab::hermitian_asymmetry(dm.signless));
  report.is_hermitian = report.hermitian_asymmetry <= 1e-10;
  if (!report.is_hermitian) {
    report.passed = false;
    return report;
  }

  const EigResult eig_l = eig_hermitian(dm.laplacian);
  const EigResult eig_q = eig_hermitian(dm.signless);
  report.eigenvalues = eig_l.eigenvalues;
  report.psd_margin = std::min(eig_l.eigenvalues.minCoeff(), eig_q.eigenvalues.minCoeff());
  report.upper_margin =
      std::min(1.0 - eig_l.eigenvalues.maxCoeff(), 1.0 - eig_q.eigenvalues.maxCoeff());

  Rng rng(derive_seed(seed, "signals"));
  const int m = hg.edge_count();
  double residual = 0.0;
  for (int t = 0; t < trials; ++t) {
    CVec x(m);
    for (int e = 0; e < m; ++e) x[e] = cxd(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    const double norm = x.norm();
    if (norm == 0.0) continue;
    x /= norm;
    residual = std::max(residual, std::abs(dirichlet_energy(hg, x) - quadratic_form(dm.laplacian, x)));
  }
  report.dirichlet_residual = residual;

  if (hg.is_undirected()) {
    const RMat ul = undirected_laplacian(hg);
    report.undirected_gap = (dm.laplacian - ul.cast<cxd>()).cwiseAbs().maxCoeff();
  }

  report.passed = report.is_hermitian && report.psd_margin >= -kSpectrumMarginTol &&
                  report.upper_margin >= -kSpectrumMarginTol &&
                  report.dirichlet_residual < kDirichletTol &&
                  (!report.undirected_gap || *report.undirected_gap < kReductionTol);
  return report;
}

}  // namespace dlglab
