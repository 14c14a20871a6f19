#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "dlglab/spectral.hpp"
#include "test_support.hpp"

using namespace dlglab;
using testing::golden_hypergraph;

namespace {

CMat random_hermitian(Rng& rng, int n) {
  CMat r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = cxd(rng.uniform(-1, 1), rng.uniform(-1, 1));
  return 0.5 * (r + r.adjoint());
}

void check_decomposition(const CMat& m, const EigResult& eig, double tol) {
  const CMat reconstruction_gap =
      m * eig.eigenvectors - eig.eigenvectors * eig.eigenvalues.asDiagonal().toDenseMatrix().cast<cxd>();
  CHECK(reconstruction_gap.cwiseAbs().maxCoeff() < tol);
  const CMat gram = eig.eigenvectors.adjoint() * eig.eigenvectors;
  CHECK((gram - CMat::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() < 1e-8);
  for (int k = 1; k < eig.eigenvalues.size(); ++k)
    CHECK(eig.eigenvalues[k] >= eig.eigenvalues[k - 1]);
}

}  // namespace

TEST_CASE("identity matrix has a flat unit spectrum") {
  const CMat m = CMat::Identity(3, 3);
  const EigResult eig = eig_hermitian(m);
  for (int k = 0; k < 3; ++k) CHECK(eig.eigenvalues[k] == doctest::Approx(1.0).epsilon(1e-12));
  check_decomposition(m, eig, 1e-10);
}

TEST_CASE("golden Laplacian spectrum lies in [0, 1]") {
  const CMat l = directed_laplacians(golden_hypergraph()).laplacian;
  const EigResult eig = eig_hermitian(l);
  CHECK(eig.eigenvalues.minCoeff() >= -1e-12);
  CHECK(eig.eigenvalues.maxCoeff() <= 1.0 + 1e-12);
  check_decomposition(l, eig, 1e-10);
}

TEST_CASE("2x2 off-diagonal 1+i matrix has eigenvalues +-sqrt(2)") {
  CMat m(2, 2);
  m << cxd(0, 0), cxd(1, 1), cxd(1, -1), cxd(0, 0);
  const EigResult eig = eig_hermitian(m);
  CHECK(eig.eigenvalues[0] == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));
  CHECK(eig.eigenvalues[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  check_decomposition(m, eig, 1e-10);
}

TEST_CASE("non-Hermitian input raises NotHermitian") {
  CMat m(2, 2);
  m << cxd(0, 0), cxd(1, 0), cxd(2, 0), cxd(0, 0);
  CHECK_THROWS_AS(eig_hermitian(m), Error);
  try {
    eig_hermitian(m);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_hermitian);
  }
}

TEST_CASE("exhausted sweep budget raises NoConvergence") {
  Rng rng(3);
  const CMat m = random_hermitian(rng, 6);
  JacobiOptions opts;
  opts.max_sweeps = 0;
  try {
    eig_hermitian(m, opts);
    FAIL("expected NoConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::no_convergence);
  }
}

TEST_CASE("Jacobi agrees with an independent dense solver on random Hermitian matrices") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = rng.uniform_int(1, 12);
    const CMat m = random_hermitian(rng, n);
    const EigResult ours = eig_hermitian(m);
    check_decomposition(m, ours, 1e-8 * std::max(1.0, m.cwiseAbs().maxCoeff()));
    Eigen::SelfAdjointEigenSolver<CMat> oracle(m);
    CHECK((ours.eigenvalues - oracle.eigenvalues()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("repeated eigenvalues keep the eigenvector basis unitary") {
  // block-diagonal with two identical blocks forces multiplicity two
  CMat block(2, 2);
  block << cxd(1, 0), cxd(0.5, 0.25), cxd(0.5, -0.25), cxd(2, 0);
  CMat m = CMat::Zero(4, 4);
  m.topLeftCorner(2, 2) = block;
  m.bottomRightCorner(2, 2) = block;
  const EigResult eig = eig_hermitian(m);
  check_decomposition(m, eig, 1e-9);
}

TEST_CASE("quadratic form basics") {
  CVec x1(1);
  x1 << cxd(3, 4);
  CHECK(quadratic_form(CMat::Identity(1, 1), x1) == doctest::Approx(25.0).epsilon(1e-15));

  const CMat l = directed_laplacians(golden_hypergraph()).laplacian;
  CVec e0(3);
  e0 << cxd(1, 0), cxd(0, 0), cxd(0, 0);
  CHECK(quadratic_form(l, e0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(std::abs(quadratic_form(l, e0) - 0.333) < 5e-4);

  CMat m(2, 2);
  m << cxd(0, 0), cxd(1, 1), cxd(1, -1), cxd(0, 0);
  CVec ones(2);
  ones << cxd(1, 0), cxd(1, 0);
  CHECK(quadratic_form(m, ones) == doctest::Approx(2.0).epsilon(1e-12));

  CMat bad(2, 2);
  bad << cxd(0, 0), cxd(1, 0), cxd(2, 0), cxd(0, 0);
  CHECK_THROWS_AS(quadratic_form(bad, ones), Error);
}

TEST_CASE("zero signal has zero Dirichlet energy") {
  CHECK(dirichlet_energy(golden_hypergraph(), CVec::Zero(3)) == 0.0);
}

TEST_CASE("density-scaled constant signal matches the quadratic form") {
  const DirectedHypergraph hg = golden_hypergraph();
  const DegreeVectors deg = degrees(hg);
  CVec x(3);
  for (int e = 0; e < 3; ++e) x[e] = cxd(0.7 * std::sqrt(static_cast<double>(deg.delta[e])), 0);
  const double energy = dirichlet_energy(hg, x);
  const double oracle = quadratic_form(directed_laplacians(hg).laplacian, x);
  CHECK(energy == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("Dirichlet energy equals the quadratic form on random weighted hypergraphs") {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const DirectedHypergraph hg = testing::random_hypergraph(rng, 10, 8, false);
    const CMat l = directed_laplacians(hg).laplacian;
    for (int s = 0; s < 5; ++s) {
      const CVec x = testing::random_signal(rng, hg.edge_count());
      const double energy = dirichlet_energy(hg, x);
      CHECK(energy >= -1e-12);
      CHECK(std::abs(energy - quadratic_form(l, x)) < 1e-9);
    }
  }
}

TEST_CASE("spectra of Laplacian and signless are reflections about one half") {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const DirectedHypergraph hg = testing::random_hypergraph(rng, 10, 8, false);
    const DlgMatrices dm = directed_laplacians(hg);
    const RVec lam_l = eig_hermitian(dm.laplacian).eigenvalues;
    const RVec lam_q = eig_hermitian(dm.signless).eigenvalues;
    const int m = hg.edge_count();
    for (int k = 0; k < m; ++k)
      CHECK(lam_l[k] == doctest::Approx(1.0 - lam_q[m - 1 - k]).epsilon(1e-9));
  }
}

TEST_CASE("verify passes on the golden fixture") {
  const SpectrumReport report = verify_hypergraph(golden_hypergraph(), 50, 123);
  CHECK(report.passed);
  CHECK(report.is_hermitian);
  CHECK(report.psd_margin >= -1e-9);
  CHECK(report.upper_margin >= -1e-9);
  CHECK(report.dirichlet_residual < 1e-9);
  CHECK_FALSE(report.undirected_gap.has_value());
}

TEST_CASE("verify records the reduction gap on undirected inputs") {
  Rng rng(47);
  const DirectedHypergraph hg = testing::random_hypergraph(rng, 10, 6, /*undirected_only=*/true);
  const SpectrumReport report = verify_hypergraph(hg, 20, 7);
  CHECK(report.passed);
  REQUIRE(report.undirected_gap.has_value());
  CHECK(*report.undirected_gap < 1e-12);
}

TEST_CASE("random sweep of verify reports zero failures") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(derive_seed(seed, "verify-sweep"));
    const DirectedHypergraph hg = testing::random_hypergraph(rng, 10, 8, false);
    CHECK(verify_hypergraph(hg, 10, seed).passed);
  }
}

TEST_CASE("a corrupted entry fails verification") {
  DlgMatrices dm = directed_laplacians(golden_hypergraph());
  dm.laplacian(0, 1) += cxd(0.5, 0.25);
  const SpectrumReport report = verify_matrices(golden_hypergraph(), dm, 10, 1);
  CHECK_FALSE(report.passed);
  CHECK_FALSE(report.is_hermitian);
}

TEST_CASE("spectrum report serializes to flat JSON with the agreed keys") {
  const SpectrumReport report = verify_hypergraph(golden_hypergraph(), 5, 9);
  const nlohmann::json j = nlohmann::json::parse(report.to_json());
  for (const char* key :
       {"eigenvalues", "psd_margin", "upper_margin", "hermitian_asymmetry", "dirichlet_residual",
        "passed"})
    CHECK(j.contains(key));
  CHECK(j["eigenvalues"].is_array());
  CHECK(j["passed"].get<bool>());
}
