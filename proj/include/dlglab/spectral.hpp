#pragma once

#include <optional>
#include <string>

#include "dlglab/dlg.hpp"

namespace dlglab {

struct EigResult {
  RVec eigenvalues;   // ascending
  CMat eigenvectors;  // unitary, columns match eigenvalues
};

struct JacobiOptions {
  int max_sweeps = 100;
  double off_norm_tol = 1e-12;    // relative to the Frobenius norm
  double hermitian_tol = 1e-10;   // max accepted input asymmetry
  double pair_tol = 1e-8;         // consistency of duplicated eigenvalue pairs
};

/// Max-entry asymmetry |M - M*| of a square complex matrix.
double hermitian_asymmetry(const CMat& m);

/// Eigendecomposition of a Hermitian matrix via a cyclic Jacobi sweep on the
/// real symmetric 2m x 2m embedding [[Re, -Im], [Im, Re]]. Eigenvalues come
/// out in duplicated pairs; one representative per pair is kept after a
/// pair-consistency check. Throws NotHermitian / NoConvergence.
EigResult eig_hermitian(const CMat& m, const JacobiOptions& opts = {});

/// Real part of x* M x for Hermitian M. Throws NotHermitian when the input
/// asymmetry exceeds the tolerance.
double quadratic_form(const CMat& m, const CVec& x);

/// Dirichlet energy of a hyperedge signal, evaluated directly from the
/// head/tail role analysis of shared vertices (no incidence or Laplacian
/// matrix is formed). Equals quadratic_form(laplacian, x); the two routes
/// share no code.
double dirichlet_energy(const DirectedHypergraph& hg, const CVec& x);

struct SpectrumReport {
  RVec eigenvalues;                      // spectrum of the Laplacian, ascending
  double hermitian_asymmetry = 0.0;
  bool is_hermitian = false;
  double psd_margin = 0.0;               // min eigenvalue over Laplacian and signless
  double upper_margin = 0.0;             // 1 - max eigenvalue over both
  double dirichlet_residual = 0.0;       // max |energy - quadratic form| over signals
  std::optional<double> undirected_gap;  // max |L_directed - L_undirected|, undirected inputs only
  bool passed = false;

  std::string to_json() const;
};

inline constexpr double kSpectrumMarginTol = 1e-9;
inline constexpr double kDirichletTol = 1e-9;
inline constexpr double kReductionTol = 1e-12;

/// Checks the spectral guarantees of the directed line-graph Laplacian on one
/// hypergraph: Hermitian structure, spectrum within [0, 1] for both the
/// Laplacian and the signless form, energy/quadratic-form agreement on
/// `trials` random unit signals, and (for undirected inputs) coincidence with
/// the direction-blind construction.
SpectrumReport verify_hypergraph(const DirectedHypergraph& hg, int trials, std::uint64_t seed);

/// Same checks on externally supplied matrices (negative controls corrupt an
/// entry and must come out failed). Non-Hermitian inputs yield a failed
/// report instead of throwing.
SpectrumReport verify_matrices(const DirectedHypergraph& hg, const DlgMatrices& dm, int trials,
                               std::uint64_t seed);

}  // namespace dlglab
