#pragma once

#include "dlglab/hypergraph.hpp"

namespace dlglab {

/// Adjacency plus the normalized signless/ordinary Laplacians of the
/// directed line graph. All three are m x m Hermitian; `laplacian` is stored
/// as the element-wise value of I - signless.
struct DlgMatrices {
  CMat adjacency;
  CMat signless;
  CMat laplacian;
};

/// Directed line-graph adjacency sqrt(W) B* B sqrt(W) - W D_e. Hermitian with
/// an exactly zero diagonal.
CMat dlg_adjacency(const DirectedHypergraph& hg);

/// Normalized signless and ordinary Laplacians of the directed line graph,
/// built from the complex incidence matrix:
///   signless  = D_e^{-1/2} sqrt(W) B* D_v^{-1} B sqrt(W) D_e^{-1/2}
///   laplacian = I - signless
DlgMatrices directed_laplacians(const DirectedHypergraph& hg);

/// Direction-blind counterparts built from the 0/1 incidence matrix. For an
/// undirected hypergraph these coincide with the directed versions.
RMat undirected_signless(const DirectedHypergraph& hg);
RMat undirected_laplacian(const DirectedHypergraph& hg);

/// Entry (i, j) of the directed line-graph Laplacian computed purely from the
/// head/tail role analysis of the two hyperedges (no matrix products).
/// Cross-checks the matrix construction entry by entry.
cxd scalar_laplacian_entry(const DirectedHypergraph& hg, int i, int j);

}  // namespace dlglab
