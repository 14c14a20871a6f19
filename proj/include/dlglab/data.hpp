#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dlglab/hypergraph.hpp"

namespace dlglab {

/// One 50/25/25 split of hyperedge ids.
struct FoldSplit {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

/// A labeled hyperedge-classification dataset: hypergraph topology, real
/// node features, one class label per hyperedge, and optional fold splits.
struct Dataset {
  DirectedHypergraph hypergraph;
  RMat node_features;  // n x c0
  std::vector<int> labels;
  std::vector<std::string> class_names;
  std::vector<FoldSplit> folds;

  int num_classes() const noexcept { return static_cast<int>(class_names.size()); }
};

/// Parses the on-disk JSON schema:
///   {"vertices": [{"name", "features": [...]}, ...],
///    "hyperedges": [{"head": [names], "tail": [names], "weight", "label"}, ...],
///    "classes": [names], "folds": [{"train": [...], "val": [...], "test": [...]}]?}
/// Vertex names map to dense ids in file order. Labels may be class names or
/// 0-based indices into "classes".
Dataset parse_dataset(const std::string& path);
Dataset parse_dataset_text(const std::string& text, const std::string& origin = "<memory>");

std::string serialize_dataset(const Dataset& ds);
void write_dataset(const Dataset& ds, const std::string& path);

/// Synthetic direction-motif generator. The vertex pool splits into two
/// halves A and B; every hyperedge draws its vertex set the same way (a few
/// from A, a few from B) so the direction-blind view of all classes is
/// identically distributed. Class patterns (cycling for class id k):
///   k % 3 == 0: head from A, tail from B
///   k % 3 == 1: head from B, tail from A
///   k % 3 == 2: undirected (everything in the head)
/// With probability 1 - motif_strength the head/tail roles are reshuffled at
/// random, erasing the label signal. Node features are Gaussian noise plus a
/// pool indicator on channel 0, so labels are only recoverable through the
/// direction structure.
struct SynthConfig {
  int classes = 3;
  int edges_per_class = 200;
  int vertex_pool = 24;  // split evenly into pools A and B
  int head_min = 2, head_max = 4;
  int tail_min = 2, tail_max = 4;
  double motif_strength = 1.0;
  double feature_noise = 1.0;
  int feature_dim = 16;
  std::uint64_t seed = 0;
};

Dataset generate_synthetic(const SynthConfig& cfg);

/// Builds k independent stratified 50/25/25 splits: each fold is a fresh
/// seeded partition of all hyperedge ids, per-class proportional within +-1.
Dataset make_folds(Dataset ds, int k, std::uint64_t seed);

}  // namespace dlglab
