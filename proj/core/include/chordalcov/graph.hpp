#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "chordalcov/errors.hpp"

namespace chordalcov {

// Undirected graph on vertices 0..vertex_count-1. No self loops; the
// diagonal is implicit everywhere. External formats (JSON specs, CLI
// output) are 1-based; everything in memory is 0-based.
struct Graph {
  int vertex_count = 0;
  std::vector<std::pair<int, int>> edges;  // i < j, sorted, unique

  static Graph make(int vertex_count, std::vector<std::pair<int, int>> edges);

  // Dense adjacency lookup table, row-major vertex_count^2 bytes.
  std::vector<unsigned char> adjacency() const;
};

// A decomposable graph together with a perfect order of its maximal
// cliques C_1..C_k, the induced separators S_j = H_{j-1} n C_j, histories
// H_j, residuals R_j and separator multiplicities. Immutable once built.
class JunctionTree {
 public:
  struct DistinctSeparator {
    std::vector<int> vertices;
    int multiplicity = 0;
  };

  // Builds from maximal cliques given in a perfect order; validates the
  // running intersection property, clique maximality and vertex cover.
  static JunctionTree from_cliques(int vertex_count,
                                   std::vector<std::vector<int>> cliques);

  int vertex_count() const { return vertex_count_; }
  int clique_count() const { return static_cast<int>(cliques_.size()); }

  const std::vector<std::vector<int>>& cliques() const { return cliques_; }
  const std::vector<int>& clique(int j) const;
  // separator(j) = S_{j+1} in 1-based paper numbering; valid for 1 <= j < k.
  const std::vector<int>& separator(int j) const;
  const std::vector<int>& residual(int j) const;
  const std::vector<int>& history(int j) const;

  int clique_size(int j) const;
  int separator_size(int j) const;
  // Size of the first separator; 0 when the tree has a single clique.
  int s2() const;

  const std::vector<DistinctSeparator>& distinct_separators() const {
    return distinct_;
  }
  // Maps separator occurrence j (1 <= j < k) to its distinct-separator id.
  int distinct_id(int j) const;

  bool has_edge(int i, int j) const;
  int max_clique_size() const;
  long edge_count() const;
  Graph to_graph() const;

  bool same_structure(const JunctionTree& other) const;

 private:
  JunctionTree() = default;
  void finalize();

  int vertex_count_ = 0;
  std::vector<std::vector<int>> cliques_;
  std::vector<std::vector<int>> separators_;  // [j-1] holds S for clique j
  std::vector<std::vector<int>> residuals_;
  std::vector<std::vector<int>> histories_;
  std::vector<DistinctSeparator> distinct_;
  std::vector<int> distinct_id_;
  std::vector<unsigned char> adj_;
};

using TreePtr = std::shared_ptr<const JunctionTree>;

// Maximum cardinality search with lowest-index tie-breaking, followed by
// clique extraction and a running-intersection check. Throws
// NotDecomposable when MCS detects fill-in (the graph is not chordal).
JunctionTree build_junction_tree(const Graph& g);

// AR(k)-style band: cliques {j,...,j+k}. k = 0 gives r singleton cliques.
JunctionTree banded_graph(int r, int k);

// Band of width k1+1 cascading until the last clique ends at `changepoint`
// (0-based vertex id), then cliques of width k2+1 cascade to vertex r-1.
// The transition clique introduces exactly one new vertex.
JunctionTree diff_banded_graph(int r, int k1, int k2, int changepoint);

inline TreePtr share(JunctionTree t) {
  return std::make_shared<const JunctionTree>(std::move(t));
}

}  // namespace chordalcov
