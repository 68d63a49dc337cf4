#pragma once

#include "gob/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gob {

struct Edge {
  int i;  // i < j always
  int j;
  double weight;
};

// Undirected weighted user graph. Edges are stored once with i < j,
// no self-loops, weights strictly positive.
class UserGraph {
 public:
  UserGraph() = default;
  explicit UserGraph(int n) : n_(n) {
    if (n <= 0) throw_invalid("node count must be positive");
  }

  int num_nodes() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  void add_edge(int i, int j, double weight = 1.0);
  bool has_edge(int i, int j) const;
  bool is_weighted() const { return weighted_; }
  bool is_connected() const;
  double total_weight() const;

  // adjacency as a dense symmetric matrix (small n only)
  Matrix adjacency() const;

 private:
  [[noreturn]] static void throw_invalid(const std::string& what);

  int n_ = 0;
  std::vector<Edge> edges_;
  bool weighted_ = false;
  mutable int connected_cache_ = -1;  // -1 unknown, else 0/1
};

// Combinatorial Laplacian: diagonal holds weighted degrees, off-diagonal
// entries are -w(i,j). Row sums are zero and the matrix is PSD.
Matrix laplacian(const UserGraph& g);

// A = I + L and its inverse square root. A_kron = A (x) I_d is never
// materialized: every dn-dimensional action uses the identity
// (A^{-1/2} (x) I_d)(e_i (x) x) = (A^{-1/2} e_i) (x) x.
class SharingTransform {
 public:
  explicit SharingTransform(const UserGraph& g);

  int num_nodes() const { return n_; }
  const Matrix& a() const { return a_; }
  const Matrix& a_inv_sqrt() const { return a_inv_sqrt_; }

  // phi_tilde for (node i, context x): the j-th d-block equals
  // a_inv_sqrt(j, i) * x. O(n d), no dn x dn product involved.
  Vector lift_context(int i, const Vector& x) const;

  // Convenience for whole candidate sets: columns of `contexts` are lifted
  // into columns of a (d*n) x c matrix.
  Matrix lift_contexts(int i, const Matrix& contexts) const;

  // (A^{-1})_{ii} = squared norm of the lifted unit context at node i.
  double self_influence(int i) const;

 private:
  int n_ = 0;
  Matrix a_;
  Matrix a_inv_sqrt_;
};

// Symmetric XOR noise on the adjacency matrix: draw one uniform per
// unordered pair, toggle the pairs whose draw exceeds the threshold chosen
// so that the expected number of toggles is exactly `noise_count`.
// Same seed applied twice restores the original graph.
UserGraph inject_graph_noise(const UserGraph& g, double noise_count, std::uint64_t seed);

// Disjoint union of `clique_count` complete graphs on `clique_size` nodes.
UserGraph make_4cliques(int clique_count = 4, int clique_size = 25);

// Assignment of every node to one of m clusters, ids contiguous from 0.
struct Partition {
  std::vector<int> assignment;
  int num_clusters = 0;

  int cluster_of(int node) const { return assignment.at(static_cast<std::size_t>(node)); }
  std::vector<std::vector<int>> members() const;  // sorted node lists per cluster
  static Partition singletons(int n);
  static Partition single_cluster(int n);
  void validate(int n) const;
};

// One node per cluster; inter-cluster edge counts become macro edge weights.
// Returns the macro graph and the node -> macro node map.
struct MacroGraph {
  UserGraph graph;
  std::vector<int> node_map;
};
MacroGraph macro_graph(const UserGraph& g, const Partition& p);

// The original graph with every inter-cluster edge removed.
UserGraph block_graph(const UserGraph& g, const Partition& p);

// Subgraph induced by `nodes` (kept in the given order, reindexed densely).
UserGraph induced_subgraph(const UserGraph& g, const std::vector<int>& nodes);

// --- text formats ---------------------------------------------------------
// Graph file: '#' comments, a "nodes <n>" header line, then one
// "i<TAB>j[<TAB>weight]" line per edge, 0-based ids.
UserGraph read_graph(std::istream& in);
UserGraph read_graph_file(const std::string& path);
void write_graph(std::ostream& out, const UserGraph& g);
void write_graph_file(const std::string& path, const UserGraph& g);

// Partition file: one "node<TAB>cluster" line per node.
Partition read_partition(std::istream& in, int n);
Partition read_partition_file(const std::string& path, int n);
void write_partition(std::ostream& out, const Partition& p);
void write_partition_file(const std::string& path, const Partition& p);

}  // namespace gob
