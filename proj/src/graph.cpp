#include "gob/graph.hpp"

#include "gob/linalg.hpp"
#include "gob/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace gob {

void UserGraph::throw_invalid(const std::string& what) {
  throw std::invalid_argument("UserGraph: " + what);
}

void UserGraph::add_edge(int i, int j, double weight) {
  if (i == j) throw_invalid("self-loop");
  if (i < 0 || j < 0 || i >= n_ || j >= n_) throw_invalid("node index out of range");
  if (!(weight > 0.0)) throw_invalid("edge weight must be positive");
  if (i > j) std::swap(i, j);
  if (has_edge(i, j)) throw_invalid("duplicate edge");
  edges_.push_back({i, j, weight});
  if (weight != 1.0) weighted_ = true;
  connected_cache_ = -1;
}

bool UserGraph::has_edge(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (const Edge& e : edges_)
    if (e.i == i && e.j == j) return true;
  return false;
}

bool UserGraph::is_connected() const {
  if (n_ <= 0) return false;
  if (connected_cache_ >= 0) return connected_cache_ == 1;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_));
  for (const Edge& e : edges_) {
    adj[static_cast<std::size_t>(e.i)].push_back(e.j);
    adj[static_cast<std::size_t>(e.j)].push_back(e.i);
  }
  std::vector<char> seen(static_cast<std::size_t>(n_), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[static_cast<std::size_t>(u)])
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++count;
        stack.push_back(v);
      }
  }
  connected_cache_ = (count == n_) ? 1 : 0;
  return connected_cache_ == 1;
}

double UserGraph::total_weight() const {
  double w = 0.0;
  for (const Edge& e : edges_) w += e.weight;
  return w;
}

Matrix UserGraph::adjacency() const {
  Matrix a = Matrix::Zero(n_, n_);
  for (const Edge& e : edges_) {
    a(e.i, e.j) = e.weight;
    a(e.j, e.i) = e.weight;
  }
  return a;
}

Matrix laplacian(const UserGraph& g) {
  const int n = g.num_nodes();
  Matrix l = Matrix::Zero(n, n);
  for (const Edge& e : g.edges()) {
    l(e.i, e.j) -= e.weight;
    l(e.j, e.i) -= e.weight;
    l(e.i, e.i) += e.weight;
    l(e.j, e.j) += e.weight;
  }
  return l;
}

SharingTransform::SharingTransform(const UserGraph& g) : n_(g.num_nodes()) {
  a_ = laplacian(g);
  a_.diagonal().array() += 1.0;  // A = I + L
  a_inv_sqrt_ = linalg::inv_sqrt(a_);
}

Vector SharingTransform::lift_context(int i, const Vector& x) const {
  if (i < 0 || i >= n_) throw std::invalid_argument("lift_context: node index out of range");
  const Index d = x.size();
  if (d <= 0) throw std::invalid_argument("lift_context: empty context");
  Vector lifted(static_cast<Index>(n_) * d);
  for (int j = 0; j < n_; ++j) lifted.segment(static_cast<Index>(j) * d, d) = a_inv_sqrt_(j, i) * x;
  return lifted;
}

Matrix SharingTransform::lift_contexts(int i, const Matrix& contexts) const {
  if (i < 0 || i >= n_) throw std::invalid_argument("lift_contexts: node index out of range");
  const Index d = contexts.rows(), c = contexts.cols();
  Matrix lifted(static_cast<Index>(n_) * d, c);
  for (int j = 0; j < n_; ++j)
    lifted.middleRows(static_cast<Index>(j) * d, d) = a_inv_sqrt_(j, i) * contexts;
  return lifted;
}

double SharingTransform::self_influence(int i) const {
  return a_inv_sqrt_.col(i).squaredNorm();
}

UserGraph inject_graph_noise(const UserGraph& g, double noise_count, std::uint64_t seed) {
  if (g.is_weighted())
    throw std::invalid_argument("inject_graph_noise: requires an unweighted graph");
  const int n = g.num_nodes();
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  if (noise_count < 0.0 || noise_count > pairs)
    throw std::invalid_argument("inject_graph_noise: noise_count out of range");
  const double threshold = pairs > 0.0 ? 1.0 - noise_count / pairs : 1.0;

  auto gen = rng::make_stream(seed, rng::Stream::GraphNoise);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::set<std::pair<int, int>> present;
  for (const Edge& e : g.edges()) present.insert({e.i, e.j});
  // pair order fixed (row-major upper triangle) so that a seed identifies
  // one toggle set; re-applying it flips the same pairs back
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (unif(gen) > threshold) {
        auto key = std::make_pair(i, j);
        if (!present.erase(key)) present.insert(key);
      }

  UserGraph out(n);
  for (const auto& [i, j] : present) out.add_edge(i, j);
  return out;
}

UserGraph make_4cliques(int clique_count, int clique_size) {
  if (clique_count <= 0 || clique_size <= 0)
    throw std::invalid_argument("make_4cliques: sizes must be positive");
  UserGraph g(clique_count * clique_size);
  for (int c = 0; c < clique_count; ++c) {
    const int base = c * clique_size;
    for (int i = 0; i < clique_size; ++i)
      for (int j = i + 1; j < clique_size; ++j) g.add_edge(base + i, base + j);
  }
  return g;
}

std::vector<std::vector<int>> Partition::members() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(num_clusters));
  for (int node = 0; node < static_cast<int>(assignment.size()); ++node)
    out[static_cast<std::size_t>(assignment[static_cast<std::size_t>(node)])].push_back(node);
  return out;
}

Partition Partition::singletons(int n) {
  Partition p;
  p.num_clusters = n;
  p.assignment.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p.assignment[static_cast<std::size_t>(i)] = i;
  return p;
}

Partition Partition::single_cluster(int n) {
  Partition p;
  p.num_clusters = 1;
  p.assignment.assign(static_cast<std::size_t>(n), 0);
  return p;
}

void Partition::validate(int n) const {
  if (static_cast<int>(assignment.size()) != n)
    throw std::invalid_argument("Partition: node count mismatch");
  if (num_clusters <= 0) throw std::invalid_argument("Partition: no clusters");
  std::vector<char> used(static_cast<std::size_t>(num_clusters), 0);
  for (int c : assignment) {
    if (c < 0 || c >= num_clusters) throw std::invalid_argument("Partition: cluster id out of range");
    used[static_cast<std::size_t>(c)] = 1;
  }
  for (char u : used)
    if (!u) throw std::invalid_argument("Partition: cluster ids not contiguous");
}

MacroGraph macro_graph(const UserGraph& g, const Partition& p) {
  p.validate(g.num_nodes());
  const int m = p.num_clusters;
  Matrix cross = Matrix::Zero(m, m);
  for (const Edge& e : g.edges()) {
    const int ci = p.cluster_of(e.i), cj = p.cluster_of(e.j);
    if (ci != cj) {
      cross(std::min(ci, cj), std::max(ci, cj)) += 1.0;  // edge count, not weight sum
    }
  }
  UserGraph macro(m);
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      if (cross(a, b) > 0.0) macro.add_edge(a, b, cross(a, b));
  return {std::move(macro), p.assignment};
}

UserGraph block_graph(const UserGraph& g, const Partition& p) {
  p.validate(g.num_nodes());
  UserGraph out(g.num_nodes());
  for (const Edge& e : g.edges())
    if (p.cluster_of(e.i) == p.cluster_of(e.j)) out.add_edge(e.i, e.j, e.weight);
  return out;
}

UserGraph induced_subgraph(const UserGraph& g, const std::vector<int>& nodes) {
  std::vector<int> local(static_cast<std::size_t>(g.num_nodes()), -1);
  for (int k = 0; k < static_cast<int>(nodes.size()); ++k) {
    const int node = nodes[static_cast<std::size_t>(k)];
    if (node < 0 || node >= g.num_nodes())
      throw std::invalid_argument("induced_subgraph: node out of range");
    if (local[static_cast<std::size_t>(node)] != -1)
      throw std::invalid_argument("induced_subgraph: duplicate node");
    local[static_cast<std::size_t>(node)] = k;
  }
  UserGraph sub(static_cast<int>(nodes.size()));
  for (const Edge& e : g.edges()) {
    const int li = local[static_cast<std::size_t>(e.i)], lj = local[static_cast<std::size_t>(e.j)];
    if (li != -1 && lj != -1) sub.add_edge(li, lj, e.weight);
  }
  return sub;
}

namespace {

[[noreturn]] void parse_error(const std::string& what, int line_no) {
  throw std::runtime_error(what + " (line " + std::to_string(line_no) + ")");
}

bool content_line(const std::string& line) {
  for (char c : line) {
    if (c == '#') return false;
    if (!std::isspace(static_cast<unsigned char>(c))) return true;
  }
  return false;
}

}  // namespace

UserGraph read_graph(std::istream& in) {
  std::string line;
  int line_no = 0;
  int n = -1;
  UserGraph g;
  while (std::getline(in, line)) {
    ++line_no;
    if (!content_line(line)) continue;
    std::istringstream ss(line);
    if (n < 0) {
      std::string tag;
      ss >> tag >> n;
      if (tag != "nodes" || ss.fail() || n <= 0) parse_error("expected 'nodes <n>' header", line_no);
      g = UserGraph(n);
      continue;
    }
    int i = 0, j = 0;
    double w = 1.0;
    ss >> i >> j;
    if (ss.fail()) parse_error("malformed edge line", line_no);
    if (!(ss >> w)) w = 1.0;
    try {
      g.add_edge(i, j, w);
    } catch (const std::invalid_argument& e) {
      parse_error(e.what(), line_no);
    }
  }
  if (n < 0) throw std::runtime_error("graph file has no 'nodes <n>' header");
  return g;
}

UserGraph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  return read_graph(in);
}

void write_graph(std::ostream& out, const UserGraph& g) {
  out << "nodes " << g.num_nodes() << "\n";
  char buf[64];
  for (const Edge& e : g.edges()) {
    if (e.weight == 1.0) {
      out << e.i << "\t" << e.j << "\n";
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g", e.weight);
      out << e.i << "\t" << e.j << "\t" << buf << "\n";
    }
  }
}

void write_graph_file(const std::string& path, const UserGraph& g) {
  std::ofstream out(path, std::ios::binary);  // binary: keep LF endings everywhere
  if (!out) throw std::runtime_error("cannot write graph file: " + path);
  write_graph(out, g);
}

Partition read_partition(std::istream& in, int n) {
  Partition p;
  p.assignment.assign(static_cast<std::size_t>(n), -1);
  std::string line;
  int line_no = 0;
  int max_cluster = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!content_line(line)) continue;
    std::istringstream ss(line);
    int node = 0, cluster = 0;
    ss >> node >> cluster;
    if (ss.fail()) parse_error("malformed partition line", line_no);
    if (node < 0 || node >= n) parse_error("node out of range", line_no);
    if (cluster < 0) parse_error("negative cluster id", line_no);
    p.assignment[static_cast<std::size_t>(node)] = cluster;
    max_cluster = std::max(max_cluster, cluster);
  }
  for (int i = 0; i < n; ++i)
    if (p.assignment[static_cast<std::size_t>(i)] < 0)
      throw std::runtime_error("partition file misses node " + std::to_string(i));
  p.num_clusters = max_cluster + 1;
  p.validate(n);
  return p;
}

Partition read_partition_file(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open partition file: " + path);
  return read_partition(in, n);
}

void write_partition(std::ostream& out, const Partition& p) {
  for (int node = 0; node < static_cast<int>(p.assignment.size()); ++node)
    out << node << "\t" << p.assignment[static_cast<std::size_t>(node)] << "\n";
}

void write_partition_file(const std::string& path, const Partition& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write partition file: " + path);
  write_partition(out, p);
}

}  // namespace gob
