#include "gob/graph.hpp"
#include "gob/linalg.hpp"
#include "gob/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace gob;

TEST_CASE("laplacian: single edge, triangle and path") {
  UserGraph pair(2);
  pair.add_edge(0, 1);
  Matrix l = laplacian(pair);
  CHECK(l(0, 0) == 1.0);
  CHECK(l(0, 1) == -1.0);
  CHECK(l(1, 1) == 1.0);

  UserGraph triangle = make_4cliques(1, 3);
  l = laplacian(triangle);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(l(i, j) == (i == j ? 2.0 : -1.0));

  UserGraph path(3);
  path.add_edge(0, 1);
  path.add_edge(1, 2);
  l = laplacian(path);
  Matrix expected(3, 3);
  expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK((l - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("laplacian: weighted degrees, zero row sums, PSD") {
  UserGraph g(4);
  g.add_edge(0, 1, 2.5);
  g.add_edge(1, 2, 0.5);
  g.add_edge(0, 3, 1.0);
  const Matrix l = laplacian(g);
  CHECK(l(1, 1) == 3.0);
  CHECK(l.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(linalg::eigh(l).eigenvalues.minCoeff() >= -1e-10);
}

TEST_CASE("UserGraph invariants: no self-loops, no duplicates, positive weights") {
  UserGraph g(3);
  CHECK_THROWS_AS(g.add_edge(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(g.add_edge(0, 5), std::invalid_argument);
  CHECK_THROWS_AS(g.add_edge(0, 1, 0.0), std::invalid_argument);
  g.add_edge(1, 0);
  CHECK_THROWS_AS(g.add_edge(0, 1), std::invalid_argument);  // stored once, either order
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(1, 0));
}

TEST_CASE("sharing transform: edgeless graph is the identity") {
  SharingTransform st(UserGraph(5));
  CHECK((st.a() - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((st.a_inv_sqrt() - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("sharing transform: triangle closed form and invariants") {
  SharingTransform st(make_4cliques(1, 3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(st.a_inv_sqrt()(i, j) ==
            doctest::Approx(i == j ? 2.0 / 3.0 : 1.0 / 6.0).epsilon(1e-12));
  CHECK((st.a() - (Matrix::Identity(3, 3) + laplacian(make_4cliques(1, 3)))).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((st.a_inv_sqrt() * st.a_inv_sqrt() * st.a() - Matrix::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() <= 1e-8);
  CHECK(linalg::eigh(st.a()).eigenvalues.minCoeff() >= 1.0 - 1e-10);
}

TEST_CASE("sharing transform: disconnected components give identical blocks") {
  UserGraph two_edges(4);
  two_edges.add_edge(0, 1);
  two_edges.add_edge(2, 3);
  SharingTransform st(two_edges);
  // per-component oracle: transform of a single edge
  UserGraph one_edge(2);
  one_edge.add_edge(0, 1);
  SharingTransform small(one_edge);
  CHECK((st.a_inv_sqrt().block(0, 0, 2, 2) - small.a_inv_sqrt()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((st.a_inv_sqrt().block(2, 2, 2, 2) - small.a_inv_sqrt()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(st.a_inv_sqrt().block(0, 2, 2, 2).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("lift_context: edgeless graph reproduces the sparse one-block layout") {
  SharingTransform st(UserGraph(4));
  Vector x(2);
  x << 0.6, -0.8;
  const Vector lifted = st.lift_context(2, x);
  CHECK(lifted.size() == 8);
  for (Index i = 0; i < 8; ++i) {
    if (i == 4) CHECK(lifted[i] == doctest::Approx(0.6).epsilon(1e-14));
    else if (i == 5) CHECK(lifted[i] == doctest::Approx(-0.8).epsilon(1e-14));
    else CHECK(std::abs(lifted[i]) <= 1e-14);
  }
}

TEST_CASE("lift_context: triangle blocks and norm") {
  SharingTransform st(make_4cliques(1, 3));
  Vector x(4);
  x << 1, 0, 0, 0;
  const Vector lifted = st.lift_context(0, x);
  CHECK(lifted[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(lifted[4] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(lifted[8] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  // ||phi_tilde||^2 = (A^{-1})_00 = 2/(n+1) = 1/2 on the complete graph
  CHECK(lifted.squaredNorm() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("lift_context: norm never exceeds the context norm") {
  auto gen = rng::make_stream(17, rng::Stream::Generic);
  for (int trial = 0; trial < 20; ++trial) {
    UserGraph g = inject_graph_noise(UserGraph(6), 8.0, 100 + trial);
    SharingTransform st(g);
    const Matrix a_inv = st.a().inverse();
    for (int i = 0; i < 6; ++i) {
      const Vector x = rng::unit_vector(gen, 3);
      const Vector lifted = st.lift_context(i, x);
      CHECK(lifted.norm() <= x.norm() * (1.0 + 1e-12));
      const double self = lifted.squaredNorm();
      CHECK(self == doctest::Approx(a_inv(i, i)).epsilon(1e-10));
      CHECK(self > 0.0);
      CHECK(self <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("lift_context: bad node or empty context rejected") {
  SharingTransform st(UserGraph(3));
  CHECK_THROWS_AS(st.lift_context(3, Vector::Ones(2)), std::invalid_argument);
  CHECK_THROWS_AS(st.lift_context(-1, Vector::Ones(2)), std::invalid_argument);
}

TEST_CASE("inject_graph_noise: zero count leaves the graph unchanged") {
  UserGraph g = make_4cliques(2, 3);
  UserGraph noisy = inject_graph_noise(g, 0.0, 7);
  CHECK(noisy.num_edges() == g.num_edges());
  for (const Edge& e : g.edges()) CHECK(noisy.has_edge(e.i, e.j));
}

TEST_CASE("inject_graph_noise: expected toggle count matches the binomial oracle") {
  // n = 100, noise 500 of 4950 pairs: threshold 1 - 500/4950 ~ 0.89899
  UserGraph g(100);  // edgeless: toggles == edges of the noisy graph
  const int trials = 200;
  double total = 0.0;
  for (int s = 0; s < trials; ++s) total += inject_graph_noise(g, 500.0, 1000 + s).num_edges();
  const double mean = total / trials;
  const double p = 500.0 / 4950.0;
  const double sigma_binomial = std::sqrt(4950.0 * p * (1.0 - p));
  CHECK(std::abs(mean - 500.0) <= 3.0 * sigma_binomial);
  // and the mean of 200 seeds is much tighter than a single draw
  CHECK(std::abs(mean - 500.0) <= 5.0 * sigma_binomial / std::sqrt(trials));
}

TEST_CASE("inject_graph_noise: same seed twice restores the graph") {
  UserGraph g = make_4cliques(4, 5);
  UserGraph once = inject_graph_noise(g, 30.0, 42);
  UserGraph twice = inject_graph_noise(once, 30.0, 42);
  CHECK(twice.num_edges() == g.num_edges());
  for (const Edge& e : g.edges()) CHECK(twice.has_edge(e.i, e.j));
}

TEST_CASE("inject_graph_noise: validation") {
  UserGraph g(4);
  CHECK_THROWS_AS(inject_graph_noise(g, 7.0, 1), std::invalid_argument);  // > n(n-1)/2
  UserGraph weighted(3);
  weighted.add_edge(0, 1, 2.0);
  CHECK_THROWS_AS(inject_graph_noise(weighted, 1.0, 1), std::invalid_argument);
}

TEST_CASE("make_4cliques: sizes and edge counts") {
  UserGraph g = make_4cliques();
  CHECK(g.num_nodes() == 100);
  CHECK(g.num_edges() == 1200);
  CHECK_FALSE(g.is_connected());

  UserGraph single = make_4cliques(1, 2);
  CHECK(single.num_nodes() == 2);
  CHECK(single.num_edges() == 1);
  CHECK(single.is_connected());

  UserGraph two = make_4cliques(2, 3);
  CHECK(two.num_nodes() == 6);
  CHECK(two.num_edges() == 6);
  CHECK_FALSE(two.is_connected());
}

TEST_CASE("macro_graph: single cluster collapses to one isolated node") {
  UserGraph g = make_4cliques(2, 3);
  MacroGraph mg = macro_graph(g, Partition::single_cluster(6));
  CHECK(mg.graph.num_nodes() == 1);
  CHECK(mg.graph.num_edges() == 0);
  for (int v : mg.node_map) CHECK(v == 0);
}

TEST_CASE("macro_graph: singleton clusters reproduce an unweighted graph") {
  UserGraph g = make_4cliques(1, 4);
  MacroGraph mg = macro_graph(g, Partition::singletons(4));
  CHECK(mg.graph.num_nodes() == 4);
  CHECK(mg.graph.num_edges() == g.num_edges());
  for (const Edge& e : g.edges()) CHECK(mg.graph.has_edge(e.i, e.j));
}

TEST_CASE("macro_graph: crossing edges are counted as weights") {
  UserGraph g = make_4cliques(4, 25);
  // three extra edges between cliques 0 and 1
  g.add_edge(0, 25);
  g.add_edge(1, 26);
  g.add_edge(2, 27);
  Partition p;
  p.num_clusters = 4;
  p.assignment.resize(100);
  for (int i = 0; i < 100; ++i) p.assignment[static_cast<std::size_t>(i)] = i / 25;
  MacroGraph mg = macro_graph(g, p);
  CHECK(mg.graph.num_nodes() == 4);
  CHECK(mg.graph.num_edges() == 1);
  CHECK(mg.graph.edges()[0].weight == 3.0);
  CHECK(mg.graph.total_weight() == 3.0);  // total weight == inter-cluster edge count
}

TEST_CASE("block_graph: singleton clusters delete every edge") {
  UserGraph g = make_4cliques(2, 4);
  UserGraph b = block_graph(g, Partition::singletons(8));
  CHECK(b.num_edges() == 0);
}

TEST_CASE("block_graph: one cluster keeps the graph; true clusters keep intra edges") {
  UserGraph g = make_4cliques(2, 4);
  UserGraph same = block_graph(g, Partition::single_cluster(8));
  CHECK(same.num_edges() == g.num_edges());

  UserGraph noisy = inject_graph_noise(make_4cliques(4, 25), 500.0, 9);
  Partition p;
  p.num_clusters = 4;
  p.assignment.resize(100);
  for (int i = 0; i < 100; ++i) p.assignment[static_cast<std::size_t>(i)] = i / 25;
  UserGraph blocked = block_graph(noisy, p);
  // oracle: exactly the noisy edges whose endpoints share a clique
  int expected = 0;
  for (const Edge& e : noisy.edges())
    if (e.i / 25 == e.j / 25) {
      ++expected;
      CHECK(blocked.has_edge(e.i, e.j));
    }
  CHECK(blocked.num_edges() == expected);
  for (const Edge& e : blocked.edges()) CHECK(noisy.has_edge(e.i, e.j));  // subset of original
}

TEST_CASE("graph file round-trip with comments and weights") {
  UserGraph g(4);
  g.add_edge(0, 1);
  g.add_edge(1, 3, 2.25);
  std::stringstream buffer;
  buffer << "# a comment line\n";
  write_graph(buffer, g);
  UserGraph back = read_graph(buffer);
  CHECK(back.num_nodes() == 4);
  CHECK(back.num_edges() == 2);
  CHECK(back.has_edge(1, 3));
  CHECK(back.edges()[1].weight == 2.25);
}

TEST_CASE("graph file errors carry line numbers") {
  auto message_of = [](auto&& fn) -> std::string {
    try {
      fn();
    } catch (const std::runtime_error& e) {
      return e.what();
    }
    return "";
  };
  std::stringstream missing_header("0\t1\n");
  CHECK(message_of([&] { read_graph(missing_header); }).find("line 1") != std::string::npos);
  std::stringstream bad_edge("nodes 3\n0\tx\n");
  CHECK(message_of([&] { read_graph(bad_edge); }).find("line 2") != std::string::npos);
  std::stringstream self_loop("nodes 3\n1\t1\n");
  CHECK_THROWS_AS(read_graph(self_loop), std::runtime_error);
}

TEST_CASE("partition file round-trip and validation") {
  Partition p;
  p.num_clusters = 2;
  p.assignment = {0, 1, 1, 0};
  std::stringstream buffer;
  write_partition(buffer, p);
  Partition back = read_partition(buffer, 4);
  CHECK(back.num_clusters == 2);
  CHECK(back.assignment == p.assignment);

  std::stringstream incomplete("0\t0\n1\t1\n");
  CHECK_THROWS_AS(read_partition(incomplete, 3), std::runtime_error);
}

TEST_CASE("induced_subgraph keeps intra edges and reindexes") {
  UserGraph g = make_4cliques(2, 3);
  UserGraph sub = induced_subgraph(g, {3, 4, 5, 0});
  CHECK(sub.num_nodes() == 4);
  CHECK(sub.num_edges() == 3);  // the second clique only; node 0 is isolated
  CHECK(sub.has_edge(0, 1));
  CHECK(sub.has_edge(0, 2));
  CHECK(sub.has_edge(1, 2));
}
