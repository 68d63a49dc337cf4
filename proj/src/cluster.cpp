#include "gob/cluster.hpp"

#include "gob/linalg.hpp"
#include "gob/rng.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace gob {

namespace {

double assign_labels(const Matrix& points, const Matrix& centers, std::vector<int>& labels) {
  const Index n = points.rows();
  const int k = static_cast<int>(centers.rows());
  double inertia = 0.0;
  for (Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int c = 0; c < k; ++c) {
      const double d2 = (points.row(i) - centers.row(c)).squaredNorm();
      if (d2 < best) {
        best = d2;
        arg = c;
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
    inertia += best;
  }
  return inertia;
}

Matrix plus_plus_seeding(const Matrix& points, int k, std::mt19937_64& gen) {
  const Index n = points.rows();
  Matrix centers(k, points.cols());
  std::uniform_int_distribution<Index> first(0, n - 1);
  centers.row(0) = points.row(first(gen));
  Vector d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Index pick = 0;
    if (total > 0.0) {
      double target = unif(gen) * total, acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(gen);  // all points coincide with chosen centers
    }
    centers.row(c) = points.row(pick);
    d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int restarts, int max_iters) {
  const Index n = points.rows();
  if (k < 1 || k > n) throw std::invalid_argument("kmeans: k out of range");
  auto gen = rng::make_stream(seed, rng::Stream::Cluster);

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int run = 0; run < restarts; ++run) {
    Matrix centers = plus_plus_seeding(points, k, gen);
    double inertia = assign_labels(points, centers, labels);
    for (int iter = 0; iter < max_iters; ++iter) {
      Matrix sums = Matrix::Zero(k, points.cols());
      std::vector<int> counts(static_cast<std::size_t>(k), 0);
      for (Index i = 0; i < n; ++i) {
        sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
          centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
        } else {
          // revive an empty cluster at the point farthest from its center
          Index far = 0;
          double far_d = -1.0;
          for (Index i = 0; i < n; ++i) {
            const double d2 =
                (points.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
            if (d2 > far_d) {
              far_d = d2;
              far = i;
            }
          }
          centers.row(c) = points.row(far);
        }
      }
      const double next = assign_labels(points, centers, labels);
      if (next >= inertia - 1e-12 * (1.0 + inertia)) {
        inertia = std::min(inertia, next);
        break;
      }
      inertia = next;
    }
    if (inertia < best.inertia) {
      best.inertia = inertia;
      best.labels = labels;
    }
  }
  return best;
}

Partition spectral_cluster(const UserGraph& g, int m, std::uint64_t seed) {
  const int n = g.num_nodes();
  if (m < 1 || m > n) throw std::invalid_argument("spectral_cluster: m out of range");
  if (m == 1) return Partition::single_cluster(n);
  if (m == n) return Partition::singletons(n);

  auto decomp = linalg::eigh(laplacian(g));
  Matrix embedding = decomp.eigenvectors.leftCols(m);  // bottom m eigenvectors
  for (Index i = 0; i < embedding.rows(); ++i) {
    const double norm = embedding.row(i).norm();
    if (norm > 1e-12) embedding.row(i) /= norm;
  }

  KMeansResult km = kmeans(embedding, m, seed);

  // canonical labels: clusters numbered by first appearance in node order
  Partition p;
  p.assignment.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> relabel(static_cast<std::size_t>(m), -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    int& r = relabel[static_cast<std::size_t>(km.labels[static_cast<std::size_t>(i)])];
    if (r < 0) r = next++;
    p.assignment[static_cast<std::size_t>(i)] = r;
  }
  p.num_clusters = next;
  p.validate(n);
  return p;
}

}  // namespace gob
