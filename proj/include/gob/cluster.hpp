#pragma once

#include "gob/graph.hpp"
#include "gob/types.hpp"

#include <cstdint>

namespace gob {

// Normalized spectral clustering: embed nodes with the bottom m eigenvectors
// of the Laplacian, row-normalize, then k-means with seeded restarts.
// Deterministic for a given seed. m == 1 and m == n short-circuit to the
// trivial partitions.
Partition spectral_cluster(const UserGraph& g, int m, std::uint64_t seed);

struct KMeansResult {
  std::vector<int> labels;
  double inertia;
};

// Plain Lloyd iterations over the rows of `points`, k-means++ seeding,
// best of `restarts` runs.
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int restarts = 50,
                    int max_iters = 100);

}  // namespace gob
