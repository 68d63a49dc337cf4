#pragma once

#include "gob/graph.hpp"
#include "gob/runner.hpp"
#include "gob/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace gob {

// Per-node target vectors for synthetic runs: one unit vector per clique,
// replicated over the clique's nodes. `noise_half_width` is the half-width z
// of the uniform payoff noise; sigma_safe/sigma_variance are the two
// sub-Gaussian readings of that noise (z itself, and z/sqrt(3)).
struct GroundTruth {
  Matrix vectors;  // d x n, column i = u_i
  double noise_half_width = 0.0;

  Index dim() const { return vectors.rows(); }
  int num_nodes() const { return static_cast<int>(vectors.cols()); }
  Vector stacked() const;  // U in R^{dn}, node blocks in order
  double sigma_safe() const { return noise_half_width; }
  double sigma_variance() const { return noise_half_width / std::sqrt(3.0); }
};

GroundTruth synth_ground_truth(int clique_count, int clique_size, Index d, std::uint64_t seed,
                               double noise_half_width = 0.0);

// u_i' x + Uniform[-z, z], before any clipping.
double synth_payoff(const GroundTruth& gt, int node, const Vector& x, std::uint64_t seed, long t,
                    int arm);

// Lowercases and splits on '_', '-' and apostrophes; empty fragments dropped.
std::vector<std::string> split_tags(const std::string& raw);

struct TagAssignment {
  int item;
  std::string tag;
};

struct ItemFeaturesReport {
  Matrix features;           // items x pca_dim (zero-padded if rank < pca_dim)
  int unique_tags_raw = 0;   // distinct tag strings before splitting
  int unique_tags_split = 0; // distinct word tags after splitting
  int tags_kept = 0;         // after the min-count filter
  int items_without_tags = 0;
  Index pca_retained = 0;
};

// Splits tags, drops words occurring fewer than `min_tag_count` times in the
// corpus, builds per-item TF-IDF rows (raw tf, ln idf, L2-normalized) and
// projects onto the leading `pca_dim` principal components.
ItemFeaturesReport build_item_features(const std::vector<TagAssignment>& assignments,
                                       int item_count, int min_tag_count, Index pca_dim);

// A loaded implicit-feedback dataset: social graph, positive (user, item)
// pairs and item context vectors.
struct Interactions {
  UserGraph graph;
  Matrix features;                       // items x d
  std::vector<std::vector<int>> positives;  // per user, sorted item ids
  std::vector<std::unordered_set<int>> positive_set;

  int num_users() const { return graph.num_nodes(); }
  int num_items() const { return static_cast<int>(features.rows()); }
  double payoff(int user, int item) const {
    return positive_set[static_cast<std::size_t>(user)].count(item) ? 1.0 : 0.0;
  }
};

struct DatasetStats {
  int nodes = 0;
  int edges = 0;
  double avg_degree = 0.0;
  int items = 0;
  long nonzero_payoffs = 0;
  int tags = 0;        // distinct raw tag strings
  int tags_split = 0;  // distinct word tags after splitting
  int users_dropped_no_positive = 0;
  int users_dropped_disconnected = 0;
  int items_without_tags = 0;
  std::vector<std::string> notes;

  std::string table() const;  // aligned text report
};

struct HetrecFiles {
  std::string friends;
  std::string interactions;
  std::string tags_assignments;
  std::string tag_names;  // optional id -> value map ("tags.dat")
  int min_tag_count = 1;
};

// File layout presets for the two dataset kinds. "delicious" filters tags
// occurring fewer than 10 times; "lastfm" keeps everything.
HetrecFiles hetrec_layout(const std::string& dir, const std::string& kind);

struct LoadedDataset {
  Interactions data;
  DatasetStats stats;
};

// Loads a HetRec-style directory: mutualizes the friendship relation,
// collects positive pairs, builds TF-IDF/PCA item features, drops users with
// no positives, restricts to the largest connected component if the graph is
// disconnected, and reindexes users/items densely. Counts in `stats` refer
// to the raw files, before any restriction.
LoadedDataset load_hetrec(const HetrecFiles& files, Index pca_dim = 25);

// Connected subgraph of `count` users grown breadth-first from node 0,
// users reindexed densely; items and features unchanged.
Interactions subsample_users(const Interactions& data, int count);

// --- context-set sampling ---------------------------------------------------

// Real-data candidate sets: set_size - 1 distinct random items plus one of
// the served user's positives (random picks re-drawn on collision), shuffled.
ContextEvent sample_context_set(const Interactions& inter, long t, int set_size,
                                std::uint64_t seed);

// Synthetic candidate sets: uniform user, i.i.d. uniform unit vectors.
ContextEvent sample_synth_context_set(const GroundTruth& gt, int set_size, std::uint64_t seed,
                                      long t);

// --- environments ------------------------------------------------------------

// Deterministic environment shared by all algorithms run on one seed: events
// and payoffs are pure functions of (seed, t).
class Environment {
 public:
  virtual ~Environment() = default;
  virtual int num_users() const = 0;
  virtual Index context_dim() const = 0;
  virtual const UserGraph& graph() const = 0;
  virtual ContextEvent draw_event(std::uint64_t seed, long t) const = 0;
  // Raw (unclipped) payoff the environment would return for each arm.
  virtual Vector arm_payoffs(std::uint64_t seed, const ContextEvent& event) const = 0;
  virtual bool has_ground_truth() const { return false; }
  // Expected payoff per arm under the ground truth (synthetic only).
  virtual Vector arm_means(const ContextEvent& event) const;
  virtual const GroundTruth* ground_truth() const { return nullptr; }
};

// 4Cliques-style environment: ground truth on the clean clique graph,
// algorithms see the noisy graph.
class CliqueEnvironment final : public Environment {
 public:
  CliqueEnvironment(GroundTruth gt, UserGraph noisy_graph, int set_size);

  int num_users() const override { return gt_.num_nodes(); }
  Index context_dim() const override { return gt_.dim(); }
  const UserGraph& graph() const override { return graph_; }
  ContextEvent draw_event(std::uint64_t seed, long t) const override;
  Vector arm_payoffs(std::uint64_t seed, const ContextEvent& event) const override;
  bool has_ground_truth() const override { return true; }
  Vector arm_means(const ContextEvent& event) const override;
  const GroundTruth* ground_truth() const override { return &gt_; }

 private:
  GroundTruth gt_;
  UserGraph graph_;
  int set_size_;
};

// Catalogue environment over a loaded dataset; payoffs are the 0/1 records.
class DatasetEnvironment final : public Environment {
 public:
  DatasetEnvironment(const Interactions* data, int set_size);

  int num_users() const override { return data_->num_users(); }
  Index context_dim() const override { return data_->features.cols(); }
  const UserGraph& graph() const override { return data_->graph; }
  ContextEvent draw_event(std::uint64_t seed, long t) const override;
  Vector arm_payoffs(std::uint64_t seed, const ContextEvent& event) const override;

 private:
  const Interactions* data_;
  int set_size_;
};

// --- feature cache -----------------------------------------------------------

// Versioned binary matrix cache keyed by a content hash of the inputs and
// preprocessing parameters.
void write_feature_cache(const std::string& path, const Matrix& features,
                         std::uint64_t content_hash);
std::optional<Matrix> read_feature_cache(const std::string& path, std::uint64_t content_hash);
// reads without validating the hash; returns (matrix, stored hash)
std::optional<std::pair<Matrix, std::uint64_t>> read_feature_cache_any(const std::string& path);
std::uint64_t hash_file(const std::string& path, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace gob
