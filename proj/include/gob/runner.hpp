#pragma once

#include "gob/bandit.hpp"
#include "gob/cluster.hpp"
#include "gob/graph.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gob {

// One round of interaction: the served user and the candidate contexts
// (columns of `candidates`, one d-vector per arm). `items` carries dataset
// item ids when the contexts come from a catalogue; empty for synthetic runs.
struct ContextEvent {
  long t = 0;
  int user = 0;
  Matrix candidates;
  std::vector<int> items;

  int arm_count() const { return static_cast<int>(candidates.cols()); }
};

enum class Algo { GobLin, LinUcbInd, LinUcbSin, GobLinMacro, GobLinBlock };

struct AlgoSpec {
  Algo algo = Algo::GobLin;
  int clusters = 0;  // macro/block only

  std::string name() const;
  static AlgoSpec parse(const std::string& name);  // "goblin", "goblin-macro", ...
};

// A bandit algorithm driving one experiment. Exclusively owned by one run.
class Runner {
 public:
  virtual ~Runner() = default;

  virtual int choose(const ContextEvent& event) = 0;
  virtual void feedback(const ContextEvent& event, int arm, double payoff) = 0;
  virtual double logdet() const = 0;  // summed over internal states
  virtual Index model_dim() const = 0;
  virtual void save(std::ostream& out) const = 0;
  virtual void load(std::istream& in) = 0;
};

// Single shared d-dimensional model (LinUCB-SIN), also the m = 1 macro case.
class SingleRunner final : public Runner {
 public:
  SingleRunner(Index dim, ConfidencePolicy policy);
  int choose(const ContextEvent& event) override;
  void feedback(const ContextEvent& event, int arm, double payoff) override;
  double logdet() const override { return state_.logdet(); }
  Index model_dim() const override { return state_.dim(); }
  void save(std::ostream& out) const override;
  void load(std::istream& in) override;

  const BanditState& state() const { return state_; }

 private:
  ConfidencePolicy policy_;
  BanditState state_;
  std::optional<Selection> last_;
  long last_t_ = -1;
};

// One independent d-dimensional model per node (LinUCB-IND).
class PerNodeRunner final : public Runner {
 public:
  PerNodeRunner(int nodes, Index dim, ConfidencePolicy policy);
  int choose(const ContextEvent& event) override;
  void feedback(const ContextEvent& event, int arm, double payoff) override;
  double logdet() const override;
  Index model_dim() const override;
  void save(std::ostream& out) const override;
  void load(std::istream& in) override;

  const std::vector<BanditState>& states() const { return states_; }

 private:
  ConfidencePolicy policy_;
  std::vector<BanditState> states_;
  std::optional<Selection> last_;
  long last_t_ = -1;
};

// The Laplacian-sharing bandit: one dn-dimensional model over the whole
// graph; candidates are lifted through A^{-1/2} before selection and update.
class GobLinRunner final : public Runner {
 public:
  GobLinRunner(const UserGraph& g, Index dim, ConfidencePolicy policy);
  int choose(const ContextEvent& event) override;
  void feedback(const ContextEvent& event, int arm, double payoff) override;
  double logdet() const override { return state_.logdet(); }
  Index model_dim() const override { return state_.dim(); }
  void save(std::ostream& out) const override;
  void load(std::istream& in) override;

  const BanditState& state() const { return state_; }
  const SharingTransform& transform() const { return transform_; }
  Index context_dim() const { return dim_; }

 private:
  ConfidencePolicy policy_;
  SharingTransform transform_;
  Index dim_;
  BanditState state_;
  std::optional<Selection> last_;
  long last_t_ = -1;
};

// GOB.Lin on the cluster macro graph; users are routed to their macro node.
class MacroRunner final : public Runner {
 public:
  MacroRunner(const UserGraph& g, const Partition& p, Index dim, ConfidencePolicy policy);
  int choose(const ContextEvent& event) override;
  void feedback(const ContextEvent& event, int arm, double payoff) override;
  double logdet() const override { return inner_->logdet(); }
  Index model_dim() const override { return inner_->model_dim(); }
  void save(std::ostream& out) const override;
  void load(std::istream& in) override;

  const GobLinRunner& inner() const { return *inner_; }
  const std::vector<int>& node_map() const { return node_map_; }

 private:
  std::vector<int> node_map_;
  std::unique_ptr<GobLinRunner> inner_;
};

// GOB.Lin on the block graph, stored as independent per-cluster instances
// (mathematically identical, quadratically cheaper).
class BlockRunner final : public Runner {
 public:
  BlockRunner(const UserGraph& g, const Partition& p, Index dim, ConfidencePolicy policy);
  int choose(const ContextEvent& event) override;
  void feedback(const ContextEvent& event, int arm, double payoff) override;
  double logdet() const override;
  Index model_dim() const override;
  void save(std::ostream& out) const override;
  void load(std::istream& in) override;

  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const GobLinRunner& block(int c) const { return *blocks_[static_cast<std::size_t>(c)]; }
  const std::vector<int>& cluster_nodes(int c) const {
    return members_[static_cast<std::size_t>(c)];
  }

 private:
  std::vector<int> cluster_of_;
  std::vector<int> local_index_;
  std::vector<std::vector<int>> members_;
  std::vector<std::unique_ptr<GobLinRunner>> blocks_;
};

// Builds the runner for a configuration. Macro/block configurations cluster
// with `spectral_cluster(g, spec.clusters, cluster_seed)` unless an explicit
// partition is supplied.
std::unique_ptr<Runner> make_runner(const AlgoSpec& spec, const UserGraph& g, Index dim,
                                    const ConfidencePolicy& policy, std::uint64_t cluster_seed = 1,
                                    const Partition* partition = nullptr);

void save_runner(const std::string& path, const Runner& runner);
void load_runner(const std::string& path, Runner& runner);

}  // namespace gob
