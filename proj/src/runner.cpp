#include "gob/runner.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gob {

std::string AlgoSpec::name() const {
  switch (algo) {
    case Algo::GobLin:
      return "goblin";
    case Algo::LinUcbInd:
      return "linucb-ind";
    case Algo::LinUcbSin:
      return "linucb-sin";
    case Algo::GobLinMacro:
      return "goblin-macro-m" + std::to_string(clusters);
    case Algo::GobLinBlock:
      return "goblin-block-m" + std::to_string(clusters);
  }
  return "unknown";
}

AlgoSpec AlgoSpec::parse(const std::string& name) {
  auto base_and_m = [&](const std::string& prefix) -> int {
    // "<prefix>" or "<prefix>-m<k>"
    if (name == prefix) return 0;
    const std::string tag = prefix + "-m";
    if (name.rfind(tag, 0) == 0) {
      const int m = std::stoi(name.substr(tag.size()));
      if (m <= 0) throw std::invalid_argument("algorithm spec: bad cluster count in " + name);
      return m;
    }
    return -1;
  };
  if (name == "goblin") return {Algo::GobLin, 0};
  if (name == "linucb-ind") return {Algo::LinUcbInd, 0};
  if (name == "linucb-sin") return {Algo::LinUcbSin, 0};
  if (int m = base_and_m("goblin-macro"); m >= 0) return {Algo::GobLinMacro, m};
  if (int m = base_and_m("goblin-block"); m >= 0) return {Algo::GobLinBlock, m};
  throw std::invalid_argument("unknown algorithm: " + name);
}

namespace {
void check_arm(const ContextEvent& event, int arm) {
  if (arm < 0 || arm >= event.arm_count())
    throw std::invalid_argument("feedback: arm index out of range");
}
}  // namespace

// --- SingleRunner ----------------------------------------------------------

SingleRunner::SingleRunner(Index dim, ConfidencePolicy policy)
    : policy_(policy), state_(dim) {}

int SingleRunner::choose(const ContextEvent& event) {
  last_ = state_.select(policy_, event.candidates, event.t);
  last_t_ = event.t;
  return last_->index;
}

void SingleRunner::feedback(const ContextEvent& event, int arm, double payoff) {
  check_arm(event, arm);
  if (last_ && last_t_ == event.t && last_->index == arm) {
    state_.update(event.candidates.col(arm), payoff, last_->inv_times_v, last_->quad);
  } else {
    state_.update(event.candidates.col(arm), payoff);
  }
  last_.reset();
}

void SingleRunner::save(std::ostream& out) const { state_.save(out); }
void SingleRunner::load(std::istream& in) { state_ = BanditState::load(in); }

// --- PerNodeRunner ---------------------------------------------------------

PerNodeRunner::PerNodeRunner(int nodes, Index dim, ConfidencePolicy policy) : policy_(policy) {
  if (nodes <= 0) throw std::invalid_argument("PerNodeRunner: need at least one node");
  states_.reserve(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) states_.emplace_back(dim);
}

int PerNodeRunner::choose(const ContextEvent& event) {
  last_ = states_.at(static_cast<std::size_t>(event.user)).select(policy_, event.candidates, event.t);
  last_t_ = event.t;
  return last_->index;
}

void PerNodeRunner::feedback(const ContextEvent& event, int arm, double payoff) {
  check_arm(event, arm);
  BanditState& s = states_.at(static_cast<std::size_t>(event.user));
  if (last_ && last_t_ == event.t && last_->index == arm) {
    s.update(event.candidates.col(arm), payoff, last_->inv_times_v, last_->quad);
  } else {
    s.update(event.candidates.col(arm), payoff);
  }
  last_.reset();
}

double PerNodeRunner::logdet() const {
  double sum = 0.0;
  for (const BanditState& s : states_) sum += s.logdet();
  return sum;
}

Index PerNodeRunner::model_dim() const {
  Index total = 0;
  for (const BanditState& s : states_) total += s.dim();
  return total;
}

void PerNodeRunner::save(std::ostream& out) const {
  for (const BanditState& s : states_) s.save(out);
}

void PerNodeRunner::load(std::istream& in) {
  for (BanditState& s : states_) s = BanditState::load(in);
}

// --- GobLinRunner ----------------------------------------------------------

GobLinRunner::GobLinRunner(const UserGraph& g, Index dim, ConfidencePolicy policy)
    : policy_(policy),
      transform_(g),
      dim_(dim),
      state_(static_cast<Index>(g.num_nodes()) * dim) {}

int GobLinRunner::choose(const ContextEvent& event) {
  if (event.candidates.rows() != dim_)
    throw std::invalid_argument("GobLinRunner: context dimension mismatch");
  const int n = transform_.num_nodes();
  if (n == 1) {  // single node: the transform is the identity
    last_ = state_.select(policy_, event.candidates, event.t);
    last_t_ = event.t;
    return last_->index;
  }

  // Every lifted candidate is c (x) x_k with one shared c = A^{-1/2} e_i, so
  // all quadratic forms come from a single d x d contraction of M^{-1}
  // instead of one dn x dn product per candidate:
  //   (c (x) x)' P (c (x) x) = x' [ (c (x) I)' P (c (x) I) ] x.
  const Vector coeff = transform_.a_inv_sqrt().col(event.user);
  const Matrix& inv = state_.inverse().matrix();
  const Index d = dim_;
  // one sequential pass over M^{-1}: each column, viewed as a d x n matrix,
  // folds against c
  Matrix rows(d, inv.cols());
  for (Index col = 0; col < inv.cols(); ++col) {
    Eigen::Map<const Matrix> blocks(inv.col(col).data(), d, n);
    rows.col(col).noalias() = blocks * coeff;
  }
  Matrix contracted = Matrix::Zero(d, d);
  Vector folded_weights = Vector::Zero(d);
  for (int j = 0; j < n; ++j) {
    if (coeff[j] == 0.0) continue;
    contracted.noalias() += coeff[j] * rows.middleCols(static_cast<Index>(j) * d, d);
    folded_weights.noalias() += coeff[j] * state_.weights().segment(static_cast<Index>(j) * d, d);
  }

  const Matrix contracted_times = contracted * event.candidates;  // d x c
  Vector scores(event.arm_count());
  Vector quads(event.arm_count());
  for (Index k = 0; k < event.candidates.cols(); ++k) {
    quads[k] = event.candidates.col(k).dot(contracted_times.col(k));
    scores[k] = folded_weights.dot(event.candidates.col(k)) +
                policy_.bonus(quads[k], state_.logdet(), event.t);
  }

  Selection sel;
  sel.index = argmax_score(scores);
  sel.score = scores[sel.index];
  sel.quad = quads[sel.index];
  sel.inv_times_v = rows.transpose() * event.candidates.col(sel.index);  // P (c (x) x)
  last_ = std::move(sel);
  last_t_ = event.t;
  return last_->index;
}

void GobLinRunner::feedback(const ContextEvent& event, int arm, double payoff) {
  check_arm(event, arm);
  const Vector lifted = transform_.num_nodes() == 1
                            ? Vector(event.candidates.col(arm))
                            : transform_.lift_context(event.user, event.candidates.col(arm));
  if (last_ && last_t_ == event.t && last_->index == arm) {
    state_.update(lifted, payoff, last_->inv_times_v, last_->quad);
  } else {
    state_.update(lifted, payoff);
  }
  last_.reset();
}

void GobLinRunner::save(std::ostream& out) const { state_.save(out); }
void GobLinRunner::load(std::istream& in) { state_ = BanditState::load(in); }

// --- MacroRunner -----------------------------------------------------------

MacroRunner::MacroRunner(const UserGraph& g, const Partition& p, Index dim,
                         ConfidencePolicy policy) {
  MacroGraph mg = macro_graph(g, p);
  node_map_ = mg.node_map;
  inner_ = std::make_unique<GobLinRunner>(mg.graph, dim, policy);
}

int MacroRunner::choose(const ContextEvent& event) {
  ContextEvent routed = event;
  routed.user = node_map_.at(static_cast<std::size_t>(event.user));
  return inner_->choose(routed);
}

void MacroRunner::feedback(const ContextEvent& event, int arm, double payoff) {
  ContextEvent routed = event;
  routed.user = node_map_.at(static_cast<std::size_t>(event.user));
  inner_->feedback(routed, arm, payoff);
}

void MacroRunner::save(std::ostream& out) const { inner_->save(out); }
void MacroRunner::load(std::istream& in) { inner_->load(in); }

// --- BlockRunner -----------------------------------------------------------

BlockRunner::BlockRunner(const UserGraph& g, const Partition& p, Index dim,
                         ConfidencePolicy policy) {
  p.validate(g.num_nodes());
  members_ = p.members();
  cluster_of_ = p.assignment;
  local_index_.assign(static_cast<std::size_t>(g.num_nodes()), -1);
  blocks_.reserve(members_.size());
  for (const auto& nodes : members_) {
    for (int k = 0; k < static_cast<int>(nodes.size()); ++k)
      local_index_[static_cast<std::size_t>(nodes[static_cast<std::size_t>(k)])] = k;
    // the induced subgraph keeps exactly the intra-cluster edges, so the
    // per-cluster instances match GOB.Lin on the block graph
    blocks_.push_back(std::make_unique<GobLinRunner>(induced_subgraph(g, nodes), dim, policy));
  }
}

int BlockRunner::choose(const ContextEvent& event) {
  ContextEvent routed = event;
  routed.user = local_index_.at(static_cast<std::size_t>(event.user));
  return blocks_[static_cast<std::size_t>(cluster_of_.at(static_cast<std::size_t>(event.user)))]
      ->choose(routed);
}

void BlockRunner::feedback(const ContextEvent& event, int arm, double payoff) {
  ContextEvent routed = event;
  routed.user = local_index_.at(static_cast<std::size_t>(event.user));
  blocks_[static_cast<std::size_t>(cluster_of_.at(static_cast<std::size_t>(event.user)))]->feedback(
      routed, arm, payoff);
}

double BlockRunner::logdet() const {
  double sum = 0.0;
  for (const auto& b : blocks_) sum += b->logdet();
  return sum;
}

Index BlockRunner::model_dim() const {
  Index total = 0;
  for (const auto& b : blocks_) total += b->model_dim();
  return total;
}

void BlockRunner::save(std::ostream& out) const {
  for (const auto& b : blocks_) b->save(out);
}

void BlockRunner::load(std::istream& in) {
  for (auto& b : blocks_) b->load(in);
}

// --- factory ---------------------------------------------------------------

std::unique_ptr<Runner> make_runner(const AlgoSpec& spec, const UserGraph& g, Index dim,
                                    const ConfidencePolicy& policy, std::uint64_t cluster_seed,
                                    const Partition* partition) {
  const int n = g.num_nodes();
  auto clustered = [&](int m) -> Partition {
    if (partition) {
      partition->validate(n);
      return *partition;
    }
    if (m < 1 || m > n) throw std::invalid_argument("make_runner: invalid cluster count");
    return spectral_cluster(g, m, cluster_seed);
  };
  switch (spec.algo) {
    case Algo::GobLin:
      return std::make_unique<GobLinRunner>(g, dim, policy);
    case Algo::LinUcbInd:
      return std::make_unique<PerNodeRunner>(n, dim, policy);
    case Algo::LinUcbSin:
      return std::make_unique<SingleRunner>(dim, policy);
    case Algo::GobLinMacro:
      return std::make_unique<MacroRunner>(g, clustered(spec.clusters), dim, policy);
    case Algo::GobLinBlock:
      return std::make_unique<BlockRunner>(g, clustered(spec.clusters), dim, policy);
  }
  throw std::invalid_argument("make_runner: unknown algorithm");
}

void save_runner(const std::string& path, const Runner& runner) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write snapshot: " + tmp);
    runner.save(out);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot move snapshot into place: " + path);
}

void load_runner(const std::string& path, Runner& runner) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot: " + path);
  runner.load(in);
}

}  // namespace gob
