#pragma once

#include "gob/data.hpp"
#include "gob/eval.hpp"
#include "gob/runner.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace gob {

// Everything one benchmark invocation needs. Flags and config files both
// land here; the resolved copy is echoed into the output directory.
struct ExperimentConfig {
  // dataset
  std::string dataset = "fourcliques";  // fourcliques | hetrec | files
  std::string data_dir;                 // hetrec
  std::string kind;                     // lastfm | delicious
  std::string graph_file, features_file, interactions_file;  // files mode
  int cliques = 4;
  int clique_size = 25;
  Index dim = 25;
  int set_size = 10;
  std::vector<double> graph_noise{0.0};   // expected toggled pairs
  std::vector<double> payoff_noise{0.0};  // uniform noise half-width z

  // algorithms
  std::vector<std::string> algos{"goblin", "linucb-ind", "linucb-sin"};
  std::string partition_file;
  std::uint64_t cluster_seed = 1;

  // confidence policy
  std::string policy = "simplified";  // simplified | theoretical
  std::vector<double> alpha_grid{0.01, 0.03, 0.1, 0.3, 1.0, 3.0};
  double sigma = 0.5;
  double delta = 0.05;
  double norm_bound = 0.0;  // 0 -> derive from ground truth when available

  // execution
  long rounds = 2000;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int workers = 0;  // 0 -> hardware concurrency
  std::string out_dir = "results";
  bool write_csvs = true;
  std::string save_state_dir;

  void validate() const;
  std::string canonical_string() const;
  std::uint64_t fingerprint() const;
};

struct SummaryRow {
  double graph_noise = 0.0;
  double payoff_noise = 0.0;
  std::string algo;
  double alpha = 0.0;         // grid value; 0 for the theoretical policy
  double alpha_scaled = 0.0;  // alpha times the context-norm scale
  std::uint64_t seed = 0;
  long rounds = 0;
  double final_cum_reward = 0.0;
  double final_cum_norm_reward = 0.0;
  double cum_regret = 0.0;  // NaN without ground truth
  double logdet = 0.0;
  long clipped = 0;
  double max_candidate_norm = 0.0;
  double bound_sigma_safe = 0.0;      // Theorem-style bound with sigma = z (NaN if n/a)
  double bound_sigma_variance = 0.0;  // same with sigma = z/sqrt(3)
  double wall_seconds = 0.0;
};

struct SweepResult {
  std::vector<SummaryRow> rows;
  // winning alpha per (graph_noise, payoff_noise, algo) by mean final
  // normalized cumulative reward across seeds
  struct Best {
    double graph_noise, payoff_noise;
    std::string algo;
    double alpha;
    double mean_final_norm_reward;
  };
  std::vector<Best> best;

  double best_mean(const std::string& algo, double gn = 0.0, double zn = 0.0) const;
};

// One full run of one algorithm against one environment stream.
RunRecord run_experiment(const Environment& env, Runner& runner, long rounds, std::uint64_t seed,
                         const std::string& algo_name, std::uint64_t fingerprint);

// Builds the 4Cliques environment for one seed: clean-graph ground truth,
// noise-injected graph handed to the algorithms.
std::unique_ptr<CliqueEnvironment> make_clique_environment(int cliques, int clique_size, Index dim,
                                                           int set_size, double graph_noise,
                                                           double payoff_noise,
                                                           std::uint64_t seed);

// Runs the whole grid (noise cells x algorithms x alphas x seeds) on a
// worker pool. `shared_data` must outlive the call for dataset configs.
SweepResult run_sweep(const ExperimentConfig& cfg, const Interactions* shared_data = nullptr);

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);
void write_best_csv(const std::string& path, const std::vector<SweepResult::Best>& best);
std::vector<SummaryRow> read_summary_csv(const std::string& path);

// atomic write helper (temp file + rename)
void write_file_atomic(const std::string& path, const std::string& content);

// --- special-case equivalences ------------------------------------------------

// Lockstep comparison of two runner configurations on the same seeded
// environment stream: round-for-round choices plus every stored scalar of
// the final states (inverse blocks, bias, weights, logdet).
struct EquivalenceReport {
  long rounds = 0;
  long choice_mismatches = 0;
  double max_state_dev = 0.0;
  bool pass(double tol) const { return choice_mismatches == 0 && max_state_dev <= tol; }
};

// GOB.Lin on the edgeless graph vs one independent model per node.
EquivalenceReport check_goblin_edgeless_equivalence(int n, Index d, long rounds,
                                                    std::uint64_t seed);
// Block variant with singleton clusters vs one independent model per node.
EquivalenceReport check_block_singleton_equivalence(const UserGraph& g, Index d, long rounds,
                                                    std::uint64_t seed);
// Macro variant with one cluster vs the single shared model.
EquivalenceReport check_macro_single_equivalence(const UserGraph& g, Index d, long rounds,
                                                 std::uint64_t seed);
// Block variant vs literal GOB.Lin on the block graph (block extraction).
EquivalenceReport check_block_vs_blockgraph(const UserGraph& g, const Partition& p, Index d,
                                            long rounds, std::uint64_t seed);

// Desk-scale verification suite; prints one line per check and returns the
// number of failures. `inject_fault` corrupts the lift matrix so the
// identity check's failure path stays covered.
int run_verification(std::ostream& out, bool inject_fault = false);

}  // namespace gob
