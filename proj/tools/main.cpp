#include "gob/cluster.hpp"
#include "gob/data.hpp"
#include "gob/fixture.hpp"
#include "gob/harness.hpp"
#include "gob/report.hpp"
#include "gob/rng.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerification = 3;

std::string output_dir_default() {
  const char* env = std::getenv("GOB_OUT_DIR");
  return env && *env ? env : "results";
}

struct PrepareArgs {
  std::string data_dir;
  std::string kind = "delicious";
  std::string out_dir;
  std::string demo_dir;  // generate the synthetic bookmark dataset here first
  std::uint64_t demo_seed = 1;
  int pca_dim = 25;
};

int cmd_prepare(const PrepareArgs& args) {
  namespace fs = std::filesystem;
  std::string data_dir = args.data_dir;
  std::string kind = args.kind;
  if (!args.demo_dir.empty()) {
    gob::write_bookmark_fixture(args.demo_dir, gob::FixtureParams{}, args.demo_seed);
    data_dir = args.demo_dir;
    kind = "delicious";
    std::cout << "demo dataset written to " << args.demo_dir << "\n";
  }
  const gob::HetrecFiles files = gob::hetrec_layout(data_dir, kind);

  std::uint64_t hash = gob::rng::fnv1a("prepare-v1");
  hash = gob::hash_file(files.friends, hash);
  hash = gob::hash_file(files.interactions, hash);
  if (files.tags_assignments != files.interactions) hash = gob::hash_file(files.tags_assignments, hash);
  std::ostringstream params;
  params << "min_tag_count=" << files.min_tag_count << ";pca_dim=" << args.pca_dim;
  hash = gob::rng::fnv1a(params.str(), hash);

  fs::create_directories(args.out_dir);
  const std::string features_path = args.out_dir + "/features.bin";
  const std::string graph_path = args.out_dir + "/graph.txt";
  const std::string positives_path = args.out_dir + "/positives.tsv";
  const std::string stats_path = args.out_dir + "/stats.txt";
  if (gob::read_feature_cache(features_path, hash) && fs::exists(graph_path) &&
      fs::exists(positives_path) && fs::exists(stats_path)) {
    std::cout << "cache hit (" << features_path << " matches input hash), nothing to do\n";
    std::ifstream in(stats_path);
    std::cout << in.rdbuf();
    return kExitOk;
  }

  gob::LoadedDataset loaded = gob::load_hetrec(files, args.pca_dim);

  gob::write_graph_file(graph_path, loaded.data.graph);
  gob::write_feature_cache(features_path, loaded.data.features, hash);
  {
    std::ostringstream out;
    out << "users " << loaded.data.num_users() << "\n";
    out << "items " << loaded.data.num_items() << "\n";
    for (int u = 0; u < loaded.data.num_users(); ++u)
      for (int item : loaded.data.positives[static_cast<std::size_t>(u)])
        out << u << "\t" << item << "\n";
    gob::write_file_atomic(positives_path, out.str());
  }
  gob::write_file_atomic(stats_path, loaded.stats.table());
  std::cout << loaded.stats.table();
  std::cout << "prepared artifacts in " << args.out_dir << "\n";
  return kExitOk;
}

void add_run_options(CLI::App* run, gob::ExperimentConfig& cfg) {
  run->set_config("--config", "", "INI config file; command-line flags take precedence");
  run->add_option("--dataset", cfg.dataset, "fourcliques | hetrec | files");
  run->add_option("--data-dir", cfg.data_dir, "HetRec-style dataset directory");
  run->add_option("--kind", cfg.kind, "lastfm | delicious");
  run->add_option("--graph-file", cfg.graph_file, "prepared graph file");
  run->add_option("--features-file", cfg.features_file, "prepared feature cache");
  run->add_option("--interactions-file", cfg.interactions_file, "prepared positives file");
  run->add_option("--cliques", cfg.cliques, "clique count for the synthetic graph");
  run->add_option("--clique-size", cfg.clique_size, "nodes per clique");
  run->add_option("--dim", cfg.dim, "context dimension (synthetic)");
  run->add_option("--set-size", cfg.set_size, "candidate contexts per round");
  run->add_option("--graph-noise", cfg.graph_noise,
                  "expected toggled node pairs; repeat for a grid");
  run->add_option("--payoff-noise", cfg.payoff_noise,
                  "uniform payoff noise half-width z; repeat for a grid");
  run->add_option("--algo", cfg.algos,
                  "goblin | linucb-ind | linucb-sin | goblin-macro-m<k> | goblin-block-m<k>");
  run->add_option("--partition", cfg.partition_file, "partition file overriding clustering");
  run->add_option("--cluster-seed", cfg.cluster_seed, "seed for spectral clustering");
  run->add_option("--policy", cfg.policy, "simplified | theoretical");
  run->add_option("--alpha", cfg.alpha_grid, "alpha grid for the simplified policy");
  run->add_option("--sigma", cfg.sigma, "noise scale for the theoretical policy");
  run->add_option("--delta", cfg.delta, "confidence level for the theoretical policy");
  run->add_option("--norm-bound", cfg.norm_bound,
                  "norm bound for the theoretical policy (0 = derive from ground truth)");
  run->add_option("--rounds,-T", cfg.rounds, "rounds per run");
  run->add_option("--seeds", cfg.seeds, "run seeds");
  run->add_option("--workers", cfg.workers, "parallel runs (0 = hardware)");
  run->add_option("--out", cfg.out_dir, "output directory");
  run->add_flag("!--no-csv", cfg.write_csvs, "skip per-round CSVs");
  run->add_option("--save-state-dir", cfg.save_state_dir, "write final model snapshots here");
}

int cmd_run(const gob::ExperimentConfig& cfg) {
  gob::SweepResult result = gob::run_sweep(cfg);
  std::cout << "wrote " << result.rows.size() << " run(s) to " << cfg.out_dir << "\n";
  for (const auto& b : result.best) {
    std::cout << "best alpha";
    if (cfg.dataset == "fourcliques")
      std::cout << " [graph noise " << b.graph_noise << ", payoff noise " << b.payoff_noise << "]";
    std::cout << " for " << b.algo << ": " << b.alpha
              << " (mean final normalized reward " << b.mean_final_norm_reward << ")\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"networked linear contextual bandits benchmark"};
  app.require_subcommand(1);

  PrepareArgs prep;
  CLI::App* prepare = app.add_subcommand("prepare", "preprocess a dataset into run artifacts");
  prepare->add_option("--data-dir", prep.data_dir, "HetRec-style dataset directory");
  prepare->add_option("--kind", prep.kind, "lastfm | delicious");
  prepare->add_option("--out", prep.out_dir, "artifact output directory")->required();
  prepare->add_option("--demo", prep.demo_dir, "generate the synthetic demo dataset here");
  prepare->add_option("--demo-seed", prep.demo_seed, "seed for the demo dataset");
  prepare->add_option("--pca-dim", prep.pca_dim, "retained principal components");

  gob::ExperimentConfig cfg;
  cfg.out_dir = output_dir_default();
  CLI::App* run = app.add_subcommand("run", "run a bandit experiment sweep");
  add_run_options(run, cfg);

  CLI::App* verify = app.add_subcommand("verify", "run the invariant verification suite");
  bool inject_fault = false;
  verify->add_flag("--inject-fault", inject_fault,
                   "corrupt the sharing transform to exercise the failure path");

  gob::ReportOptions report_options;
  CLI::App* report = app.add_subcommand("report", "aggregate results into CSV and SVG charts");
  report->add_option("--results", report_options.results_dir, "results directory")->required();
  report->add_option("--max-points", report_options.max_points, "points per SVG curve");

  std::string cluster_graph, cluster_out;
  int cluster_m = 4;
  std::uint64_t cluster_seed = 1;
  CLI::App* cluster = app.add_subcommand("cluster", "emit a spectral partition file");
  cluster->add_option("--graph", cluster_graph, "graph file")->required();
  cluster->add_option("--clusters,-m", cluster_m, "number of clusters")->required();
  cluster->add_option("--seed", cluster_seed, "clustering seed");
  cluster->add_option("--out", cluster_out, "partition file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (prepare->parsed()) {
      if (prep.data_dir.empty() && prep.demo_dir.empty())
        throw std::invalid_argument("prepare: need --data-dir or --demo");
      return cmd_prepare(prep);
    }
    if (run->parsed()) {
      cfg.validate();
      return cmd_run(cfg);
    }
    if (verify->parsed()) {
      const int failures = gob::run_verification(std::cout, inject_fault);
      return failures == 0 ? kExitOk : kExitVerification;
    }
    if (report->parsed()) {
      gob::write_report(report_options);
      std::cout << "report written to " << report_options.results_dir << "\n";
      return kExitOk;
    }
    if (cluster->parsed()) {
      const gob::UserGraph g = gob::read_graph_file(cluster_graph);
      const gob::Partition p = gob::spectral_cluster(g, cluster_m, cluster_seed);
      gob::write_partition_file(cluster_out, p);
      std::cout << "partition with " << p.num_clusters << " cluster(s) written to " << cluster_out
                << "\n";
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}
