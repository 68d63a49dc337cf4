#include "gob/harness.hpp"

#include "gob/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace gob {

namespace {

std::string fmt(double v, const char* spec = "%.17g") {
  if (std::isnan(v)) return "";
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string fmt_short(double v) { return fmt(v, "%g"); }

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void ExperimentConfig::validate() const {
  if (rounds < 1) throw std::invalid_argument("config: rounds must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("config: need at least one seed");
  if (set_size < 1) throw std::invalid_argument("config: set_size must be >= 1");
  if (dim < 1) throw std::invalid_argument("config: dim must be >= 1");
  if (algos.empty()) throw std::invalid_argument("config: need at least one algorithm");
  for (const std::string& a : algos) AlgoSpec::parse(a);  // throws on bad names
  if (dataset != "fourcliques" && dataset != "hetrec" && dataset != "files")
    throw std::invalid_argument("config: unknown dataset '" + dataset + "'");
  if (dataset == "hetrec" && (data_dir.empty() || kind.empty()))
    throw std::invalid_argument("config: hetrec dataset needs data_dir and kind");
  if (dataset == "files" && (graph_file.empty() || features_file.empty() || interactions_file.empty()))
    throw std::invalid_argument("config: files dataset needs graph/features/interactions paths");
  if (policy != "simplified" && policy != "theoretical")
    throw std::invalid_argument("config: policy must be simplified or theoretical");
  if (policy == "simplified") {
    if (alpha_grid.empty()) throw std::invalid_argument("config: empty alpha grid");
    for (double a : alpha_grid)
      if (!(a > 0.0)) throw std::invalid_argument("config: alpha grid values must be > 0");
  } else {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("config: delta must be in (0,1)");
    if (sigma < 0.0) throw std::invalid_argument("config: sigma must be >= 0");
    if (dataset != "fourcliques" && norm_bound <= 0.0)
      throw std::invalid_argument("config: theoretical policy on real data needs --norm-bound");
    for (const std::string& a : algos) {
      const AlgoSpec spec = AlgoSpec::parse(a);
      if ((spec.algo == Algo::GobLinMacro || spec.algo == Algo::GobLinBlock) && norm_bound <= 0.0)
        throw std::invalid_argument("config: theoretical macro/block runs need --norm-bound");
    }
  }
  if (dataset != "fourcliques") {
    for (double gn : graph_noise)
      if (gn != 0.0) throw std::invalid_argument("config: graph noise applies to fourcliques only");
    for (double zn : payoff_noise)
      if (zn != 0.0) throw std::invalid_argument("config: payoff noise applies to fourcliques only");
  }
  for (double gn : graph_noise)
    if (gn < 0.0) throw std::invalid_argument("config: graph noise must be >= 0");
  for (double zn : payoff_noise)
    if (zn < 0.0) throw std::invalid_argument("config: payoff noise must be >= 0");
  if (graph_noise.empty() || payoff_noise.empty())
    throw std::invalid_argument("config: noise grids must be non-empty");
  if (out_dir.empty()) throw std::invalid_argument("config: out_dir must be set");
}

std::string ExperimentConfig::canonical_string() const {
  std::ostringstream out;
  out << "dataset=" << dataset << "\n";
  out << "data_dir=" << data_dir << "\nkind=" << kind << "\n";
  out << "graph_file=" << graph_file << "\nfeatures_file=" << features_file
      << "\ninteractions_file=" << interactions_file << "\n";
  out << "cliques=" << cliques << "\nclique_size=" << clique_size << "\ndim=" << dim
      << "\nset_size=" << set_size << "\n";
  out << "graph_noise=";
  for (double g : graph_noise) out << fmt_short(g) << ",";
  out << "\npayoff_noise=";
  for (double z : payoff_noise) out << fmt_short(z) << ",";
  out << "\nalgos=";
  for (const auto& a : algos) out << a << ",";
  out << "\npartition_file=" << partition_file << "\ncluster_seed=" << cluster_seed << "\n";
  out << "policy=" << policy << "\nalpha_grid=";
  for (double a : alpha_grid) out << fmt_short(a) << ",";
  out << "\nsigma=" << fmt_short(sigma) << "\ndelta=" << fmt_short(delta) << "\nnorm_bound="
      << fmt_short(norm_bound) << "\n";
  out << "rounds=" << rounds << "\nseeds=";
  for (auto s : seeds) out << s << ",";
  out << "\n";
  return out.str();
}

std::uint64_t ExperimentConfig::fingerprint() const { return rng::fnv1a(canonical_string()); }

RunRecord run_experiment(const Environment& env, Runner& runner, long rounds, std::uint64_t seed,
                         const std::string& algo_name, std::uint64_t fingerprint) {
  RunRecord record;
  record.algo = algo_name;
  record.seed = seed;
  record.config_fingerprint = fingerprint;
  record.rows.reserve(static_cast<std::size_t>(rounds));

  for (long t = 1; t <= rounds; ++t) {
    ContextEvent ev = env.draw_event(seed, t);
    for (Index k = 0; k < ev.candidates.cols(); ++k)
      record.max_candidate_norm = std::max(record.max_candidate_norm, ev.candidates.col(k).norm());

    const int arm = runner.choose(ev);

    Vector payoffs = env.arm_payoffs(seed, ev);
    for (Index k = 0; k < payoffs.size(); ++k) {
      const double clipped = std::clamp(payoffs[k], -1.0, 1.0);
      if (clipped != payoffs[k] && static_cast<int>(k) == arm) ++record.clipped_payoffs;
      payoffs[k] = clipped;
    }

    runner.feedback(ev, arm, payoffs[arm]);

    RunRow row;
    row.t = t;
    row.user = ev.user;
    row.chosen = arm;
    row.payoff = payoffs[arm];
    row.baseline = payoffs.mean();
    if (env.has_ground_truth()) {
      const Vector means = env.arm_means(ev);
      row.regret = means.maxCoeff() - means[arm];
    } else {
      row.regret = kNan;
    }
    row.logdet = runner.logdet();
    record.append(row);
  }
  return record;
}

std::unique_ptr<CliqueEnvironment> make_clique_environment(int cliques, int clique_size, Index dim,
                                                           int set_size, double graph_noise,
                                                           double payoff_noise,
                                                           std::uint64_t seed) {
  GroundTruth gt = synth_ground_truth(cliques, clique_size, dim, seed, payoff_noise);
  UserGraph clean = make_4cliques(cliques, clique_size);
  UserGraph noisy =
      graph_noise > 0.0 ? inject_graph_noise(clean, graph_noise, seed) : std::move(clean);
  return std::make_unique<CliqueEnvironment>(std::move(gt), std::move(noisy), set_size);
}

namespace {

struct Job {
  double graph_noise = 0.0;
  double payoff_noise = 0.0;
  AlgoSpec algo;
  double alpha = 0.0;  // grid value, 0 for theoretical
  std::uint64_t seed = 0;
};

std::string run_name(const ExperimentConfig& cfg, const Job& job) {
  std::ostringstream name;
  if (cfg.dataset == "fourcliques")
    name << "gn" << fmt_short(job.graph_noise) << "_zn" << fmt_short(job.payoff_noise) << "_";
  name << job.algo.name() << "_";
  if (cfg.policy == "simplified")
    name << "a" << fmt_short(job.alpha) << "_";
  else
    name << "theo_";
  name << "seed" << job.seed;
  return name.str();
}

double context_scale(const ExperimentConfig& cfg, const Interactions* data) {
  if (cfg.dataset == "fourcliques") return 1.0;  // unit-norm synthetic contexts
  double scale = 0.0;
  for (Index i = 0; i < data->features.rows(); ++i)
    scale = std::max(scale, data->features.row(i).norm());
  return scale > 0.0 ? scale : 1.0;
}

double auto_norm_bound(const AlgoSpec& spec, const GroundTruth& gt, const UserGraph& g) {
  switch (spec.algo) {
    case Algo::GobLin:
      return std::sqrt(multitask_norm(gt, g));
    case Algo::LinUcbInd:
    case Algo::LinUcbSin: {
      double best = 0.0;
      for (Index i = 0; i < gt.vectors.cols(); ++i)
        best = std::max(best, gt.vectors.col(i).norm());
      return best;
    }
    default:
      throw std::invalid_argument("auto norm bound unsupported for clustered variants");
  }
}

SummaryRow execute_job(const ExperimentConfig& cfg, const Job& job, const Interactions* data,
                       double scale) {
  const auto t0 = std::chrono::steady_clock::now();

  std::unique_ptr<Environment> owned_env;
  const Environment* env = nullptr;
  std::unique_ptr<DatasetEnvironment> data_env;
  if (cfg.dataset == "fourcliques") {
    owned_env = make_clique_environment(cfg.cliques, cfg.clique_size, cfg.dim, cfg.set_size,
                                        job.graph_noise, job.payoff_noise, job.seed);
    env = owned_env.get();
  } else {
    data_env = std::make_unique<DatasetEnvironment>(data, cfg.set_size);
    env = data_env.get();
  }

  ConfidencePolicy policy = ConfidencePolicy::simplified(1.0);
  if (cfg.policy == "simplified") {
    policy = ConfidencePolicy::simplified(job.alpha * scale);
  } else {
    double bound = cfg.norm_bound;
    if (bound <= 0.0)
      bound = auto_norm_bound(job.algo, *env->ground_truth(), env->graph());
    policy = ConfidencePolicy::theoretical(cfg.sigma, cfg.delta, bound);
  }

  std::unique_ptr<Partition> partition;
  if (!cfg.partition_file.empty())
    partition = std::make_unique<Partition>(
        read_partition_file(cfg.partition_file, env->graph().num_nodes()));

  std::unique_ptr<Runner> runner = make_runner(job.algo, env->graph(), env->context_dim(), policy,
                                               cfg.cluster_seed, partition.get());

  RunRecord record =
      run_experiment(*env, *runner, cfg.rounds, job.seed, job.algo.name(), cfg.fingerprint());

  const std::string name = run_name(cfg, job);
  if (cfg.write_csvs) {
    std::ostringstream csv;
    record.write_csv(csv);
    write_file_atomic(cfg.out_dir + "/" + name + ".csv", csv.str());
  }
  if (!cfg.save_state_dir.empty())
    save_runner(cfg.save_state_dir + "/" + name + ".state", *runner);

  SummaryRow row;
  row.graph_noise = job.graph_noise;
  row.payoff_noise = job.payoff_noise;
  row.algo = job.algo.name();
  row.alpha = job.alpha;
  row.alpha_scaled = cfg.policy == "simplified" ? job.alpha * scale : kNan;
  row.seed = job.seed;
  row.rounds = cfg.rounds;
  row.final_cum_reward = record.final_cum_reward();
  row.final_cum_norm_reward = record.final_cum_norm_reward();
  row.cum_regret = record.cum_regret();
  row.logdet = runner->logdet();
  row.clipped = record.clipped_payoffs;
  row.max_candidate_norm = record.max_candidate_norm;
  row.bound_sigma_safe = kNan;
  row.bound_sigma_variance = kNan;
  if (env->has_ground_truth() && job.algo.algo == Algo::GobLin) {
    const double l = multitask_norm(*env->ground_truth(), env->graph());
    const double b = record.max_candidate_norm;
    const double z = job.payoff_noise;
    if (runner->logdet() > 0.0) {
      row.bound_sigma_safe = theorem1_bound(cfg.rounds, z, cfg.delta, l, b, runner->logdet());
      row.bound_sigma_variance =
          theorem1_bound(cfg.rounds, z / std::sqrt(3.0), cfg.delta, l, b, runner->logdet());
    }
  }
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& cfg, const Interactions* shared_data) {
  cfg.validate();

  std::unique_ptr<LoadedDataset> loaded;
  const Interactions* data = shared_data;
  if (cfg.dataset == "hetrec" && !data) {
    loaded = std::make_unique<LoadedDataset>(load_hetrec(hetrec_layout(cfg.data_dir, cfg.kind)));
    data = &loaded->data;
  } else if (cfg.dataset == "files" && !data) {
    loaded = std::make_unique<LoadedDataset>();
    loaded->data.graph = read_graph_file(cfg.graph_file);
    auto features = read_feature_cache_any(cfg.features_file);
    if (!features) throw std::runtime_error("cannot read feature cache: " + cfg.features_file);
    loaded->data.features = std::move(features->first);
    // interactions: "users <n>", "items <m>", then user<TAB>item rows
    std::ifstream in(cfg.interactions_file);
    if (!in) throw std::runtime_error("cannot open interactions: " + cfg.interactions_file);
    std::string tag;
    int n = 0;
    long m = 0;
    in >> tag >> n;
    if (tag != "users" || n <= 0) throw std::runtime_error("bad interactions header (users)");
    in >> tag >> m;
    if (tag != "items" || m <= 0) throw std::runtime_error("bad interactions header (items)");
    if (m != loaded->data.features.rows())
      throw std::runtime_error("interactions/item-feature count mismatch");
    if (n != loaded->data.graph.num_nodes())
      throw std::runtime_error("interactions/graph user count mismatch");
    loaded->data.positives.assign(static_cast<std::size_t>(n), {});
    loaded->data.positive_set.assign(static_cast<std::size_t>(n), {});
    int u = 0, item = 0;
    while (in >> u >> item) {
      if (u < 0 || u >= n || item < 0 || item >= m)
        throw std::runtime_error("interaction row out of range");
      loaded->data.positives[static_cast<std::size_t>(u)].push_back(item);
      loaded->data.positive_set[static_cast<std::size_t>(u)].insert(item);
    }
    for (auto& v : loaded->data.positives) std::sort(v.begin(), v.end());
    data = &loaded->data;
  }

  std::filesystem::create_directories(cfg.out_dir);
  if (!cfg.save_state_dir.empty()) std::filesystem::create_directories(cfg.save_state_dir);
  write_file_atomic(cfg.out_dir + "/config.ini", "[run]\n" + cfg.canonical_string());

  const double scale = context_scale(cfg, data);

  std::vector<Job> jobs;
  const std::vector<double> alphas =
      cfg.policy == "simplified" ? cfg.alpha_grid : std::vector<double>{0.0};
  for (double gn : cfg.graph_noise)
    for (double zn : cfg.payoff_noise)
      for (const std::string& algo : cfg.algos)
        for (double alpha : alphas)
          for (std::uint64_t seed : cfg.seeds)
            jobs.push_back({gn, zn, AlgoSpec::parse(algo), alpha, seed});

  std::vector<SummaryRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::string error;

  int workers = cfg.workers > 0 ? cfg.workers
                                : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));

  auto work = [&]() {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        rows[i] = execute_job(cfg, jobs[i], data, scale);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        error = e.what();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (std::thread& th : pool) th.join();
  if (failed.load()) throw std::runtime_error("run failed: " + error);

  SweepResult result;
  result.rows = std::move(rows);
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const SummaryRow& a,
                                                              const SummaryRow& b) {
    return std::tie(a.graph_noise, a.payoff_noise, a.algo, a.alpha, a.seed) <
           std::tie(b.graph_noise, b.payoff_noise, b.algo, b.alpha, b.seed);
  });

  // best alpha per (cell, algo) by mean final normalized cumulative reward
  std::map<std::tuple<double, double, std::string, double>, std::vector<double>> groups;
  for (const SummaryRow& r : result.rows)
    groups[{r.graph_noise, r.payoff_noise, r.algo, r.alpha}].push_back(r.final_cum_norm_reward);
  std::map<std::tuple<double, double, std::string>, SweepResult::Best> best;
  for (const auto& [key, finals] : groups) {
    const auto& [gn, zn, algo, alpha] = key;
    const double mean = mean_stderr(finals).mean;
    auto it = best.find({gn, zn, algo});
    if (it == best.end() || mean > it->second.mean_final_norm_reward)
      best[{gn, zn, algo}] = {gn, zn, algo, alpha, mean};
  }
  for (const auto& [key, b] : best) result.best.push_back(b);

  write_summary_csv(cfg.out_dir + "/summary.csv", result.rows);
  write_best_csv(cfg.out_dir + "/best_alpha.csv", result.best);
  return result;
}

double SweepResult::best_mean(const std::string& algo, double gn, double zn) const {
  for (const Best& b : best)
    if (b.algo == algo && b.graph_noise == gn && b.payoff_noise == zn)
      return b.mean_final_norm_reward;
  throw std::invalid_argument("best_mean: no rows for algorithm " + algo);
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "graph_noise,payoff_noise,algo,alpha,alpha_scaled,seed,rounds,final_cum_reward,"
         "final_cum_norm_reward,cum_regret,logdet,clipped,max_candidate_norm,"
         "bound_sigma_safe,bound_sigma_variance,wall_seconds\n";
  for (const SummaryRow& r : rows) {
    out << fmt_short(r.graph_noise) << ',' << fmt_short(r.payoff_noise) << ',' << r.algo << ','
        << fmt_short(r.alpha) << ',' << fmt(r.alpha_scaled) << ',' << r.seed << ',' << r.rounds
        << ',' << fmt(r.final_cum_reward) << ',' << fmt(r.final_cum_norm_reward) << ','
        << fmt(r.cum_regret) << ',' << fmt(r.logdet) << ',' << r.clipped << ','
        << fmt(r.max_candidate_norm) << ',' << fmt(r.bound_sigma_safe) << ','
        << fmt(r.bound_sigma_variance) << ',' << fmt(r.wall_seconds, "%.3f") << "\n";
  }
  write_file_atomic(path, out.str());
}

void write_best_csv(const std::string& path, const std::vector<SweepResult::Best>& best) {
  std::ostringstream out;
  out << "graph_noise,payoff_noise,algo,alpha,mean_final_norm_reward\n";
  for (const auto& b : best)
    out << fmt_short(b.graph_noise) << ',' << fmt_short(b.payoff_noise) << ',' << b.algo << ','
        << fmt_short(b.alpha) << ',' << fmt(b.mean_final_norm_reward) << "\n";
  write_file_atomic(path, out.str());
}

std::vector<SummaryRow> read_summary_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open summary: " + path);
  std::vector<SummaryRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() < 16) throw std::runtime_error("malformed summary row in " + path);
    SummaryRow r;
    r.graph_noise = std::stod(f[0]);
    r.payoff_noise = std::stod(f[1]);
    r.algo = f[2];
    r.alpha = std::stod(f[3]);
    r.alpha_scaled = f[4].empty() ? kNan : std::stod(f[4]);
    r.seed = std::stoull(f[5]);
    r.rounds = std::stol(f[6]);
    r.final_cum_reward = std::stod(f[7]);
    r.final_cum_norm_reward = std::stod(f[8]);
    r.cum_regret = f[9].empty() ? kNan : std::stod(f[9]);
    r.logdet = std::stod(f[10]);
    r.clipped = std::stol(f[11]);
    r.max_candidate_norm = std::stod(f[12]);
    r.bound_sigma_safe = f[13].empty() ? kNan : std::stod(f[13]);
    r.bound_sigma_variance = f[14].empty() ? kNan : std::stod(f[14]);
    r.wall_seconds = std::stod(f[15]);
    rows.push_back(r);
  }
  return rows;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot move " + tmp + " into place");
}

// --- special-case equivalences -------------------------------------------------

namespace {

// drives both runners through the identical event stream; each one receives
// the payoff of its own chosen arm
EquivalenceReport lockstep(const Environment& env, Runner& a, Runner& b, long rounds,
                           std::uint64_t seed) {
  EquivalenceReport report;
  report.rounds = rounds;
  for (long t = 1; t <= rounds; ++t) {
    const ContextEvent ev = env.draw_event(seed, t);
    const int ka = a.choose(ev);
    const int kb = b.choose(ev);
    if (ka != kb) ++report.choice_mismatches;
    Vector payoffs = env.arm_payoffs(seed, ev);
    for (Index k = 0; k < payoffs.size(); ++k) payoffs[k] = std::clamp(payoffs[k], -1.0, 1.0);
    a.feedback(ev, ka, payoffs[ka]);
    b.feedback(ev, kb, payoffs[kb]);
  }
  return report;
}

double max_abs(const Matrix& m) { return m.size() > 0 ? m.cwiseAbs().maxCoeff() : 0.0; }

// deviation between a dn-dimensional GOB.Lin state and per-node d-dimensional
// states laid out block-wise (off-diagonal blocks compared against zero)
double block_state_deviation(const BanditState& big, const std::vector<const BanditState*>& parts) {
  const int n = static_cast<int>(parts.size());
  const Index d = parts.empty() ? 0 : parts[0]->dim();
  double dev = 0.0;
  const Matrix inv = big.inverse().matrix();
  double logdet_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const BanditState& s = *parts[static_cast<std::size_t>(i)];
    logdet_sum += s.logdet();
    dev = std::max(dev, max_abs(inv.block(i * d, i * d, d, d) - s.inverse().matrix()));
    dev = std::max(dev, max_abs(big.bias().segment(i * d, d) - s.bias()));
    dev = std::max(dev, max_abs(big.weights().segment(i * d, d) - s.weights()));
    for (int j = 0; j < n; ++j)
      if (j != i) dev = std::max(dev, max_abs(inv.block(i * d, j * d, d, d)));
  }
  dev = std::max(dev, std::abs(big.logdet() - logdet_sum));
  return dev;
}

std::unique_ptr<CliqueEnvironment> equivalence_environment(const UserGraph& g, Index d,
                                                           std::uint64_t seed) {
  // one distinct target vector per node, moderate payoff noise
  GroundTruth gt = synth_ground_truth(g.num_nodes(), 1, d, seed, 0.25);
  return std::make_unique<CliqueEnvironment>(std::move(gt), g, 5);
}

ConfidencePolicy equivalence_policy() { return ConfidencePolicy::simplified(0.3); }

}  // namespace

EquivalenceReport check_goblin_edgeless_equivalence(int n, Index d, long rounds,
                                                    std::uint64_t seed) {
  const UserGraph edgeless(n);
  auto env = equivalence_environment(edgeless, d, seed);
  GobLinRunner goblin(edgeless, d, equivalence_policy());
  PerNodeRunner ind(n, d, equivalence_policy());
  EquivalenceReport report = lockstep(*env, goblin, ind, rounds, seed);
  std::vector<const BanditState*> parts;
  for (const BanditState& s : ind.states()) parts.push_back(&s);
  report.max_state_dev = block_state_deviation(goblin.state(), parts);
  return report;
}

EquivalenceReport check_block_singleton_equivalence(const UserGraph& g, Index d, long rounds,
                                                    std::uint64_t seed) {
  auto env = equivalence_environment(g, d, seed);
  BlockRunner block(g, Partition::singletons(g.num_nodes()), d, equivalence_policy());
  PerNodeRunner ind(g.num_nodes(), d, equivalence_policy());
  EquivalenceReport report = lockstep(*env, block, ind, rounds, seed);
  for (int c = 0; c < block.num_blocks(); ++c) {
    const int node = block.cluster_nodes(c).front();
    std::vector<const BanditState*> part{&ind.states()[static_cast<std::size_t>(node)]};
    report.max_state_dev =
        std::max(report.max_state_dev, block_state_deviation(block.block(c).state(), part));
  }
  return report;
}

EquivalenceReport check_macro_single_equivalence(const UserGraph& g, Index d, long rounds,
                                                 std::uint64_t seed) {
  auto env = equivalence_environment(g, d, seed);
  MacroRunner macro(g, Partition::single_cluster(g.num_nodes()), d, equivalence_policy());
  SingleRunner sin(d, equivalence_policy());
  EquivalenceReport report = lockstep(*env, macro, sin, rounds, seed);
  std::vector<const BanditState*> part{&sin.state()};
  report.max_state_dev = block_state_deviation(macro.inner().state(), part);
  return report;
}

EquivalenceReport check_block_vs_blockgraph(const UserGraph& g, const Partition& p, Index d,
                                            long rounds, std::uint64_t seed) {
  auto env = equivalence_environment(g, d, seed);
  BlockRunner block(g, p, d, equivalence_policy());
  GobLinRunner full(block_graph(g, p), d, equivalence_policy());
  EquivalenceReport report = lockstep(*env, block, full, rounds, seed);

  // map the full dn-dimensional state onto the per-cluster instances
  const Matrix inv = full.state().inverse().matrix();
  double dev = 0.0;
  double logdet_sum = 0.0;
  for (int c = 0; c < block.num_blocks(); ++c) {
    const BanditState& s = block.block(c).state();
    logdet_sum += s.logdet();
    const auto& nodes = block.cluster_nodes(c);
    const Index nc = static_cast<Index>(nodes.size());
    Matrix sub(nc * d, nc * d);
    Vector bias(nc * d), weights(nc * d);
    for (Index a = 0; a < nc; ++a) {
      bias.segment(a * d, d) = full.state().bias().segment(nodes[static_cast<std::size_t>(a)] * d, d);
      weights.segment(a * d, d) =
          full.state().weights().segment(nodes[static_cast<std::size_t>(a)] * d, d);
      for (Index b = 0; b < nc; ++b)
        sub.block(a * d, b * d, d, d) =
            inv.block(nodes[static_cast<std::size_t>(a)] * d, nodes[static_cast<std::size_t>(b)] * d, d, d);
    }
    dev = std::max(dev, max_abs(sub - s.inverse().matrix()));
    dev = std::max(dev, max_abs(bias - s.bias()));
    dev = std::max(dev, max_abs(weights - s.weights()));
  }
  dev = std::max(dev, std::abs(full.state().logdet() - logdet_sum));
  report.max_state_dev = dev;
  return report;
}

// --- verification suite ----------------------------------------------------------

namespace {

struct Verifier {
  std::ostream& out;
  int failures = 0;

  void check(const std::string& name, bool ok, const std::string& detail) {
    out << (ok ? "[ok]   " : "[FAIL] ") << name;
    if (!detail.empty()) out << " - " << detail;
    out << "\n";
    if (!ok) ++failures;
  }
};

}  // namespace

int run_verification(std::ostream& out, bool inject_fault) {
  Verifier v{out};
  auto gen = rng::make_stream(20240, rng::Stream::Generic);

  {  // symmetric eigensolver reconstruction
    Matrix r = Matrix::Random(8, 8);
    Matrix spd = r * r.transpose() + 8.0 * Matrix::Identity(8, 8);
    auto d = linalg::eigh(spd);
    const double err =
        (d.eigenvectors * d.eigenvalues.asDiagonal() * d.eigenvectors.transpose() - spd)
            .cwiseAbs()
            .maxCoeff();
    v.check("eigh reconstruction (8x8 spd)", err <= 1e-10 * spd.norm(),
            "max error " + fmt(err, "%.2e"));
  }
  {  // inverse square root, triangle closed form
    SharingTransform st(make_4cliques(1, 3));
    const double dev = std::max(std::abs(st.a_inv_sqrt()(0, 0) - 2.0 / 3.0),
                                std::abs(st.a_inv_sqrt()(0, 1) - 1.0 / 6.0));
    v.check("inverse sqrt of triangle A", dev <= 1e-12, "max deviation " + fmt(dev, "%.2e"));
  }
  {  // incremental inverse vs direct inversion, logdet telescoping
    const Index dim = 10;
    linalg::IncrementalInversed inc(dim);
    Matrix m = Matrix::Identity(dim, dim);
    double telescoped = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Vector x = rng::unit_vector(gen, dim);
      telescoped += inc.rank_one_update(x);
      m.noalias() += x * x.transpose();
    }
    const double inv_err = (inc.matrix() - m.inverse()).cwiseAbs().maxCoeff();
    const double logdet_err = std::abs(inc.logdet() - std::log(m.determinant()));
    const double tel_err = std::abs(inc.logdet() - telescoped);
    v.check("incremental inverse oracle (1000 updates, dim 10)",
            inv_err <= 1e-8 && logdet_err <= 1e-6,
            "inverse " + fmt(inv_err, "%.2e") + ", logdet " + fmt(logdet_err, "%.2e"));
    v.check("logdet telescoping", tel_err <= 1e-6, "error " + fmt(tel_err, "%.2e"));
  }
  {  // laplacian row sums and PSD on a noisy graph
    UserGraph g = inject_graph_noise(make_4cliques(2, 6), 10.0, 7);
    const Matrix l = laplacian(g);
    const double rowsum = l.rowwise().sum().cwiseAbs().maxCoeff();
    const double lmin = linalg::eigh(l).eigenvalues.minCoeff();
    v.check("laplacian row sums and PSD", rowsum <= 1e-12 && lmin >= -1e-10,
            "max row sum " + fmt(rowsum, "%.2e") + ", min eigenvalue " + fmt(lmin, "%.2e"));
  }
  {  // lifted norm equals (A^{-1})_ii
    UserGraph g = inject_graph_noise(make_4cliques(3, 5), 12.0, 11);
    SharingTransform st(g);
    const Matrix a_inv = st.a().inverse();
    double dev = 0.0;
    for (int i = 0; i < g.num_nodes(); ++i) {
      const Vector x = rng::unit_vector(gen, 4);
      dev = std::max(dev,
                     std::abs(st.lift_context(i, x).squaredNorm() - a_inv(i, i)));
    }
    v.check("lifted norm matches (A^-1)_ii", dev <= 1e-10, "max deviation " + fmt(dev, "%.2e"));
  }
  {  // graph-noise involution
    UserGraph g = make_4cliques(2, 8);
    UserGraph once = inject_graph_noise(g, 20.0, 99);
    UserGraph twice = inject_graph_noise(once, 20.0, 99);
    bool same = twice.num_edges() == g.num_edges();
    if (same)
      for (const Edge& e : g.edges()) same = same && twice.has_edge(e.i, e.j);
    v.check("graph noise involution (same seed twice)", same, "");
  }
  {  // appendix identities over random instances
    auto pick = rng::make_stream(5150, rng::Stream::Generic);
    std::uniform_int_distribution<int> nodes(2, 30), dims(1, 10), extra(0, 40);
    int failures = 0;
    double max_a = 0.0, max_c = 0.0;
    std::string first;
    for (int k = 0; k < 100; ++k) {
      const int n = nodes(pick);
      const Index d = dims(pick);
      UserGraph g(n);
      const double pairs = n * (n - 1) / 2.0;
      UserGraph noisy =
          inject_graph_noise(g, std::min(pairs, static_cast<double>(extra(pick))), 1000 + k);
      GroundTruth gt = synth_ground_truth(n, 1, d, 2000 + k);
      IdentityReport rep = identity_checks(gt, noisy, 10, 3000 + k);
      max_a = std::max(max_a, rep.max_err_a);
      max_c = std::max(max_c, rep.max_rel_err_c);
      if (!rep.pass()) {
        ++failures;
        if (first.empty() && !rep.itemized.empty()) first = rep.itemized.front();
      }
    }
    v.check("transform identities on 100 random instances", failures == 0,
            failures == 0 ? "max errors: (a) " + fmt(max_a, "%.2e") + ", (c) " + fmt(max_c, "%.2e")
                          : std::to_string(failures) + " failing instance(s), e.g. " + first);
  }
  if (inject_fault) {  // negative path: a corrupted lift matrix must be caught
    GroundTruth gt = synth_ground_truth(3, 1, 4, 4242);
    IdentityReport rep = identity_checks(gt, make_4cliques(1, 3), 30, 4243, 0.05);
    std::string detail = "corruption not detected";
    if (!rep.pass() && !rep.itemized.empty()) detail = rep.itemized.front();
    v.check("transform identities with injected fault", rep.pass(), detail);
  }
  {  // trace extremes
    TraceReport edgeless = trace_extremes_check(UserGraph(10), 5, 200, 21);
    v.check("trace of M_T, edgeless graph (nd + T)", edgeless.pass(),
            "trace " + fmt(edgeless.trace, "%.9g") + " vs " + fmt(*edgeless.expected, "%.9g"));
    TraceReport complete = trace_extremes_check(make_4cliques(1, 9), 2, 100, 22);
    v.check("trace of M_T, complete graph (nd + 2T/(n+1))", complete.pass(),
            "trace " + fmt(complete.trace, "%.9g") + " vs " + fmt(*complete.expected, "%.9g"));
  }
  {  // equivalence special cases
    EquivalenceReport a = check_goblin_edgeless_equivalence(8, 4, 200, 31);
    v.check("GOB.Lin on edgeless graph == independent models", a.pass(1e-9),
            "choices differ " + std::to_string(a.choice_mismatches) + ", state dev " +
                fmt(a.max_state_dev, "%.2e"));
    EquivalenceReport b =
        check_block_singleton_equivalence(make_4cliques(2, 4), 4, 200, 32);
    v.check("block variant with singleton clusters == independent models", b.pass(1e-9),
            "state dev " + fmt(b.max_state_dev, "%.2e"));
    EquivalenceReport c = check_macro_single_equivalence(make_4cliques(2, 4), 4, 200, 33);
    v.check("macro variant with one cluster == single shared model", c.pass(1e-9),
            "state dev " + fmt(c.max_state_dev, "%.2e"));
  }
  {  // snapshot round-trip
    UserGraph g = make_4cliques(2, 3);
    GobLinRunner runner(g, 3, ConfidencePolicy::simplified(0.5));
    auto env = equivalence_environment(g, 3, 77);
    for (long t = 1; t <= 20; ++t) {
      ContextEvent ev = env->draw_event(77, t);
      const int arm = runner.choose(ev);
      Vector p = env->arm_payoffs(77, ev);
      runner.feedback(ev, arm, std::clamp(p[arm], -1.0, 1.0));
    }
    std::stringstream buffer;
    runner.save(buffer);
    GobLinRunner restored(g, 3, ConfidencePolicy::simplified(0.5));
    restored.load(buffer);
    const bool same = restored.state().equals(runner.state(), 0.0) &&
                      restored.state().updates() == runner.state().updates();
    v.check("state snapshot round-trip is exact", same, "");
  }
  {  // pca retains a planted subspace
    Matrix basis = Matrix::Random(6, 2);
    Matrix coeffs = Matrix::Random(40, 2);
    Matrix rows = coeffs * basis.transpose();
    auto pca = linalg::pca_fit_project(rows, 2);
    Matrix recon = pca.projected * pca.basis.transpose();
    Matrix centered = rows.rowwise() - pca.mean.transpose();
    const double err = (recon - centered).cwiseAbs().maxCoeff();
    v.check("pca reconstructs a rank-2 subspace", err <= 1e-8, "max error " + fmt(err, "%.2e"));
  }

  out << (v.failures == 0 ? "all checks passed\n"
                          : std::to_string(v.failures) + " check(s) failed\n");
  return v.failures;
}

}  // namespace gob
