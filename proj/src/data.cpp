#include "gob/data.hpp"

#include "gob/linalg.hpp"
#include "gob/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace gob {

Vector GroundTruth::stacked() const {
  const Index d = dim();
  Vector u(d * static_cast<Index>(num_nodes()));
  for (int i = 0; i < num_nodes(); ++i) u.segment(static_cast<Index>(i) * d, d) = vectors.col(i);
  return u;
}

GroundTruth synth_ground_truth(int clique_count, int clique_size, Index d, std::uint64_t seed,
                               double noise_half_width) {
  if (clique_count <= 0 || clique_size <= 0 || d < 1)
    throw std::invalid_argument("synth_ground_truth: sizes must be positive");
  auto gen = rng::make_stream(seed, rng::Stream::GroundTruth);
  GroundTruth gt;
  gt.noise_half_width = noise_half_width;
  gt.vectors.resize(d, static_cast<Index>(clique_count) * clique_size);
  for (int c = 0; c < clique_count; ++c) {
    const Vector u = rng::unit_vector(gen, d);
    for (int k = 0; k < clique_size; ++k)
      gt.vectors.col(static_cast<Index>(c) * clique_size + k) = u;
  }
  return gt;
}

double synth_payoff(const GroundTruth& gt, int node, const Vector& x, std::uint64_t seed, long t,
                    int arm) {
  if (node < 0 || node >= gt.num_nodes())
    throw std::invalid_argument("synth_payoff: node out of range");
  double eps = 0.0;
  if (gt.noise_half_width > 0.0) {
    auto gen = rng::make_stream(seed, static_cast<std::uint64_t>(t), rng::Stream::PayoffNoise);
    std::uniform_real_distribution<double> unif(-gt.noise_half_width, gt.noise_half_width);
    for (int k = 0; k < arm; ++k) unif(gen);  // one draw per arm, in arm order
    eps = unif(gen);
  }
  return gt.vectors.col(node).dot(x) + eps;
}

std::vector<std::string> split_tags(const std::string& raw) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : raw) {
    if (c == '_' || c == '-' || c == '\'') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

ItemFeaturesReport build_item_features(const std::vector<TagAssignment>& assignments,
                                       int item_count, int min_tag_count, Index pca_dim) {
  if (item_count < 2) throw std::invalid_argument("build_item_features: need at least 2 items");
  ItemFeaturesReport report;

  // split into word-level assignments and count corpus occurrences
  std::set<std::string> raw_tags;
  std::unordered_map<std::string, long> word_count;
  std::vector<std::pair<int, std::string>> words;
  words.reserve(assignments.size());
  for (const TagAssignment& a : assignments) {
    if (a.item < 0 || a.item >= item_count)
      throw std::invalid_argument("build_item_features: item id out of range");
    raw_tags.insert(a.tag);
    for (std::string& w : split_tags(a.tag)) {
      ++word_count[w];
      words.emplace_back(a.item, std::move(w));
    }
  }
  report.unique_tags_raw = static_cast<int>(raw_tags.size());
  report.unique_tags_split = static_cast<int>(word_count.size());

  // vocabulary of retained words, deterministic (sorted) order
  std::map<std::string, int> vocab;
  for (const auto& [w, count] : word_count)
    if (count >= min_tag_count) vocab.emplace(w, 0);
  int next_id = 0;
  for (auto& [w, id] : vocab) id = next_id++;
  report.tags_kept = next_id;
  const Index vocab_size = next_id;

  // term frequencies per item
  std::vector<std::unordered_map<int, double>> tf(static_cast<std::size_t>(item_count));
  for (const auto& [item, w] : words) {
    auto it = vocab.find(w);
    if (it != vocab.end()) tf[static_cast<std::size_t>(item)][it->second] += 1.0;
  }

  // document frequencies and idf = ln(items / df)
  Vector idf = Vector::Zero(vocab_size);
  for (const auto& item_tf : tf)
    for (const auto& [word_id, count] : item_tf) idf[word_id] += 1.0;
  for (Index w = 0; w < vocab_size; ++w)
    idf[w] = idf[w] > 0.0 ? std::log(static_cast<double>(item_count) / idf[w]) : 0.0;

  // sparse L2-normalized tf-idf rows
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(item_count));
  for (int i = 0; i < item_count; ++i) {
    double norm2 = 0.0;
    auto& row = rows[static_cast<std::size_t>(i)];
    for (const auto& [word_id, count] : tf[static_cast<std::size_t>(i)]) {
      const double v = count * idf[word_id];
      if (v != 0.0) {
        row.emplace_back(word_id, v);
        norm2 += v * v;
      }
    }
    std::sort(row.begin(), row.end());
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (auto& [word_id, v] : row) v *= inv;
    }
    if (row.empty()) ++report.items_without_tags;
  }

  report.features = Matrix::Zero(item_count, pca_dim);
  if (vocab_size == 0) return report;  // degenerate corpus: all-zero features

  // PCA via the vocab x vocab covariance, accumulated from the sparse rows
  Vector mean = Vector::Zero(vocab_size);
  for (const auto& row : rows)
    for (const auto& [w, v] : row) mean[w] += v;
  mean /= static_cast<double>(item_count);

  Matrix second = Matrix::Zero(vocab_size, vocab_size);
  for (const auto& row : rows)
    for (const auto& [wi, vi] : row)
      for (const auto& [wj, vj] : row) second(wi, wj) += vi * vj;
  Matrix cov =
      (second - static_cast<double>(item_count) * mean * mean.transpose()) /
      static_cast<double>(item_count - 1);
  cov = ((cov + cov.transpose()) / 2.0).eval();

  auto decomp = linalg::eigh(cov);
  const Index want = std::min<Index>(pca_dim, vocab_size);
  const double lmax = decomp.eigenvalues[vocab_size - 1];
  const double rank_tol = std::max(1e-12, static_cast<double>(vocab_size) * 1e-14 * std::abs(lmax));
  Index retained = 0;
  while (retained < want && decomp.eigenvalues[vocab_size - 1 - retained] > rank_tol) ++retained;
  report.pca_retained = retained;

  Matrix basis(vocab_size, retained);
  for (Index j = 0; j < retained; ++j) {
    Vector dir = decomp.eigenvectors.col(vocab_size - 1 - j);
    Index imax = 0;
    dir.cwiseAbs().maxCoeff(&imax);
    if (dir[imax] < 0.0) dir = -dir;
    basis.col(j) = dir;
  }

  const Vector mean_proj = basis.transpose() * mean;
  for (int i = 0; i < item_count; ++i) {
    // untagged items keep an all-zero feature row (cold start)
    if (rows[static_cast<std::size_t>(i)].empty()) continue;
    Vector proj = -mean_proj;
    for (const auto& [w, v] : rows[static_cast<std::size_t>(i)]) proj += v * basis.row(w).transpose();
    report.features.row(i).head(retained) = proj.transpose();
  }
  return report;
}

std::string DatasetStats::table() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", avg_degree);
  std::ostringstream out;
  out << "nodes              " << nodes << "\n"
      << "edges              " << edges << "\n"
      << "avg_degree         " << buf << "\n"
      << "items              " << items << "\n"
      << "nonzero_payoffs    " << nonzero_payoffs << "\n"
      << "tags               " << tags << "\n"
      << "tags_after_split   " << tags_split << "\n";
  if (users_dropped_no_positive > 0)
    out << "dropped_users_without_positives " << users_dropped_no_positive << "\n";
  if (users_dropped_disconnected > 0)
    out << "dropped_users_outside_largest_component " << users_dropped_disconnected << "\n";
  if (items_without_tags > 0) out << "items_with_empty_features " << items_without_tags << "\n";
  for (const std::string& n : notes) out << "# " << n << "\n";
  return out.str();
}

HetrecFiles hetrec_layout(const std::string& dir, const std::string& kind) {
  HetrecFiles f;
  if (kind == "lastfm") {
    f.friends = dir + "/user_friends.dat";
    f.interactions = dir + "/user_artists.dat";
    f.tags_assignments = dir + "/user_taggedartists.dat";
    f.tag_names = dir + "/tags.dat";
    f.min_tag_count = 1;
  } else if (kind == "delicious") {
    f.friends = dir + "/user_contacts.dat";
    f.interactions = dir + "/user_taggedbookmarks.dat";
    f.tags_assignments = dir + "/user_taggedbookmarks.dat";
    f.tag_names = dir + "/tags.dat";
    f.min_tag_count = 10;
  } else {
    throw std::invalid_argument("unknown dataset kind: " + kind + " (want lastfm or delicious)");
  }
  return f;
}

namespace {

struct TsvReader {
  std::ifstream in;
  std::string path;
  int line_no = 0;

  explicit TsvReader(const std::string& p) : in(p), path(p) {
    if (!in) throw std::runtime_error("cannot open " + p);
    std::string header;
    std::getline(in, header);  // skip the header row
    line_no = 1;
  }

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields.clear();
      std::istringstream ss(line);
      std::string f;
      while (ss >> f) fields.push_back(f);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
  }

  int to_int(const std::string& s) const {
    try {
      std::size_t pos = 0;
      const int v = std::stoi(s, &pos);
      if (pos != s.size()) fail("malformed integer field '" + s + "'");
      return v;
    } catch (const std::exception&) {
      fail("malformed integer field '" + s + "'");
    }
  }
};

}  // namespace

LoadedDataset load_hetrec(const HetrecFiles& files, Index pca_dim) {
  LoadedDataset out;
  DatasetStats& stats = out.stats;

  // friendship pairs on raw ids, symmetrized
  std::set<std::pair<int, int>> raw_edges;
  std::set<int> raw_users;
  {
    TsvReader reader(files.friends);
    std::vector<std::string> fields;
    while (reader.next(fields)) {
      if (fields.size() < 2) reader.fail("expected 'user<TAB>friend'");
      const int a = reader.to_int(fields[0]), b = reader.to_int(fields[1]);
      raw_users.insert(a);
      raw_users.insert(b);
      if (a != b) raw_edges.insert({std::min(a, b), std::max(a, b)});
    }
  }

  // positive (user, item) pairs
  std::set<std::pair<int, int>> raw_positives;
  std::set<int> raw_items;
  {
    TsvReader reader(files.interactions);
    std::vector<std::string> fields;
    while (reader.next(fields)) {
      if (fields.size() < 2) reader.fail("expected 'user<TAB>item'");
      const int u = reader.to_int(fields[0]), item = reader.to_int(fields[1]);
      raw_users.insert(u);
      raw_items.insert(item);
      raw_positives.insert({u, item});
    }
  }

  // optional tag id -> value map
  std::unordered_map<int, std::string> tag_names;
  if (!files.tag_names.empty()) {
    std::ifstream in(files.tag_names);
    if (in) {
      std::string line;
      std::getline(in, line);  // header
      int line_no = 1;
      while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        int id = 0;
        if (!(ss >> id)) continue;
        std::string value;
        std::getline(ss, value);
        const auto start = value.find_first_not_of(" \t");
        tag_names[id] = (start == std::string::npos) ? std::string() : value.substr(start);
      }
      (void)line_no;
    }
  }

  // tag assignments on raw item ids
  std::vector<std::pair<int, std::string>> raw_assignments;
  {
    TsvReader reader(files.tags_assignments);
    std::vector<std::string> fields;
    while (reader.next(fields)) {
      if (fields.size() < 3) reader.fail("expected 'user<TAB>item<TAB>tag'");
      const int item = reader.to_int(fields[1]);
      raw_items.insert(item);
      std::string tag = fields[2];
      if (!tag_names.empty()) {
        auto it = tag_names.find(reader.to_int(fields[2]));
        if (it == tag_names.end()) reader.fail("tag id without entry in " + files.tag_names);
        tag = it->second;
      }
      raw_assignments.emplace_back(item, std::move(tag));
    }
  }

  // dense item index (sorted raw ids)
  std::unordered_map<int, int> item_index;
  {
    int next = 0;
    for (int raw : raw_items) item_index.emplace(raw, next++);
  }

  std::vector<TagAssignment> assignments;
  assignments.reserve(raw_assignments.size());
  for (auto& [raw_item, tag] : raw_assignments)
    assignments.push_back({item_index.at(raw_item), std::move(tag)});

  const int item_count = static_cast<int>(raw_items.size());
  ItemFeaturesReport features =
      build_item_features(assignments, item_count, files.min_tag_count, pca_dim);

  stats.nodes = static_cast<int>(raw_users.size());
  stats.edges = static_cast<int>(raw_edges.size());
  stats.avg_degree = stats.nodes > 0 ? 2.0 * stats.edges / stats.nodes : 0.0;
  stats.items = item_count;
  stats.nonzero_payoffs = static_cast<long>(raw_positives.size());
  stats.tags = features.unique_tags_raw;
  stats.tags_split = features.unique_tags_split;
  stats.items_without_tags = features.items_without_tags;

  // keep users that have at least one positive item
  std::set<int> users_with_positive;
  for (const auto& [u, item] : raw_positives) users_with_positive.insert(u);
  std::vector<int> kept;
  for (int u : raw_users)
    if (users_with_positive.count(u)) kept.push_back(u);
  stats.users_dropped_no_positive = static_cast<int>(raw_users.size() - kept.size());
  if (kept.empty()) throw std::runtime_error("load_hetrec: no user has a positive item");

  // largest connected component of the kept-user graph
  std::unordered_map<int, int> user_index;
  for (int i = 0; i < static_cast<int>(kept.size()); ++i)
    user_index.emplace(kept[static_cast<std::size_t>(i)], i);
  {
    const int n = static_cast<int>(kept.size());
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& [a, b] : raw_edges) {
      auto ia = user_index.find(a), ib = user_index.find(b);
      if (ia != user_index.end() && ib != user_index.end()) {
        adj[static_cast<std::size_t>(ia->second)].push_back(ib->second);
        adj[static_cast<std::size_t>(ib->second)].push_back(ia->second);
      }
    }
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    int best_comp = -1, best_size = 0, ncomp = 0;
    for (int s = 0; s < n; ++s) {
      if (comp[static_cast<std::size_t>(s)] != -1) continue;
      int size = 0;
      std::vector<int> stack{s};
      comp[static_cast<std::size_t>(s)] = ncomp;
      while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        ++size;
        for (int v : adj[static_cast<std::size_t>(u)])
          if (comp[static_cast<std::size_t>(v)] == -1) {
            comp[static_cast<std::size_t>(v)] = ncomp;
            stack.push_back(v);
          }
      }
      if (size > best_size) {
        best_size = size;
        best_comp = ncomp;
      }
      ++ncomp;
    }
    if (ncomp > 1) {
      std::vector<int> in_component;
      for (int i = 0; i < n; ++i)
        if (comp[static_cast<std::size_t>(i)] == best_comp)
          in_component.push_back(kept[static_cast<std::size_t>(i)]);
      stats.users_dropped_disconnected = n - static_cast<int>(in_component.size());
      stats.notes.push_back("graph was disconnected; restricted to the largest component");
      kept = std::move(in_component);
    }
  }

  // final dense user index
  user_index.clear();
  for (int i = 0; i < static_cast<int>(kept.size()); ++i)
    user_index.emplace(kept[static_cast<std::size_t>(i)], i);

  Interactions& data = out.data;
  data.graph = UserGraph(static_cast<int>(kept.size()));
  {
    std::set<std::pair<int, int>> dense_edges;
    for (const auto& [a, b] : raw_edges) {
      auto ia = user_index.find(a), ib = user_index.find(b);
      if (ia != user_index.end() && ib != user_index.end())
        dense_edges.insert({std::min(ia->second, ib->second), std::max(ia->second, ib->second)});
    }
    for (const auto& [i, j] : dense_edges) data.graph.add_edge(i, j);
  }
  data.features = std::move(features.features);
  data.positives.assign(kept.size(), {});
  data.positive_set.assign(kept.size(), {});
  for (const auto& [u, raw_item] : raw_positives) {
    auto iu = user_index.find(u);
    if (iu == user_index.end()) continue;
    const int item = item_index.at(raw_item);
    data.positives[static_cast<std::size_t>(iu->second)].push_back(item);
    data.positive_set[static_cast<std::size_t>(iu->second)].insert(item);
  }
  for (auto& v : data.positives) std::sort(v.begin(), v.end());
  return out;
}

Interactions subsample_users(const Interactions& data, int count) {
  const int n = data.num_users();
  if (count < 1 || count > n) throw std::invalid_argument("subsample_users: count out of range");
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const Edge& e : data.graph.edges()) {
    adj[static_cast<std::size_t>(e.i)].push_back(e.j);
    adj[static_cast<std::size_t>(e.j)].push_back(e.i);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());

  std::vector<int> order;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<int> queue{0};
  seen[0] = 1;
  for (std::size_t head = 0; head < queue.size() && static_cast<int>(order.size()) < count;
       ++head) {
    const int u = queue[head];
    order.push_back(u);
    for (int v : adj[static_cast<std::size_t>(u)])
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        queue.push_back(v);
      }
  }
  if (static_cast<int>(order.size()) < count)
    throw std::invalid_argument("subsample_users: component smaller than requested count");

  Interactions out;
  out.graph = induced_subgraph(data.graph, order);
  out.features = data.features;
  out.positives.resize(order.size());
  out.positive_set.resize(order.size());
  for (int k = 0; k < count; ++k) {
    const int old = order[static_cast<std::size_t>(k)];
    out.positives[static_cast<std::size_t>(k)] = data.positives[static_cast<std::size_t>(old)];
    out.positive_set[static_cast<std::size_t>(k)] =
        data.positive_set[static_cast<std::size_t>(old)];
  }
  return out;
}

// --- sampling ----------------------------------------------------------------

ContextEvent sample_context_set(const Interactions& inter, long t, int set_size,
                                std::uint64_t seed) {
  const int n = inter.num_users();
  const int items = inter.num_items();
  if (set_size < 1) throw std::invalid_argument("sample_context_set: set_size must be >= 1");
  if (items < set_size) throw std::invalid_argument("sample_context_set: not enough items");

  ContextEvent ev;
  ev.t = t;
  {
    auto gen = rng::make_stream(seed, static_cast<std::uint64_t>(t), rng::Stream::User);
    ev.user = static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(gen));
  }
  const auto& positives = inter.positives[static_cast<std::size_t>(ev.user)];
  if (positives.empty())
    throw std::logic_error("sample_context_set: user without positives survived loading");

  std::vector<int> chosen;
  chosen.reserve(static_cast<std::size_t>(set_size));
  int positive_item = 0;
  {
    auto pos_gen = rng::make_stream(seed, static_cast<std::uint64_t>(t), rng::Stream::Positive);
    positive_item = positives[static_cast<std::size_t>(std::uniform_int_distribution<int>(
        0, static_cast<int>(positives.size()) - 1)(pos_gen))];

    auto gen = rng::make_stream(seed, static_cast<std::uint64_t>(t), rng::Stream::Context);
    std::uniform_int_distribution<int> pick(0, items - 1);
    auto taken = [&](int item) {
      return item == positive_item ||
             std::find(chosen.begin(), chosen.end(), item) != chosen.end();
    };
    // set_size - 1 distinct random picks; the forced positive never collides
    // because colliding picks are simply re-drawn
    while (static_cast<int>(chosen.size()) < set_size - 1) {
      const int item = pick(gen);
      if (!taken(item)) chosen.push_back(item);
    }
    chosen.push_back(positive_item);
  }
  {
    auto gen = rng::make_stream(seed, static_cast<std::uint64_t>(t), rng::Stream::Shuffle);
    for (int i = set_size - 1; i > 0; --i) {
      const int j = static_cast<int>(std::uniform_int_distribution<int>(0, i)(gen));
      std::swap(chosen[static_cast<std::size_t>(i)], chosen[static_cast<std::size_t>(j)]);
    }
  }

  ev.items = chosen;
  ev.candidates.resize(inter.features.cols(), set_size);
  for (int k = 0; k < set_size; ++k)
    ev.candidates.col(k) = inter.features.row(chosen[static_cast<std::size_t>(k)]).transpose();
  return ev;
}

ContextEvent sample_synth_context_set(const GroundTruth& gt, int set_size, std::uint64_t seed,
                                      long t) {
  if (set_size < 1) throw std::invalid_argument("sample_synth_context_set: set_size must be >= 1");
  ContextEvent ev;
  ev.t = t;
  {
    auto gen = rng::make_stream(seed, static_cast<std::uint64_t>(t), rng::Stream::User);
    ev.user = static_cast<int>(
        std::uniform_int_distribution<int>(0, gt.num_nodes() - 1)(gen));
  }
  auto gen = rng::make_stream(seed, static_cast<std::uint64_t>(t), rng::Stream::Context);
  ev.candidates.resize(gt.dim(), set_size);
  for (int k = 0; k < set_size; ++k) ev.candidates.col(k) = rng::unit_vector(gen, gt.dim());
  return ev;
}

// --- environments --------------------------------------------------------------

Vector Environment::arm_means(const ContextEvent&) const {
  throw std::logic_error("arm_means: environment has no ground truth");
}

CliqueEnvironment::CliqueEnvironment(GroundTruth gt, UserGraph noisy_graph, int set_size)
    : gt_(std::move(gt)), graph_(std::move(noisy_graph)), set_size_(set_size) {
  if (graph_.num_nodes() != gt_.num_nodes())
    throw std::invalid_argument("CliqueEnvironment: graph/ground-truth size mismatch");
  if (set_size_ < 1) throw std::invalid_argument("CliqueEnvironment: set_size must be >= 1");
}

ContextEvent CliqueEnvironment::draw_event(std::uint64_t seed, long t) const {
  return sample_synth_context_set(gt_, set_size_, seed, t);
}

Vector CliqueEnvironment::arm_payoffs(std::uint64_t seed, const ContextEvent& event) const {
  Vector out = arm_means(event);
  if (gt_.noise_half_width > 0.0) {
    auto gen =
        rng::make_stream(seed, static_cast<std::uint64_t>(event.t), rng::Stream::PayoffNoise);
    std::uniform_real_distribution<double> unif(-gt_.noise_half_width, gt_.noise_half_width);
    for (Index k = 0; k < out.size(); ++k) out[k] += unif(gen);
  }
  return out;
}

Vector CliqueEnvironment::arm_means(const ContextEvent& event) const {
  return event.candidates.transpose() * gt_.vectors.col(event.user);
}

DatasetEnvironment::DatasetEnvironment(const Interactions* data, int set_size)
    : data_(data), set_size_(set_size) {
  if (!data_) throw std::invalid_argument("DatasetEnvironment: null dataset");
  if (set_size_ < 1 || set_size_ > data_->num_items())
    throw std::invalid_argument("DatasetEnvironment: set_size out of range");
  for (int u = 0; u < data_->num_users(); ++u)
    if (data_->positives[static_cast<std::size_t>(u)].empty())
      throw std::invalid_argument("DatasetEnvironment: user without positives");
}

ContextEvent DatasetEnvironment::draw_event(std::uint64_t seed, long t) const {
  return sample_context_set(*data_, t, set_size_, seed);
}

Vector DatasetEnvironment::arm_payoffs(std::uint64_t, const ContextEvent& event) const {
  Vector out(event.arm_count());
  for (int k = 0; k < event.arm_count(); ++k)
    out[k] = data_->payoff(event.user, event.items[static_cast<std::size_t>(k)]);
  return out;
}

// --- feature cache ---------------------------------------------------------------

namespace {
constexpr char kFeatMagic[8] = {'G', 'O', 'B', 'F', 'E', 'A', 'T', '1'};
}

void write_feature_cache(const std::string& path, const Matrix& features,
                         std::uint64_t content_hash) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write feature cache: " + tmp);
    out.write(kFeatMagic, sizeof(kFeatMagic));
    const std::uint64_t rows = static_cast<std::uint64_t>(features.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(features.cols());
    out.write(reinterpret_cast<const char*>(&content_hash), sizeof(content_hash));
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    out.write(reinterpret_cast<const char*>(features.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(features.size())));
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot move feature cache into place: " + path);
}

std::optional<std::pair<Matrix, std::uint64_t>> read_feature_cache_any(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kFeatMagic, sizeof(magic)) != 0) return std::nullopt;
  std::uint64_t hash = 0, rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&hash), sizeof(hash));
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  if (!in || rows == 0 || cols == 0) return std::nullopt;
  Matrix features(static_cast<Index>(rows), static_cast<Index>(cols));
  in.read(reinterpret_cast<char*>(features.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(features.size())));
  if (!in) return std::nullopt;
  return std::make_pair(std::move(features), hash);
}

std::optional<Matrix> read_feature_cache(const std::string& path, std::uint64_t content_hash) {
  auto loaded = read_feature_cache_any(path);
  if (!loaded || loaded->second != content_hash) return std::nullopt;
  return std::move(loaded->first);
}

std::uint64_t hash_file(const std::string& path, std::uint64_t h) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash missing file: " + path);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h = rng::fnv1a(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  return h;
}

}  // namespace gob
