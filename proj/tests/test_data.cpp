#include "gob/data.hpp"
#include "gob/fixture.hpp"
#include "gob/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace gob;

TEST_CASE("synth_ground_truth: one clique means one shared vector") {
  GroundTruth gt = synth_ground_truth(1, 6, 4, 3);
  for (int i = 1; i < 6; ++i)
    CHECK((gt.vectors.col(i) - gt.vectors.col(0)).cwiseAbs().maxCoeff() == 0.0);
  // the closeness sum over any intra-clique edge set vanishes
  UserGraph g = make_4cliques(1, 6);
  double sum = 0.0;
  for (const Edge& e : g.edges())
    sum += (gt.vectors.col(e.i) - gt.vectors.col(e.j)).squaredNorm();
  CHECK(sum == 0.0);
}

TEST_CASE("synth_ground_truth: defaults give 4 distinct unit vectors over 100 nodes") {
  GroundTruth gt = synth_ground_truth(4, 25, 25, 11);
  CHECK(gt.num_nodes() == 100);
  std::set<double> first_coords;
  for (int i = 0; i < 100; ++i) {
    first_coords.insert(gt.vectors(0, i));
    CHECK(gt.vectors.col(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(first_coords.size() == 4);
}

TEST_CASE("synth_ground_truth: 1-dimensional vectors are plus or minus one") {
  GroundTruth gt = synth_ground_truth(2, 3, 1, 5);
  for (int i = 0; i < 6; ++i) CHECK(std::abs(std::abs(gt.vectors(0, i)) - 1.0) <= 1e-12);
}

TEST_CASE("synth_payoff: no noise means the exact inner product") {
  GroundTruth gt = synth_ground_truth(2, 2, 5, 7, 0.0);
  auto gen = rng::make_stream(1, rng::Stream::Generic);
  const Vector x = rng::unit_vector(gen, 5);
  CHECK(synth_payoff(gt, 1, x, 9, 4, 0) == gt.vectors.col(1).dot(x));
  CHECK(synth_payoff(gt, 0, gt.vectors.col(0), 9, 4, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("synth_payoff: empirical mean matches the Monte Carlo oracle") {
  const double z = 0.5;
  GroundTruth gt = synth_ground_truth(1, 1, 4, 13, z);
  auto gen = rng::make_stream(2, rng::Stream::Generic);
  const Vector x = rng::unit_vector(gen, 4);
  const double expected = gt.vectors.col(0).dot(x);
  const int draws = 100000;
  double sum = 0.0;
  for (int t = 0; t < draws; ++t) sum += synth_payoff(gt, 0, x, 77, t, 0);
  const double sigma = z / std::sqrt(3.0);
  CHECK(std::abs(sum / draws - expected) <= 3.0 * sigma / std::sqrt(double(draws)));
}

TEST_CASE("split_tags: compound tags split on underscores, hyphens, apostrophes") {
  CHECK(split_tags("webdesign_tutorial_css") ==
        std::vector<std::string>({"webdesign", "tutorial", "css"}));
  CHECK(split_tags("rock_n_roll") == std::vector<std::string>({"rock", "n", "roll"}));
  CHECK(split_tags("jazz") == std::vector<std::string>({"jazz"}));
  CHECK(split_tags("Drum-and-Bass") == std::vector<std::string>({"drum", "and", "bass"}));
  CHECK(split_tags("80's-music") == std::vector<std::string>({"80", "s", "music"}));
  CHECK(split_tags("___") == std::vector<std::string>{});
}

TEST_CASE("split_tags: idempotent on its own output") {
  for (const std::string raw : {"alt_rock", "post-punk", "d'n'b", "plain"})
    for (const std::string& word : split_tags(raw)) {
      const auto again = split_tags(word);
      REQUIRE(again.size() == 1);
      CHECK(again[0] == word);
    }
}

TEST_CASE("build_item_features: degenerate corpus where every item shares one tag") {
  std::vector<TagAssignment> assignments;
  for (int i = 0; i < 4; ++i) assignments.push_back({i, "same"});
  auto report = build_item_features(assignments, 4, 1, 2);
  CHECK(report.features.cwiseAbs().maxCoeff() == 0.0);  // idf = ln(4/4) = 0
  CHECK(report.unique_tags_raw == 1);
  CHECK(report.unique_tags_split == 1);
}

TEST_CASE("build_item_features: disjoint single tags give orthogonal pre-pca rows") {
  // two items, two disjoint tags: the tf-idf rows are axis vectors, and the
  // centered 2-item PCA keeps them apart
  std::vector<TagAssignment> assignments{{0, "alpha"}, {1, "beta"}};
  auto report = build_item_features(assignments, 2, 1, 1);
  CHECK(report.unique_tags_split == 2);
  CHECK(report.pca_retained == 1);
  CHECK(report.features(0, 0) == doctest::Approx(-report.features(1, 0)).epsilon(1e-10));
  CHECK(std::abs(report.features(0, 0)) > 0.1);
}

TEST_CASE("build_item_features: min count filter and untagged items") {
  std::vector<TagAssignment> assignments;
  for (int i = 0; i < 5; ++i) assignments.push_back({i, "common_word"});
  assignments.push_back({0, "rare"});
  auto report = build_item_features(assignments, 6, 2, 2);
  // "rare" occurs once and is dropped; item 5 never had tags
  CHECK(report.tags_kept == 2);  // common, word
  CHECK(report.items_without_tags == 1);
  CHECK(report.unique_tags_raw == 2);
  CHECK(report.unique_tags_split == 3);
  CHECK(report.features.row(5).cwiseAbs().maxCoeff() == 0.0);  // cold start stays zero
}

TEST_CASE("sample_context_set: forced positive always present, no duplicates") {
  Interactions inter;
  inter.graph = UserGraph(3);
  inter.features = Matrix::Identity(6, 6);
  inter.positives = {{2}, {0, 5}, {4}};
  inter.positive_set = {{2}, {0, 5}, {4}};
  for (long t = 1; t <= 200; ++t) {
    ContextEvent ev = sample_context_set(inter, t, 4, 99);
    CHECK(ev.items.size() == 4);
    std::set<int> distinct(ev.items.begin(), ev.items.end());
    CHECK(distinct.size() == 4);  // re-draws keep the set size exact
    bool has_positive = false;
    for (int item : ev.items)
      has_positive = has_positive || inter.positive_set[static_cast<std::size_t>(ev.user)].count(item) > 0;
    CHECK(has_positive);
  }
}

TEST_CASE("sample_context_set: single positive with set size 2") {
  Interactions inter;
  inter.graph = UserGraph(1);
  inter.features = Matrix::Identity(5, 5);
  inter.positives = {{3}};
  inter.positive_set = {{3}};
  for (long t = 1; t <= 50; ++t) {
    ContextEvent ev = sample_context_set(inter, t, 2, 7);
    CHECK((ev.items[0] == 3 || ev.items[1] == 3));
  }
}

TEST_CASE("sample_synth_context_set: unit norms and deterministic redraws") {
  GroundTruth gt = synth_ground_truth(2, 3, 7, 1);
  ContextEvent a = sample_synth_context_set(gt, 10, 5, 31);
  ContextEvent b = sample_synth_context_set(gt, 10, 5, 31);
  CHECK(a.user == b.user);
  CHECK((a.candidates - b.candidates).cwiseAbs().maxCoeff() == 0.0);
  for (Index k = 0; k < a.candidates.cols(); ++k)
    CHECK(a.candidates.col(k).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("environment: raw synthetic payoffs stay within [-1.5, 1.5] at z = 0.5") {
  GroundTruth gt = synth_ground_truth(4, 25, 25, 31, 0.5);
  CliqueEnvironment env(gt, make_4cliques(4, 25), 10);
  long clipped = 0, total = 0;
  for (long t = 1; t <= 200; ++t) {
    const ContextEvent ev = env.draw_event(31, t);
    const Vector p = env.arm_payoffs(31, ev);
    for (Index k = 0; k < p.size(); ++k) {
      CHECK(std::abs(p[k]) <= 1.5 + 1e-12);  // |u'x| <= 1 plus |eps| <= 0.5
      if (std::abs(p[k]) > 1.0) ++clipped;
      ++total;
    }
  }
  CHECK(total == 2000);
  CHECK(clipped < total / 4);  // clipping is the exception, not the rule
}

TEST_CASE("environment: payoff oracle is consistent and baseline matches positives") {
  Interactions inter;
  inter.graph = UserGraph(2);
  inter.features = Matrix::Identity(30, 30);
  inter.positives = {{1}, {2, 3}};
  inter.positive_set = {{1}, {2, 3}};
  DatasetEnvironment env(&inter, 25);
  const ContextEvent ev = env.draw_event(3, 1);
  const Vector p1 = env.arm_payoffs(3, ev);
  const Vector p2 = env.arm_payoffs(3, ev);
  CHECK((p1 - p2).cwiseAbs().maxCoeff() == 0.0);
  for (Index k = 0; k < p1.size(); ++k) CHECK((p1[k] == 0.0 || p1[k] == 1.0));
  CHECK(p1.sum() >= 1.0);  // the forced positive
}

TEST_CASE("toy fixture: handcrafted files load to the exact expected dataset") {
  namespace fs = std::filesystem;
  const std::string dir = "/tmp/gob_toy_fixture";
  fs::create_directories(dir);
  {
    std::ofstream f(dir + "/user_friends.dat");
    f << "userID\tfriendID\n";
    f << "10\t20\n20\t10\n";  // mutual pair
    f << "10\t30\n";          // one-directional row, still an edge
  }
  {
    std::ofstream f(dir + "/user_artists.dat");
    f << "userID\tartistID\tweight\n";
    f << "10\t100\t52\n10\t200\t13\n20\t200\t7\n30\t400\t1\n30\t100\t2\n";
  }
  {
    std::ofstream f(dir + "/user_taggedartists.dat");
    f << "userID\tartistID\ttagID\tday\tmonth\tyear\n";
    f << "10\t100\t1\t1\t4\t2009\n";
    f << "10\t200\t2\t1\t4\t2009\n";
    f << "20\t200\t2\t1\t4\t2009\n";
    f << "30\t400\t3\t1\t4\t2009\n";
    f << "30\t300\t1\t1\t4\t2009\n";  // item only seen through tags
  }
  {
    std::ofstream f(dir + "/tags.dat");
    f << "tagID\ttagValue\n1\tindie_rock\n2\tjazz\n3\telectro-swing\n";
  }

  HetrecFiles files = hetrec_layout(dir, "lastfm");
  LoadedDataset loaded = load_hetrec(files, 2);

  CHECK(loaded.stats.nodes == 3);
  CHECK(loaded.stats.edges == 2);
  CHECK(loaded.stats.items == 4);  // 100, 200, 300, 400
  CHECK(loaded.stats.nonzero_payoffs == 5);
  CHECK(loaded.stats.tags == 3);
  CHECK(loaded.stats.tags_split == 5);  // indie, rock, jazz, electro, swing

  // users kept: all three have positives and form one component
  CHECK(loaded.data.num_users() == 3);
  CHECK(loaded.data.graph.num_edges() == 2);
  CHECK(loaded.data.num_items() == 4);
  // dense ids sort raw ids: 10->0, 20->1, 30->2; items 100->0, 200->1, 300->2, 400->3
  CHECK(loaded.data.payoff(0, 0) == 1.0);
  CHECK(loaded.data.payoff(0, 1) == 1.0);
  CHECK(loaded.data.payoff(1, 1) == 1.0);
  CHECK(loaded.data.payoff(1, 0) == 0.0);
  CHECK(loaded.data.payoff(2, 3) == 1.0);
  CHECK(loaded.data.payoff(2, 0) == 1.0);
  CHECK(loaded.data.payoff(2, 2) == 0.0);
}

TEST_CASE("load_hetrec: malformed rows are rejected with their line number") {
  namespace fs = std::filesystem;
  const std::string dir = "/tmp/gob_bad_fixture";
  fs::create_directories(dir);
  {
    std::ofstream f(dir + "/user_friends.dat");
    f << "userID\tfriendID\n1\t2\n";
  }
  {
    std::ofstream f(dir + "/user_artists.dat");
    f << "userID\tartistID\tweight\n1\tnot_an_id\t3\n";
  }
  {
    std::ofstream f(dir + "/user_taggedartists.dat");
    f << "userID\tartistID\ttagID\td\tm\ty\n";
  }
  fs::remove(dir + "/tags.dat");
  HetrecFiles files = hetrec_layout(dir, "lastfm");
  try {
    load_hetrec(files, 2);
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("load_hetrec: users without positives and off-component users are dropped") {
  namespace fs = std::filesystem;
  const std::string dir = "/tmp/gob_drop_fixture";
  fs::create_directories(dir);
  {
    std::ofstream f(dir + "/user_friends.dat");
    // component A: 1-2-3, component B: 4-5 (smaller), user 6 isolated
    f << "userID\tfriendID\n1\t2\n2\t3\n4\t5\n1\t6\n";
  }
  {
    std::ofstream f(dir + "/user_artists.dat");
    // user 6 has no positives -> dropped before the component rule
    f << "userID\tartistID\tweight\n1\t7\t1\n2\t7\t1\n3\t8\t1\n4\t7\t1\n5\t8\t1\n";
  }
  {
    std::ofstream f(dir + "/user_taggedartists.dat");
    f << "userID\tartistID\ttagID\td\tm\ty\n1\t7\t1\t1\t1\t1\n1\t8\t2\t1\t1\t1\n";
  }
  {
    std::ofstream f(dir + "/tags.dat");
    f << "tagID\ttagValue\n1\ta\n2\tb\n";
  }
  LoadedDataset loaded = load_hetrec(hetrec_layout(dir, "lastfm"), 1);
  CHECK(loaded.stats.nodes == 6);
  CHECK(loaded.stats.users_dropped_no_positive == 1);
  CHECK(loaded.stats.users_dropped_disconnected == 2);
  CHECK(loaded.data.num_users() == 3);
  CHECK(loaded.data.graph.is_connected());
}

TEST_CASE("bookmark fixture: generated dataset loads and is community-structured") {
  const std::string dir = "/tmp/gob_demo_fixture";
  FixtureParams params;
  params.communities = 4;
  params.users_per_community = 10;
  params.items_per_topic = 30;
  params.generic_items = 20;
  params.inter_edge_prob = 0.05;  // keep the small graph connected
  write_bookmark_fixture(dir, params, 5);
  LoadedDataset loaded = load_hetrec(hetrec_layout(dir, "delicious"), 10);
  CHECK(loaded.stats.nodes == 40);
  CHECK(loaded.data.num_users() >= 35);  // largest component keeps almost everyone
  CHECK(loaded.data.features.cols() == 10);
  for (int u = 0; u < loaded.data.num_users(); ++u)
    CHECK(!loaded.data.positives[static_cast<std::size_t>(u)].empty());

  // determinism: the exact same files on a rerun
  const std::string dir2 = "/tmp/gob_demo_fixture2";
  write_bookmark_fixture(dir2, params, 5);
  for (const char* name : {"/user_contacts.dat", "/user_taggedbookmarks.dat", "/tags.dat"}) {
    std::ifstream a(dir + name), b(dir2 + name);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
  }
}

TEST_CASE("feature cache: round-trip and hash validation") {
  const std::string path = "/tmp/gob_feat_cache.bin";
  Matrix m(3, 2);
  m << 1.5, -2.25, 0.0, 1e-17, 3.0, 4.0;
  write_feature_cache(path, m, 0xabcdefULL);
  auto back = read_feature_cache(path, 0xabcdefULL);
  REQUIRE(back.has_value());
  CHECK((*back - m).cwiseAbs().maxCoeff() == 0.0);
  CHECK_FALSE(read_feature_cache(path, 0x123ULL).has_value());
  auto any = read_feature_cache_any(path);
  REQUIRE(any.has_value());
  CHECK(any->second == 0xabcdefULL);
}

TEST_CASE("subsample_users: bfs component of the requested size") {
  FixtureParams params;
  params.communities = 3;
  params.users_per_community = 8;
  params.items_per_topic = 20;
  params.generic_items = 10;
  params.inter_edge_prob = 0.08;
  const std::string dir = "/tmp/gob_subsample_fixture";
  write_bookmark_fixture(dir, params, 9);
  LoadedDataset loaded = load_hetrec(hetrec_layout(dir, "delicious"), 5);
  const int want = loaded.data.num_users() - 4;
  Interactions sub = subsample_users(loaded.data, want);
  CHECK(sub.num_users() == want);
  CHECK(sub.graph.is_connected());
  for (int u = 0; u < want; ++u) CHECK(!sub.positives[static_cast<std::size_t>(u)].empty());
}
