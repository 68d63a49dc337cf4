#include "gob/fixture.hpp"

#include "gob/rng.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace gob {

namespace {

const char* kSyllables[] = {"ba", "re", "mo", "ti", "ka", "lu", "so", "ne",
                            "vi", "da", "po", "chi", "ral", "ter", "min", "ox"};

std::string make_word(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> len(2, 3);
  std::uniform_int_distribution<int> pick(0, 15);
  std::string w;
  const int L = len(gen);
  for (int s = 0; s < L; ++s) w += kSyllables[pick(gen)];
  return w;
}

}  // namespace

void write_bookmark_fixture(const std::string& dir, const FixtureParams& p, std::uint64_t seed) {
  if (p.communities < 1 || p.users_per_community < 1 || p.items_per_topic < 1)
    throw std::invalid_argument("write_bookmark_fixture: sizes must be positive");
  std::filesystem::create_directories(dir);
  auto gen = rng::make_stream(seed, rng::Stream::Generic);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const int users = p.communities * p.users_per_community;
  const int topic_items = p.communities * p.items_per_topic;
  const int items = topic_items + p.generic_items;

  // distinct word vocabulary per topic plus a shared generic pool
  std::set<std::string> used;
  auto fresh_word = [&]() {
    for (;;) {
      std::string w = make_word(gen);
      if (used.insert(w).second) return w;
    }
  };
  const int words_per_topic = 24;
  std::vector<std::vector<std::string>> topic_words(static_cast<std::size_t>(p.communities));
  for (auto& pool : topic_words)
    for (int w = 0; w < words_per_topic; ++w) pool.push_back(fresh_word());
  std::vector<std::string> generic_words;
  for (int w = 0; w < 40; ++w) generic_words.push_back(fresh_word());

  // tag values: single words plus compound tags built from one topic pool
  std::vector<std::string> tag_values;
  std::vector<std::vector<int>> topic_tag_ids(static_cast<std::size_t>(p.communities));
  std::vector<int> generic_tag_ids;
  auto add_tag = [&](const std::string& value) {
    tag_values.push_back(value);
    return static_cast<int>(tag_values.size());  // 1-based ids
  };
  for (int c = 0; c < p.communities; ++c) {
    const auto& pool = topic_words[static_cast<std::size_t>(c)];
    auto& ids = topic_tag_ids[static_cast<std::size_t>(c)];
    for (const std::string& w : pool) ids.push_back(add_tag(w));
    std::uniform_int_distribution<int> pick(0, words_per_topic - 1);
    for (int k = 0; k < 10; ++k) {  // compound forms, split back into pool words
      const char join = (k % 3 == 0) ? '-' : '_';
      ids.push_back(add_tag(pool[pick(gen)] + join + pool[pick(gen)]));
    }
  }
  for (const std::string& w : generic_words) generic_tag_ids.push_back(add_tag(w));

  // intrinsic tag pool per item
  std::vector<std::vector<int>> item_tags(static_cast<std::size_t>(items));
  std::uniform_int_distribution<int> tags_per_item(p.tags_per_item_min, p.tags_per_item_max);
  for (int i = 0; i < items; ++i) {
    const int topic = i < topic_items ? i / p.items_per_topic : -1;
    const auto& pool =
        topic >= 0 ? topic_tag_ids[static_cast<std::size_t>(topic)] : generic_tag_ids;
    std::uniform_int_distribution<int> pick(0, static_cast<int>(pool.size()) - 1);
    std::set<int> mine;
    const int want = tags_per_item(gen);
    while (static_cast<int>(mine.size()) < want) mine.insert(pool[pick(gen)]);
    // one generic word now and then so topics overlap a little
    if (unif(gen) < 0.3) {
      std::uniform_int_distribution<int> g(0, static_cast<int>(generic_tag_ids.size()) - 1);
      mine.insert(generic_tag_ids[g(gen)]);
    }
    item_tags[static_cast<std::size_t>(i)].assign(mine.begin(), mine.end());
  }

  // social graph: denser inside communities; HetRec files list both
  // directions for most rows, so intra edges are written twice and inter
  // edges once (the loader symmetrizes)
  std::ofstream contacts(dir + "/user_contacts.dat", std::ios::binary);
  if (!contacts) throw std::runtime_error("cannot write " + dir + "/user_contacts.dat");
  contacts << "userID\tcontactID\n";
  for (int u = 0; u < users; ++u) {
    for (int v = u + 1; v < users; ++v) {
      const bool same = (u / p.users_per_community) == (v / p.users_per_community);
      const double prob = same ? p.intra_edge_prob : p.inter_edge_prob;
      if (unif(gen) < prob) {
        contacts << (u + 1) << "\t" << (v + 1) << "\n";
        if (same) contacts << (v + 1) << "\t" << (u + 1) << "\n";
      }
    }
  }

  // bookmarks with per-bookmark tag rows
  std::ofstream marks(dir + "/user_taggedbookmarks.dat", std::ios::binary);
  if (!marks) throw std::runtime_error("cannot write " + dir + "/user_taggedbookmarks.dat");
  marks << "userID\tbookmarkID\ttagID\tday\tmonth\tyear\n";
  std::uniform_int_distribution<int> num_marks(p.min_bookmarks, p.max_bookmarks);
  std::uniform_int_distribution<int> any_item(0, items - 1);
  for (int u = 0; u < users; ++u) {
    const int community = u / p.users_per_community;
    std::uniform_int_distribution<int> own_item(community * p.items_per_topic,
                                                (community + 1) * p.items_per_topic - 1);
    std::set<int> marked;
    const int want = num_marks(gen);
    while (static_cast<int>(marked.size()) < want) {
      const int item = unif(gen) < p.own_topic_share ? own_item(gen) : any_item(gen);
      marked.insert(item);
    }
    for (int item : marked) {
      const auto& pool = item_tags[static_cast<std::size_t>(item)];
      std::uniform_int_distribution<int> pick(0, static_cast<int>(pool.size()) - 1);
      std::uniform_int_distribution<int> count(1, 3);
      std::set<int> applied;
      const int rows = count(gen);
      while (static_cast<int>(applied.size()) < rows &&
             static_cast<int>(applied.size()) < static_cast<int>(pool.size()))
        applied.insert(pool[pick(gen)]);
      for (int tag : applied)
        marks << (u + 1) << "\t" << (item + 1) << "\t" << tag << "\t1\t6\t2010\n";
    }
  }

  std::ofstream tags(dir + "/tags.dat", std::ios::binary);
  if (!tags) throw std::runtime_error("cannot write " + dir + "/tags.dat");
  tags << "id\tvalue\n";
  for (int id = 0; id < static_cast<int>(tag_values.size()); ++id)
    tags << (id + 1) << "\t" << tag_values[static_cast<std::size_t>(id)] << "\n";
}

}  // namespace gob
