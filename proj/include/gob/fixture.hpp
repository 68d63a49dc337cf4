#pragma once

#include "gob/types.hpp"

#include <cstdint>
#include <string>

namespace gob {

// Parameters of the synthetic bookmark-service demo dataset. It mimics the
// structure of a niche-item social bookmarking service: users cluster into
// communities, items belong to topics, users mostly bookmark items of their
// own community's topic, and tags (some of them compound) describe topics.
struct FixtureParams {
  int communities = 10;
  int users_per_community = 25;
  int items_per_topic = 120;
  int generic_items = 200;
  double intra_edge_prob = 0.22;
  double inter_edge_prob = 0.004;
  int min_bookmarks = 15;
  int max_bookmarks = 45;
  double own_topic_share = 0.85;
  int tags_per_item_min = 4;
  int tags_per_item_max = 10;
};

// Writes user_contacts.dat, user_taggedbookmarks.dat and tags.dat in the
// tab-separated layout the delicious loader expects. Deterministic in `seed`.
void write_bookmark_fixture(const std::string& dir, const FixtureParams& params,
                            std::uint64_t seed);

}  // namespace gob
