#include "suger/graph_store.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace suger;

namespace {

std::vector<int> as_vec(std::span<const int> s) { return {s.begin(), s.end()}; }

GraphStore transcription_store() {
  Split s;
  s.num_users = 1;
  s.num_bundles = 1;
  s.num_items = 2;
  s.train_ub = PairList::from_pairs(PairKind::kUserBundle, {{0, 0}});
  s.test_ub = PairList::from_pairs(PairKind::kUserBundle, {});
  s.ui = PairList::from_pairs(PairKind::kUserItem, {{0, 1}});
  s.bi = PairList::from_pairs(PairKind::kBundleItem, {{0, 1}});
  return GraphStore::build(s);
}

}  // namespace

TEST_CASE("direct transcription of a one-edge-per-relation store") {
  const auto g = transcription_store();
  CHECK(as_vec(g.neighbors({EntityClass::kUser, 0}, Relation::kUB)) == std::vector<int>{0});
  CHECK(as_vec(g.neighbors({EntityClass::kBundle, 0}, Relation::kBU)) == std::vector<int>{0});
  CHECK(as_vec(g.neighbors({EntityClass::kUser, 0}, Relation::kUI)) == std::vector<int>{1});
  CHECK(as_vec(g.neighbors({EntityClass::kItem, 1}, Relation::kIU)) == std::vector<int>{0});
  CHECK(as_vec(g.neighbors({EntityClass::kBundle, 0}, Relation::kBI)) == std::vector<int>{1});
  CHECK(as_vec(g.neighbors({EntityClass::kItem, 1}, Relation::kIB)) == std::vector<int>{0});
  CHECK(g.neighbors({EntityClass::kItem, 0}, Relation::kIB).empty());
}

TEST_CASE("class mismatch and out-of-range ids throw") {
  const auto g = transcription_store();
  CHECK_THROWS_AS(g.neighbors({EntityClass::kUser, 0}, Relation::kBU), Error);
  CHECK_THROWS_AS(g.neighbors({EntityClass::kUser, 1}, Relation::kUB), Error);
  CHECK_THROWS_AS(g.bundle_items(3), Error);
}

TEST_CASE("test pairs never enter the store") {
  Split s;
  s.num_users = 2;
  s.num_bundles = 2;
  s.num_items = 1;
  s.train_ub = PairList::from_pairs(PairKind::kUserBundle, {{0, 0}});
  s.test_ub = PairList::from_pairs(PairKind::kUserBundle, {{1, 1}});
  s.ui = PairList::from_pairs(PairKind::kUserItem, {{0, 0}});
  s.bi = PairList::from_pairs(PairKind::kBundleItem, {{0, 0}});
  const auto g = GraphStore::build(s);
  CHECK_FALSE(g.has_edge(Relation::kUB, 1, 1));
  CHECK(g.num_edges(Relation::kUB) == 1);
}

TEST_CASE("empty ub with nonempty ui and bi is valid") {
  const auto g = GraphStore::build(1, 1, 1, PairList::from_pairs(PairKind::kUserBundle, {}),
                                   PairList::from_pairs(PairKind::kUserItem, {{0, 0}}),
                                   PairList::from_pairs(PairKind::kBundleItem, {{0, 0}}));
  CHECK(g.num_edges(Relation::kUB) == 0);
  CHECK(g.num_edges(Relation::kBU) == 0);
  CHECK(g.num_edges(Relation::kUI) == 1);
}

TEST_CASE("bundle_items examples") {
  const auto g = GraphStore::build(1, 2, 3, PairList::from_pairs(PairKind::kUserBundle, {}),
                                   PairList::from_pairs(PairKind::kUserItem, {}),
                                   PairList::from_pairs(PairKind::kBundleItem, {{0, 1}, {0, 2}}));
  CHECK(as_vec(g.bundle_items(0)) == std::vector<int>{1, 2});
  CHECK(g.bundle_items(1).empty());
}

TEST_CASE("random stores: symmetry, sortedness, bundle_items == BI, degree sums") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto rg = testing::random_graph(seed);
    const auto g = rg.store();
    for (Relation r : kAllRelations) {
      CHECK(g.num_edges(r) == g.num_edges(reverse(r)));
      std::size_t total = 0;
      for (int s = 0; s < g.count(source_class(r)); ++s) {
        const auto nb = g.neighbors({source_class(r), s}, r);
        total += nb.size();
        CHECK(std::is_sorted(nb.begin(), nb.end()));
        CHECK(std::adjacent_find(nb.begin(), nb.end()) == nb.end());
        for (int t : nb) CHECK(g.has_edge(reverse(r), t, s));
      }
      CHECK(total == g.num_edges(r));
    }
    CHECK(g.num_edges(Relation::kUB) == rg.ub.size());
    for (int b = 0; b < g.num_bundles(); ++b) {
      CHECK(as_vec(g.bundle_items(b)) == as_vec(g.neighbors({EntityClass::kBundle, b}, Relation::kBI)));
    }
  }
}

TEST_CASE("dump writes one line per directed edge") {
  const auto g = transcription_store();
  std::ostringstream os;
  g.dump(os);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);
}
