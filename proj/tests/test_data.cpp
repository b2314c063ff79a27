#include "suger/data.hpp"
#include "suger/rng.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace suger;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("suger_test_data_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

InteractionDataset random_dataset(std::uint64_t seed, int n_ub) {
  Rng rng(seed);
  std::vector<std::pair<int, int>> ub, ui, bi;
  for (int i = 0; i < n_ub; ++i) ub.emplace_back(rng.uniform_int(0, 19), rng.uniform_int(0, 14));
  for (int i = 0; i < 40; ++i) ui.emplace_back(rng.uniform_int(0, 19), rng.uniform_int(0, 29));
  for (int i = 0; i < 40; ++i) bi.emplace_back(rng.uniform_int(0, 14), rng.uniform_int(0, 29));
  return build_dataset(PairList::from_pairs(PairKind::kUserBundle, ub), PairList::from_pairs(PairKind::kUserItem, ui),
                       PairList::from_pairs(PairKind::kBundleItem, bi), 20, 15, 30);
}

}  // namespace

TEST_CASE("duplicate lines are dropped and counted") {
  const auto pl = parse_interactions("0 1\n0 1\n2 3\n", PairKind::kUserBundle);
  CHECK(pl.size() == 2);
  CHECK(pl.duplicates_dropped == 1);
  CHECK(pl.contains(0, 1));
  CHECK(pl.contains(2, 3));
  CHECK_FALSE(pl.contains(1, 0));
}

TEST_CASE("blank lines are ignored") {
  const auto pl = parse_interactions("\n0 1\n\n  \n1 2\n", PairKind::kUserItem);
  CHECK(pl.size() == 2);
}

TEST_CASE("malformed line reports its line number") {
  try {
    parse_interactions("0 1\n1 x\n", PairKind::kUserBundle);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_interactions("0 -1\n", PairKind::kUserBundle), ParseError);
  CHECK_THROWS_AS(parse_interactions("0 1 2\n", PairKind::kUserBundle), ParseError);
  CHECK_THROWS_AS(parse_interactions("5\n", PairKind::kUserBundle), ParseError);
}

TEST_CASE("empty file is an empty-relation error") {
  const auto dir = temp_dir("empty");
  std::ofstream(dir / "ub.txt").close();
  CHECK_THROWS_AS(load_interactions(dir / "ub.txt", PairKind::kUserBundle), Error);
  CHECK_THROWS_AS(load_interactions(dir / "missing.txt", PairKind::kUserBundle), Error);
}

TEST_CASE("load_interactions reads a file") {
  const auto dir = temp_dir("load");
  std::ofstream(dir / "ub.txt") << "3 4\n1 2\n";
  const auto pl = load_interactions(dir / "ub.txt", PairKind::kUserBundle);
  REQUIRE(pl.size() == 2);
  CHECK(pl.pairs[0] == std::pair{1, 2});
  CHECK(pl.pairs[1] == std::pair{3, 4});
}

TEST_CASE("build_dataset infers counts") {
  const auto ds = build_dataset(PairList::from_pairs(PairKind::kUserBundle, {{0, 0}}),
                                PairList::from_pairs(PairKind::kUserItem, {{0, 0}}),
                                PairList::from_pairs(PairKind::kBundleItem, {{0, 0}}));
  CHECK(ds.num_users == 1);
  CHECK(ds.num_bundles == 1);
  CHECK(ds.num_items == 1);
  CHECK(ds.bundles_without_items.empty());
}

TEST_CASE("bundle in ub without items is flagged, not dropped") {
  const auto ds = build_dataset(PairList::from_pairs(PairKind::kUserBundle, {{0, 0}, {0, 5}}),
                                PairList::from_pairs(PairKind::kUserItem, {{0, 0}}),
                                PairList::from_pairs(PairKind::kBundleItem, {{0, 0}}));
  CHECK(ds.num_bundles == 6);
  CHECK(ds.bundles_without_items == std::vector<int>{5});
  CHECK(ds.ub.contains(0, 5));
}

TEST_CASE("remap_dense orders by original id") {
  const auto ds = build_dataset(PairList::from_pairs(PairKind::kUserBundle, {{10, 7}, {3, 7}}),
                                PairList::from_pairs(PairKind::kUserItem, {{3, 100}}),
                                PairList::from_pairs(PairKind::kBundleItem, {{7, 50}, {7, 100}}));
  const auto [dense, map] = remap_dense(ds);
  CHECK(map.users == std::vector<int>{3, 10});
  CHECK(map.bundles == std::vector<int>{7});
  CHECK(map.items == std::vector<int>{50, 100});
  CHECK(dense.num_users == 2);
  CHECK(dense.num_bundles == 1);
  CHECK(dense.num_items == 2);
  CHECK(dense.ub.contains(0, 0));
  CHECK(dense.ub.contains(1, 0));
  CHECK(dense.ui.contains(0, 1));
  CHECK(dense.bi.contains(0, 0));
  CHECK(dense.bi.contains(0, 1));
}

TEST_CASE("split of 10 pairs at 0.6 gives 6 and 4, deterministic") {
  std::vector<std::pair<int, int>> ub;
  for (int i = 0; i < 10; ++i) ub.emplace_back(i, i % 3);
  const auto ds = build_dataset(PairList::from_pairs(PairKind::kUserBundle, ub),
                                PairList::from_pairs(PairKind::kUserItem, {{0, 0}}),
                                PairList::from_pairs(PairKind::kBundleItem, {{0, 0}, {1, 0}, {2, 0}}));
  const auto s1 = split_train_test(ds, 0.6, 7);
  const auto s2 = split_train_test(ds, 0.6, 7);
  CHECK(s1.train_ub.size() == 6);
  CHECK(s1.test_ub.size() == 4);
  CHECK(s1.train_ub.pairs == s2.train_ub.pairs);
  CHECK(s1.test_ub.pairs == s2.test_ub.pairs);
  CHECK_THROWS_AS(split_train_test(ds, 0.0, 7), Error);
  CHECK_THROWS_AS(split_train_test(ds, 1.0, 7), Error);
}

TEST_CASE("split partitions the input (property)") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto ds = random_dataset(seed, 5 + static_cast<int>(seed));
    const double ratio = 0.1 + 0.8 * static_cast<double>(seed % 9) / 8.0;
    const auto s = split_train_test(ds, ratio, seed);
    std::set<std::pair<int, int>> all(ds.ub.pairs.begin(), ds.ub.pairs.end());
    std::set<std::pair<int, int>> train(s.train_ub.pairs.begin(), s.train_ub.pairs.end());
    std::set<std::pair<int, int>> test(s.test_ub.pairs.begin(), s.test_ub.pairs.end());
    std::set<std::pair<int, int>> uni = train;
    uni.insert(test.begin(), test.end());
    CHECK(uni == all);
    CHECK(train.size() + test.size() == all.size());
    CHECK(static_cast<long long>(train.size()) == std::llround(ratio * static_cast<double>(all.size())));
  }
}

TEST_CASE("negative sampling: one triple per positive, negatives never train positives") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto s = split_train_test(random_dataset(seed, 60), 0.6, seed);
    const auto ns = sample_negatives(s, seed + 100);
    CHECK(ns.triples.size() + ns.skipped_users.size() == s.train_ub.size());
    for (const auto& t : ns.triples) {
      CHECK(s.train_ub.contains(t.user, t.pos_bundle));
      CHECK_FALSE(s.train_ub.contains(t.user, t.neg_bundle));
      CHECK(t.neg_bundle >= 0);
      CHECK(t.neg_bundle < s.num_bundles);
    }
    CHECK(sample_negatives(s, seed + 100).triples == ns.triples);
  }
}

TEST_CASE("six positives without skips give six triples") {
  Split s;
  s.num_users = 3;
  s.num_bundles = 5;
  s.num_items = 1;
  s.train_ub = PairList::from_pairs(PairKind::kUserBundle, {{0, 0}, {0, 1}, {1, 2}, {1, 3}, {2, 4}, {2, 0}});
  CHECK(sample_negatives(s, 1).triples.size() == 6);
}

TEST_CASE("user holding every bundle is skipped") {
  Split s;
  s.num_users = 1;
  s.num_bundles = 1;
  s.num_items = 1;
  s.train_ub = PairList::from_pairs(PairKind::kUserBundle, {{0, 0}});
  const auto ns = sample_negatives(s, 3);
  CHECK(ns.triples.empty());
  CHECK(ns.skipped_users == std::vector<int>{0});
}

TEST_CASE("negatives are roughly uniform over non-positives") {
  Split s;
  s.num_users = 1;
  s.num_bundles = 4;
  s.num_items = 1;
  s.train_ub = PairList::from_pairs(PairKind::kUserBundle, {{0, 0}});
  std::array<int, 4> counts{};
  for (std::uint64_t seed = 0; seed < 3000; ++seed) ++counts[static_cast<std::size_t>(sample_negatives(s, seed).triples[0].neg_bundle)];
  CHECK(counts[0] == 0);
  for (int b = 1; b < 4; ++b) CHECK(std::abs(counts[static_cast<std::size_t>(b)] - 1000) < 150);
}

TEST_CASE("split directory round trip") {
  const auto ds = random_dataset(5, 40);
  const auto [dense, map] = remap_dense(ds);
  const auto s = split_train_test(dense, 0.6, 11);
  const auto dir = temp_dir("split");
  save_split(dir, s, map);
  for (const char* f : {"train_ub.txt", "test_ub.txt", "user_item.txt", "bundle_item.txt", "split_meta.txt",
                        "id_map_user.txt", "id_map_bundle.txt", "id_map_item.txt"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  const auto back = load_split(dir);
  CHECK(back.train_ub.pairs == s.train_ub.pairs);
  CHECK(back.test_ub.pairs == s.test_ub.pairs);
  CHECK(back.ui.pairs == s.ui.pairs);
  CHECK(back.bi.pairs == s.bi.pairs);
  CHECK(back.num_users == s.num_users);
  CHECK(back.num_bundles == s.num_bundles);
  CHECK(back.num_items == s.num_items);
  CHECK(back.split_ratio == s.split_ratio);
  CHECK(back.seed == s.seed);
}
