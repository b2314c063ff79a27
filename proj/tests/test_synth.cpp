#include "suger/synth.hpp"

#include <doctest.h>

#include <filesystem>
#include <set>

using namespace suger;

TEST_CASE("default generation is deterministic and well formed") {
  SynthConfig cfg;
  const auto a = generate(cfg);
  const auto b = generate(cfg);
  CHECK(a.ub.pairs == b.ub.pairs);
  CHECK(a.ui.pairs == b.ui.pairs);
  CHECK(a.bi.pairs == b.bi.pairs);
  CHECK(a.num_users == 500);
  CHECK(a.num_bundles == 300);
  CHECK(a.num_items == 1000);
  CHECK_FALSE(a.ub.empty());
  for (int bnd = 0; bnd < a.num_bundles; ++bnd) {
    int n = 0;
    for (auto [x, i] : a.bi.pairs) n += x == bnd ? 1 : 0;
    CHECK(n >= cfg.bundle_size_min);
    CHECK(n <= cfg.bundle_size_max);
  }
  cfg.seed = 14;
  CHECK(generate(cfg).ub.pairs != a.ub.pairs);
}

TEST_CASE("planted signal: positives overlap more than negatives") {
  SynthConfig cfg;
  const auto st = overlap_statistics(generate(cfg));
  CHECK(st.positive_mean > st.negative_mean);
  CHECK(st.positive_mean > 2.0 * st.negative_mean);
}

TEST_CASE("zero affinity makes positives independent of overlap") {
  SynthConfig cfg;
  cfg.affinity_strength = 0.0;
  cfg.noise_rate = 0.05;
  const auto st = overlap_statistics(generate(cfg));
  CHECK(st.positive_mean == doctest::Approx(st.negative_mean).epsilon(0.25));
}

TEST_CASE("full overlap with affinity 1 gives a certain positive") {
  SynthConfig cfg;
  cfg.num_users = 60;
  cfg.num_bundles = 20;
  cfg.num_items = 40;
  cfg.affinity_strength = 1.0;
  cfg.noise_rate = 0.0;
  cfg.liked_item_keep = 1.0;
  const auto ds = generate(cfg);
  std::vector<std::vector<int>> hist(static_cast<std::size_t>(ds.num_users)), items(static_cast<std::size_t>(ds.num_bundles));
  for (auto [u, i] : ds.ui.pairs) hist[static_cast<std::size_t>(u)].push_back(i);
  for (auto [b, i] : ds.bi.pairs) items[static_cast<std::size_t>(b)].push_back(i);
  int full = 0;
  for (int u = 0; u < ds.num_users; ++u) {
    for (int b = 0; b < ds.num_bundles; ++b) {
      if (overlap_ratio(hist[static_cast<std::size_t>(u)], items[static_cast<std::size_t>(b)]) == 1.0) {
        ++full;
        CHECK(ds.ub.contains(u, b));
      }
    }
  }
  CHECK(full > 0);
}

TEST_CASE("overlap_ratio") {
  const std::vector<int> h{1, 2, 3}, b{2, 3, 4, 5}, e{};
  CHECK(overlap_ratio(h, b) == 0.5);
  CHECK(overlap_ratio(h, e) == 0.0);
}

TEST_CASE("domain pair: disjoint ids, same rule, similar statistics") {
  SynthConfig cfg;
  const auto [a, b] = generate_domain_pair(cfg, 13, 14);
  auto left = [](const PairList& p) {
    std::set<int> s;
    for (auto [x, y] : p.pairs) s.insert(x);
    return s;
  };
  auto right = [](const PairList& p) {
    std::set<int> s;
    for (auto [x, y] : p.pairs) s.insert(y);
    return s;
  };
  auto disjoint = [](const std::set<int>& x, const std::set<int>& y) {
    for (int v : x) {
      if (y.count(v)) return false;
    }
    return true;
  };
  CHECK(disjoint(left(a.ub), left(b.ub)));
  CHECK(disjoint(right(a.ub), right(b.ub)));
  CHECK(disjoint(right(a.ui), right(b.ui)));

  auto single = cfg;
  single.seed = 13;
  CHECK(generate(single).ub.pairs == a.ub.pairs);

  const auto sa = overlap_statistics(a);
  const auto sb = overlap_statistics(b);
  CHECK(sa.positive_mean == doctest::Approx(sb.positive_mean).epsilon(0.15));
  CHECK(sa.negative_mean == doctest::Approx(sb.negative_mean).epsilon(0.15));
  CHECK_THROWS_AS(generate_domain_pair(cfg, 13, 13), Error);
}

TEST_CASE("infeasible configs are rejected") {
  SynthConfig cfg;
  cfg.bundle_size_min = 9;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = SynthConfig{};
  cfg.num_users = 0;
  CHECK_THROWS_AS(generate(cfg), Error);
  cfg = SynthConfig{};
  cfg.bundle_size_max = 2000;
  CHECK_THROWS_AS(generate(cfg), Error);
}

TEST_CASE("write_dataset emits three pair files and provenance") {
  SynthConfig cfg;
  cfg.num_users = 30;
  cfg.num_bundles = 10;
  cfg.num_items = 50;
  const auto dir = std::filesystem::temp_directory_path() / "suger_test_synth_write";
  std::filesystem::remove_all(dir);
  write_dataset(dir, generate(cfg), cfg.to_key_values());
  for (const char* f : {"user_bundle.txt", "user_item.txt", "bundle_item.txt", "provenance.txt"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  CHECK(read_key_values(dir / "provenance.txt").get("synth.seed") == "13");
}
