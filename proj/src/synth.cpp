#include "suger/synth.hpp"

#include "suger/rng.hpp"

#include <algorithm>

namespace suger {

void SynthConfig::validate() const {
  if (num_users < 1 || num_bundles < 1 || num_items < 1) throw Error("synth: counts must be >= 1");
  if (bundle_size_min < 1 || bundle_size_min > bundle_size_max || bundle_size_max > num_items) {
    throw Error("synth: infeasible bundle_size range");
  }
  if (items_per_user_min < 0 || items_per_user_min > items_per_user_max || items_per_user_max > num_items) {
    throw Error("synth: infeasible items_per_user range");
  }
  if (liked_bundles_min < 0 || liked_bundles_min > liked_bundles_max || liked_bundles_max > num_bundles) {
    throw Error("synth: infeasible liked_bundles range");
  }
  if (!(affinity_strength >= 0.0 && affinity_strength <= 1.0)) throw Error("synth: affinity_strength must lie in [0,1]");
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw Error("synth: noise_rate must lie in [0,1]");
  if (!(liked_item_keep >= 0.0 && liked_item_keep <= 1.0)) throw Error("synth: liked_item_keep must lie in [0,1]");
}

KeyValues SynthConfig::to_key_values() const {
  KeyValues kv;
  kv.set("synth.num_users", std::to_string(num_users));
  kv.set("synth.num_bundles", std::to_string(num_bundles));
  kv.set("synth.num_items", std::to_string(num_items));
  kv.set("synth.bundle_size_min", std::to_string(bundle_size_min));
  kv.set("synth.bundle_size_max", std::to_string(bundle_size_max));
  kv.set("synth.items_per_user_min", std::to_string(items_per_user_min));
  kv.set("synth.items_per_user_max", std::to_string(items_per_user_max));
  kv.set("synth.liked_bundles_min", std::to_string(liked_bundles_min));
  kv.set("synth.liked_bundles_max", std::to_string(liked_bundles_max));
  kv.set("synth.liked_item_keep", format_double(liked_item_keep));
  kv.set("synth.affinity_strength", format_double(affinity_strength));
  kv.set("synth.noise_rate", format_double(noise_rate));
  kv.set("synth.seed", std::to_string(seed));
  return kv;
}

double overlap_ratio(std::span<const int> history, std::span<const int> bundle_items) {
  if (bundle_items.empty()) return 0.0;
  std::size_t i = 0, j = 0, n = 0;
  while (i < history.size() && j < bundle_items.size()) {
    if (history[i] < bundle_items[j]) {
      ++i;
    } else if (bundle_items[j] < history[i]) {
      ++j;
    } else {
      ++n, ++i, ++j;
    }
  }
  return static_cast<double>(n) / static_cast<double>(bundle_items.size());
}

namespace {

InteractionDataset generate_offset(const SynthConfig& cfg, std::uint64_t seed, int user_base, int bundle_base,
                                   int item_base) {
  cfg.validate();
  Rng rng(seed);

  std::vector<std::vector<int>> bundle_items(static_cast<std::size_t>(cfg.num_bundles));
  for (auto& items : bundle_items) {
    const int size = rng.uniform_int(cfg.bundle_size_min, cfg.bundle_size_max);
    items = rng.sample_positions(cfg.num_items, size);
  }

  std::vector<std::vector<int>> history(static_cast<std::size_t>(cfg.num_users));
  std::vector<char> in_history(static_cast<std::size_t>(cfg.num_items));
  for (auto& hist : history) {
    std::fill(in_history.begin(), in_history.end(), 0);
    const int target = rng.uniform_int(cfg.items_per_user_min, cfg.items_per_user_max);
    const int liked = rng.uniform_int(cfg.liked_bundles_min, cfg.liked_bundles_max);
    for (int b : rng.sample_positions(cfg.num_bundles, liked)) {
      for (int i : bundle_items[static_cast<std::size_t>(b)]) {
        if (rng.uniform() < cfg.liked_item_keep) in_history[static_cast<std::size_t>(i)] = 1;
      }
    }
    auto count = [&] { return static_cast<int>(std::count(in_history.begin(), in_history.end(), 1)); };
    for (int have = count(); have < target; ++have) {
      int i;
      do {
        i = rng.uniform_int(cfg.num_items);
      } while (in_history[static_cast<std::size_t>(i)]);
      in_history[static_cast<std::size_t>(i)] = 1;
    }
    for (int i = 0; i < cfg.num_items; ++i) {
      if (in_history[static_cast<std::size_t>(i)]) hist.push_back(i);
    }
  }

  std::vector<std::pair<int, int>> ub, ui, bi;
  for (int u = 0; u < cfg.num_users; ++u) {
    const auto& hist = history[static_cast<std::size_t>(u)];
    for (int b = 0; b < cfg.num_bundles; ++b) {
      const double p =
          std::min(1.0, cfg.affinity_strength * overlap_ratio(hist, bundle_items[static_cast<std::size_t>(b)]) +
                            cfg.noise_rate);
      if (rng.uniform() < p) ub.emplace_back(user_base + u, bundle_base + b);
    }
    for (int i : hist) ui.emplace_back(user_base + u, item_base + i);
  }
  for (int b = 0; b < cfg.num_bundles; ++b) {
    for (int i : bundle_items[static_cast<std::size_t>(b)]) bi.emplace_back(bundle_base + b, item_base + i);
  }
  return build_dataset(PairList::from_pairs(PairKind::kUserBundle, std::move(ub)),
                       PairList::from_pairs(PairKind::kUserItem, std::move(ui)),
                       PairList::from_pairs(PairKind::kBundleItem, std::move(bi)), user_base + cfg.num_users,
                       bundle_base + cfg.num_bundles, item_base + cfg.num_items);
}

}  // namespace

InteractionDataset generate(const SynthConfig& cfg) { return generate_offset(cfg, cfg.seed, 0, 0, 0); }

std::pair<InteractionDataset, InteractionDataset> generate_domain_pair(const SynthConfig& cfg, std::uint64_t seed_a,
                                                                       std::uint64_t seed_b) {
  if (seed_a == seed_b) throw Error("synth: domain pair needs two different seeds");
  auto a = generate_offset(cfg, seed_a, 0, 0, 0);
  auto b = generate_offset(cfg, seed_b, cfg.num_users, cfg.num_bundles, cfg.num_items);
  return {std::move(a), std::move(b)};
}

OverlapStats overlap_statistics(const InteractionDataset& ds) {
  std::vector<std::vector<int>> hist(static_cast<std::size_t>(ds.num_users));
  std::vector<std::vector<int>> items(static_cast<std::size_t>(ds.num_bundles));
  std::vector<char> active_user(static_cast<std::size_t>(ds.num_users), 0);
  std::vector<char> active_bundle(static_cast<std::size_t>(ds.num_bundles), 0);
  for (auto [u, i] : ds.ui.pairs) hist[static_cast<std::size_t>(u)].push_back(i), active_user[static_cast<std::size_t>(u)] = 1;
  for (auto [b, i] : ds.bi.pairs) items[static_cast<std::size_t>(b)].push_back(i), active_bundle[static_cast<std::size_t>(b)] = 1;

  double pos = 0.0, neg = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
  for (int u = 0; u < ds.num_users; ++u) {
    if (!active_user[static_cast<std::size_t>(u)]) continue;
    for (int b = 0; b < ds.num_bundles; ++b) {
      if (!active_bundle[static_cast<std::size_t>(b)]) continue;
      const double r = overlap_ratio(hist[static_cast<std::size_t>(u)], items[static_cast<std::size_t>(b)]);
      if (ds.ub.contains(u, b)) {
        pos += r, ++n_pos;
      } else {
        neg += r, ++n_neg;
      }
    }
  }
  return {n_pos ? pos / static_cast<double>(n_pos) : 0.0, n_neg ? neg / static_cast<double>(n_neg) : 0.0};
}

void write_dataset(const std::filesystem::path& dir, const InteractionDataset& ds, const KeyValues& provenance) {
  std::filesystem::create_directories(dir);
  write_pairs(dir / "user_bundle.txt", ds.ub);
  write_pairs(dir / "user_item.txt", ds.ui);
  write_pairs(dir / "bundle_item.txt", ds.bi);
  write_key_values(dir / "provenance.txt", provenance);
}

}  // namespace suger
