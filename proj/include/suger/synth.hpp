#pragma once

#include "suger/data.hpp"
#include "suger/kv.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>

namespace suger {

// Planted generative rule: users build item histories mostly out of a few
// liked bundles, and a user-bundle positive appears with probability
//   min(1, affinity_strength * |history ∩ items(b)| / |items(b)| + noise_rate).
struct SynthConfig {
  int num_users = 500;
  int num_bundles = 300;
  int num_items = 1000;
  int bundle_size_min = 3;
  int bundle_size_max = 8;
  int items_per_user_min = 10;
  int items_per_user_max = 30;
  int liked_bundles_min = 1;
  int liked_bundles_max = 3;
  double liked_item_keep = 0.8;  // chance a liked bundle's item enters the history
  double affinity_strength = 0.9;
  double noise_rate = 0.005;
  std::uint64_t seed = 13;

  void validate() const;
  KeyValues to_key_values() const;
};

InteractionDataset generate(const SynthConfig& cfg);

// Two datasets from the same rule with different seeds. The second domain's
// ids start after the first domain's counts, so no id is shared.
std::pair<InteractionDataset, InteractionDataset> generate_domain_pair(const SynthConfig& cfg, std::uint64_t seed_a,
                                                                       std::uint64_t seed_b);

// |a ∩ b| / |b| for sorted id lists; 0 when b is empty.
double overlap_ratio(std::span<const int> history, std::span<const int> bundle_items);

struct OverlapStats {
  double positive_mean = 0.0;
  double negative_mean = 0.0;  // over all non-positive pairs
};

OverlapStats overlap_statistics(const InteractionDataset& ds);

// user_bundle.txt, user_item.txt, bundle_item.txt and provenance.txt.
void write_dataset(const std::filesystem::path& dir, const InteractionDataset& ds, const KeyValues& provenance);

}  // namespace suger
