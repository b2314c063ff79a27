#pragma once

#include "suger/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace suger {

enum class PairKind : std::uint8_t { kUserBundle = 0, kUserItem, kBundleItem };

std::string_view to_string(PairKind k);

// A deduplicated, sorted set of (left, right) id pairs for one relation.
struct PairList {
  PairKind kind = PairKind::kUserBundle;
  std::vector<std::pair<int, int>> pairs;  // sorted ascending, unique
  std::size_t duplicates_dropped = 0;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  bool contains(int left, int right) const;

  // Sorts and deduplicates `raw`, counting the dropped duplicates.
  static PairList from_pairs(PairKind kind, std::vector<std::pair<int, int>> raw);
};

struct InteractionDataset {
  int num_users = 0;
  int num_bundles = 0;
  int num_items = 0;
  PairList ub{PairKind::kUserBundle, {}, 0};
  PairList ui{PairKind::kUserItem, {}, 0};
  PairList bi{PairKind::kBundleItem, {}, 0};
  // Bundles referenced by ub that have no item in bi. Reported, never dropped.
  std::vector<int> bundles_without_items;
};

// Original id for each dense index, per entity class.
struct IdMapping {
  std::vector<int> users;
  std::vector<int> bundles;
  std::vector<int> items;
};

struct Split {
  PairList train_ub{PairKind::kUserBundle, {}, 0};
  PairList test_ub{PairKind::kUserBundle, {}, 0};
  PairList ui{PairKind::kUserItem, {}, 0};
  PairList bi{PairKind::kBundleItem, {}, 0};
  int num_users = 0;
  int num_bundles = 0;
  int num_items = 0;
  double split_ratio = 0.6;
  std::uint64_t seed = 0;
};

struct TrainingTriple {
  int user;
  int pos_bundle;
  int neg_bundle;

  friend bool operator==(const TrainingTriple&, const TrainingTriple&) = default;
};

struct NegativeSample {
  std::vector<TrainingTriple> triples;
  std::vector<int> skipped_users;  // one entry per skipped positive
};

// Reads a pair-per-line file. Blank lines are ignored.
PairList load_interactions(const std::filesystem::path& path, PairKind kind);
PairList parse_interactions(std::string_view text, PairKind kind);

// Counts are 1 + max observed id per class unless an explicit count is given
// (pass -1 to infer).
InteractionDataset build_dataset(PairList ub, PairList ui, PairList bi, int num_users = -1,
                                 int num_bundles = -1, int num_items = -1);

// Renumbers ids to dense 0-based indices, ordered by original id.
std::pair<InteractionDataset, IdMapping> remap_dense(const InteractionDataset& ds);

Split split_train_test(const InteractionDataset& ds, double ratio, std::uint64_t seed);

NegativeSample sample_negatives(const Split& split, std::uint64_t seed);

void write_pairs(const std::filesystem::path& path, const PairList& pairs);

// Split directory: train_ub.txt, test_ub.txt, user_item.txt, bundle_item.txt,
// id_map_{user,bundle,item}.txt and split_meta.txt.
void save_split(const std::filesystem::path& dir, const Split& split, const IdMapping& mapping);
Split load_split(const std::filesystem::path& dir);

}  // namespace suger
