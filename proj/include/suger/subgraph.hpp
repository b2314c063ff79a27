#pragma once

#include "suger/graph_store.hpp"
#include "suger/types.hpp"

#include <array>
#include <climits>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace suger {

enum class ExtractMode : std::uint8_t { kTrain, kInference };

// Per-node, per-relation cap on neighbors followed during frontier expansion.
struct SamplingCaps {
  static constexpr int kUnlimited = INT_MAX;
  int per_relation = 50;

  static SamplingCaps unlimited() { return SamplingCaps{kUnlimited}; }
};

struct TypedNode {
  NodeRef node;
  int local_index;
  int hop;
  int type_code;

  friend bool operator==(const TypedNode&, const TypedNode&) = default;
};

// Type code of a node discovered at `hop` (hop >= 1), or of a center (hop 0).
constexpr int node_type_code(EntityClass c, int hop) {
  if (hop == 0) return c == EntityClass::kUser ? 0 : 1;
  switch (c) {
    case EntityClass::kBundle: return 3 * hop - 1;
    case EntityClass::kUser: return 3 * hop;
    case EntityClass::kItem: return 3 * hop + 1;
  }
  return -1;
}

using EdgeList = std::vector<std::pair<int, int>>;  // (source local, target local)

// k-hop typed neighborhood around one (user, bundle) pair. Local index 0 is
// the centered user and 1 the centered bundle.
struct EnclosingSubgraph {
  NodeRef center_user{EntityClass::kUser, 0};
  NodeRef center_bundle{EntityClass::kBundle, 0};
  int depth = 1;
  std::vector<TypedNode> nodes;
  std::array<EdgeList, kNumRelations> edges;
  bool leakage_removed = false;

  static constexpr int kCenterUser = 0;
  static constexpr int kCenterBundle = 1;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_edges() const;
  const EdgeList& edges_of(Relation r) const { return edges[static_cast<std::size_t>(index_of(r))]; }

  friend bool operator==(const EnclosingSubgraph&, const EnclosingSubgraph&) = default;
};

// Joint BFS from {u, b} at level 0 over the undirected view of the six
// relations; every store edge among the included nodes is materialized. In
// train mode the u<->b edge pair is left out and never followed.
EnclosingSubgraph extract_subgraph(const GraphStore& store, int user, int bundle, int depth, ExtractMode mode,
                                   SamplingCaps caps, std::uint64_t seed);

// Structure-of-arrays view of the per-relation edges.
struct RelationEdges {
  std::array<std::vector<int>, kNumRelations> src;
  std::array<std::vector<int>, kNumRelations> dst;

  std::size_t total() const;
};

RelationEdges relation_edge_lists(const EnclosingSubgraph& sg);

// Node lines `local_index class id hop type`, then edge lines `relation src dst`.
void write_subgraph(std::ostream& os, const EnclosingSubgraph& sg);

}  // namespace suger
