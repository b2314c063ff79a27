#include "suger/subgraph.hpp"

#include "suger/rng.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_map>

namespace suger {

std::size_t EnclosingSubgraph::num_edges() const {
  std::size_t n = 0;
  for (const auto& e : edges) n += e.size();
  return n;
}

std::size_t RelationEdges::total() const {
  std::size_t n = 0;
  for (const auto& s : src) n += s.size();
  return n;
}

namespace {

constexpr std::uint64_t node_key(EntityClass c, int id) {
  return (static_cast<std::uint64_t>(c) << 32) | static_cast<std::uint32_t>(id);
}

}  // namespace

EnclosingSubgraph extract_subgraph(const GraphStore& store, int user, int bundle, int depth, ExtractMode mode,
                                   SamplingCaps caps, std::uint64_t seed) {
  if (user < 0 || user >= store.num_users()) throw Error("extract_subgraph: user id out of range");
  if (bundle < 0 || bundle >= store.num_bundles()) throw Error("extract_subgraph: bundle id out of range");
  if (depth < 1) throw Error("extract_subgraph: depth must be >= 1");
  if (caps.per_relation < 1) throw Error("extract_subgraph: neighbor cap must be >= 1");

  EnclosingSubgraph sg;
  sg.center_user = {EntityClass::kUser, user};
  sg.center_bundle = {EntityClass::kBundle, bundle};
  sg.depth = depth;
  sg.leakage_removed = mode == ExtractMode::kTrain;

  std::unordered_map<std::uint64_t, int> local;
  auto add = [&](EntityClass c, int id, int hop) {
    const int idx = static_cast<int>(sg.nodes.size());
    sg.nodes.push_back({NodeRef{c, id}, idx, hop, node_type_code(c, hop)});
    local.emplace(node_key(c, id), idx);
    return idx;
  };
  add(EntityClass::kUser, user, 0);
  add(EntityClass::kBundle, bundle, 0);

  // The centers are both at level 0, so following the center edge never adds
  // a node; it is skipped in both modes so that sampling sees identical lists.
  auto is_center_edge = [&](const NodeRef& n, Relation r, int target) {
    return (n.entity_class == EntityClass::kUser && n.id == user && r == Relation::kUB && target == bundle) ||
           (n.entity_class == EntityClass::kBundle && n.id == bundle && r == Relation::kBU && target == user);
  };

  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(user), static_cast<std::uint64_t>(bundle)));
  std::vector<int> frontier = {0, 1};
  std::vector<int> candidates;
  for (int hop = 1; hop <= depth && !frontier.empty(); ++hop) {
    std::vector<int> next;
    for (int li : frontier) {
      const NodeRef n = sg.nodes[static_cast<std::size_t>(li)].node;
      for (Relation r : kAllRelations) {
        if (source_class(r) != n.entity_class) continue;
        candidates.clear();
        for (int t : store.neighbors_unchecked(n.id, r)) {
          if (!is_center_edge(n, r, t)) candidates.push_back(t);
        }
        const int m = static_cast<int>(candidates.size());
        if (m > caps.per_relation) {
          auto keep = rng.sample_positions(m, caps.per_relation);
          for (std::size_t j = 0; j < keep.size(); ++j) candidates[j] = candidates[static_cast<std::size_t>(keep[j])];
          candidates.resize(keep.size());
        }
        const EntityClass tc = target_class(r);
        for (int t : candidates) {
          if (local.find(node_key(tc, t)) == local.end()) next.push_back(add(tc, t, hop));
        }
      }
    }
    frontier = std::move(next);
  }

  for (const auto& tn : sg.nodes) {
    for (Relation r : kAllRelations) {
      if (source_class(r) != tn.node.entity_class) continue;
      auto& out = sg.edges[static_cast<std::size_t>(index_of(r))];
      const EntityClass tc = target_class(r);
      for (int t : store.neighbors_unchecked(tn.node.id, r)) {
        auto it = local.find(node_key(tc, t));
        if (it == local.end()) continue;
        if (mode == ExtractMode::kTrain && is_center_edge(tn.node, r, t)) continue;
        out.emplace_back(tn.local_index, it->second);
      }
    }
  }
  for (auto& e : sg.edges) std::sort(e.begin(), e.end());
  return sg;
}

RelationEdges relation_edge_lists(const EnclosingSubgraph& sg) {
  RelationEdges out;
  for (Relation r : kAllRelations) {
    const auto ri = static_cast<std::size_t>(index_of(r));
    const auto& e = sg.edges[ri];
    out.src[ri].reserve(e.size());
    out.dst[ri].reserve(e.size());
    for (auto [s, t] : e) {
      out.src[ri].push_back(s);
      out.dst[ri].push_back(t);
    }
  }
  return out;
}

void write_subgraph(std::ostream& os, const EnclosingSubgraph& sg) {
  for (const auto& n : sg.nodes) {
    os << n.local_index << ' ' << to_string(n.node.entity_class) << ' ' << n.node.id << ' ' << n.hop << ' '
       << n.type_code << '\n';
  }
  for (Relation r : kAllRelations) {
    for (auto [s, t] : sg.edges_of(r)) os << to_string(r) << ' ' << s << ' ' << t << '\n';
  }
}

}  // namespace suger
