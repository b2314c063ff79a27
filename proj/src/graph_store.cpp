#include "suger/graph_store.hpp"

#include <algorithm>
#include <ostream>

namespace suger {

std::string_view to_string(EntityClass c) {
  switch (c) {
    case EntityClass::kUser: return "user";
    case EntityClass::kBundle: return "bundle";
    case EntityClass::kItem: return "item";
  }
  return "?";
}

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::kUB: return "UB";
    case Relation::kBU: return "BU";
    case Relation::kUI: return "UI";
    case Relation::kIU: return "IU";
    case Relation::kBI: return "BI";
    case Relation::kIB: return "IB";
  }
  return "?";
}

GraphStore::Csr GraphStore::make_csr(int num_sources, std::vector<std::pair<int, int>> edges) {
  std::sort(edges.begin(), edges.end());
  Csr csr;
  csr.offsets.assign(static_cast<std::size_t>(num_sources) + 1, 0);
  csr.targets.reserve(edges.size());
  for (auto [s, t] : edges) {
    ++csr.offsets[static_cast<std::size_t>(s) + 1];
    csr.targets.push_back(t);
  }
  for (std::size_t i = 1; i < csr.offsets.size(); ++i) csr.offsets[i] += csr.offsets[i - 1];
  return csr;
}

GraphStore GraphStore::build(const Split& split) {
  return build(split.num_users, split.num_bundles, split.num_items, split.train_ub, split.ui, split.bi);
}

GraphStore GraphStore::build(int num_users, int num_bundles, int num_items, const PairList& ub,
                             const PairList& ui, const PairList& bi) {
  GraphStore g;
  g.counts_ = {num_users, num_bundles, num_items};

  auto forward_and_back = [&](const PairList& pl, Relation fwd, int n_left, int n_right) {
    std::vector<std::pair<int, int>> f, b;
    f.reserve(pl.size());
    b.reserve(pl.size());
    for (auto [l, r] : pl.pairs) {
      if (l < 0 || l >= n_left || r < 0 || r >= n_right) {
        throw Error(std::string("GraphStore: ") + std::string(to_string(pl.kind)) + " pair (" +
                    std::to_string(l) + "," + std::to_string(r) + ") outside entity counts");
      }
      f.emplace_back(l, r);
      b.emplace_back(r, l);
    }
    g.tables_[static_cast<std::size_t>(index_of(fwd))] = make_csr(n_left, std::move(f));
    g.tables_[static_cast<std::size_t>(index_of(reverse(fwd)))] = make_csr(n_right, std::move(b));
  };
  forward_and_back(ub, Relation::kUB, num_users, num_bundles);
  forward_and_back(ui, Relation::kUI, num_users, num_items);
  forward_and_back(bi, Relation::kBI, num_bundles, num_items);
  return g;
}

std::span<const int> GraphStore::neighbors(NodeRef node, Relation rel) const {
  if (node.entity_class != source_class(rel)) {
    throw Error("neighbors: relation " + std::string(to_string(rel)) + " does not start at a " +
                std::string(to_string(node.entity_class)));
  }
  if (node.id < 0 || node.id >= count(node.entity_class)) {
    throw Error("neighbors: " + std::string(to_string(node.entity_class)) + " id " +
                std::to_string(node.id) + " out of range");
  }
  return neighbors_unchecked(node.id, rel);
}

std::span<const int> GraphStore::bundle_items(int bundle) const {
  if (bundle < 0 || bundle >= num_bundles()) {
    throw Error("bundle_items: bundle id " + std::to_string(bundle) + " out of range");
  }
  return neighbors_unchecked(bundle, Relation::kBI);
}

bool GraphStore::has_edge(Relation rel, int src, int dst) const {
  if (src < 0 || src >= count(source_class(rel))) return false;
  auto n = neighbors_unchecked(src, rel);
  return std::binary_search(n.begin(), n.end(), dst);
}

void GraphStore::dump(std::ostream& os) const {
  for (Relation r : kAllRelations) {
    const int n = count(source_class(r));
    for (int s = 0; s < n; ++s) {
      for (int t : neighbors_unchecked(s, r)) os << to_string(r) << ' ' << s << ' ' << t << '\n';
    }
  }
}

}  // namespace suger
