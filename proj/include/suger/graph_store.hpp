#pragma once

#include "suger/data.hpp"
#include "suger/types.hpp"

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

namespace suger {

// Immutable tripartite adjacency built from the training split. Each of the
// six directed relations is stored as a CSR table with sorted target lists.
class GraphStore {
 public:
  GraphStore() = default;

  // Uses train_ub, ui and bi only; test pairs never enter the store.
  static GraphStore build(const Split& split);
  static GraphStore build(int num_users, int num_bundles, int num_items, const PairList& ub,
                          const PairList& ui, const PairList& bi);

  int count(EntityClass c) const { return counts_[static_cast<std::size_t>(c)]; }
  int num_users() const { return count(EntityClass::kUser); }
  int num_bundles() const { return count(EntityClass::kBundle); }
  int num_items() const { return count(EntityClass::kItem); }

  // Throws if the node's class is not the relation's source class or the id
  // is out of range.
  std::span<const int> neighbors(NodeRef node, Relation rel) const;

  // Unchecked variant for hot loops; caller guarantees class and range.
  std::span<const int> neighbors_unchecked(int id, Relation rel) const {
    const auto& t = tables_[static_cast<std::size_t>(index_of(rel))];
    return {t.targets.data() + t.offsets[static_cast<std::size_t>(id)],
            t.targets.data() + t.offsets[static_cast<std::size_t>(id) + 1]};
  }

  std::span<const int> bundle_items(int bundle) const;

  std::size_t num_edges(Relation rel) const {
    return tables_[static_cast<std::size_t>(index_of(rel))].targets.size();
  }

  bool has_edge(Relation rel, int src, int dst) const;

  // One line per edge: `<relation> <src> <dst>`.
  void dump(std::ostream& os) const;

 private:
  struct Csr {
    std::vector<std::size_t> offsets;
    std::vector<int> targets;
  };

  static Csr make_csr(int num_sources, std::vector<std::pair<int, int>> edges);

  std::array<int, 3> counts_{};
  std::array<Csr, kNumRelations> tables_{};
};

}  // namespace suger
