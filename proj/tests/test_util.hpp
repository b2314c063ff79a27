#pragma once

#include "suger/data.hpp"
#include "suger/graph_store.hpp"
#include "suger/model.hpp"
#include "suger/rng.hpp"

#include <vector>

namespace suger::testing {

struct RandomGraphSpec {
  int max_users = 8;
  int max_bundles = 8;
  int max_items = 10;
  double ub_density = 0.25;
  double ui_density = 0.2;
  double bi_density = 0.25;
};

struct RandomGraph {
  int num_users = 0;
  int num_bundles = 0;
  int num_items = 0;
  PairList ub{PairKind::kUserBundle, {}, 0};
  PairList ui{PairKind::kUserItem, {}, 0};
  PairList bi{PairKind::kBundleItem, {}, 0};

  GraphStore store() const { return GraphStore::build(num_users, num_bundles, num_items, ub, ui, bi); }
};

inline RandomGraph random_graph(std::uint64_t seed, const RandomGraphSpec& spec = {}) {
  Rng rng(seed);
  RandomGraph g;
  g.num_users = rng.uniform_int(1, spec.max_users);
  g.num_bundles = rng.uniform_int(1, spec.max_bundles);
  g.num_items = rng.uniform_int(1, spec.max_items);
  auto fill = [&](PairKind kind, int nl, int nr, double p) {
    std::vector<std::pair<int, int>> v;
    for (int a = 0; a < nl; ++a) {
      for (int b = 0; b < nr; ++b) {
        if (rng.uniform() < p) v.emplace_back(a, b);
      }
    }
    return PairList::from_pairs(kind, std::move(v));
  };
  g.ub = fill(PairKind::kUserBundle, g.num_users, g.num_bundles, spec.ub_density);
  g.ui = fill(PairKind::kUserItem, g.num_users, g.num_items, spec.ui_density);
  g.bi = fill(PairKind::kBundleItem, g.num_bundles, g.num_items, spec.bi_density);
  return g;
}

inline RandomGraph with_ub_edge(RandomGraph g, int u, int b, bool present) {
  auto pairs = g.ub.pairs;
  pairs.erase(std::remove(pairs.begin(), pairs.end(), std::pair{u, b}), pairs.end());
  if (present) pairs.emplace_back(u, b);
  g.ub = PairList::from_pairs(PairKind::kUserBundle, std::move(pairs));
  return g;
}

inline ModelConfig small_config(int layers, int depth = 1) {
  ModelConfig c;
  c.depth = depth;
  c.type_dim = 3 * depth + 2;
  c.d = c.type_dim % 2 == 0 ? c.type_dim + 4 : c.type_dim + 3;
  c.free_dim = c.d - c.type_dim;
  c.layers = layers;
  c.hidden = 6;
  c.leaky_slope = 0.1;
  c.sigma_init = 0.5;
  return c;
}

// Random nonzero biases so bias gradients and offsets are exercised.
inline void randomize_biases(ModelParams& p, std::uint64_t seed, double scale = 0.1) {
  Rng rng(seed);
  for (auto& l : p.layers) {
    for (auto& c : l.bias) {
      for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = scale * rng.normal();
    }
  }
}

// Every scalar parameter, in a fixed order shared with flatten_gradients.
inline std::vector<double*> flatten_params(ModelParams& p) {
  std::vector<double*> out;
  auto add = [&](auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data() + i);
  };
  add(p.user_free);
  add(p.bundle_free);
  add(p.item_free);
  for (auto& l : p.layers) {
    for (auto& w : l.weight) add(w);
    for (auto& c : l.bias) add(c);
  }
  add(p.mlp1);
  add(p.mlp2);
  return out;
}

inline std::vector<double> flatten_gradients(const Gradients& g, const ModelParams& shape) {
  std::vector<double> out;
  auto add_table = [&](EntityClass c) {
    const Matrix& t = shape.free_table(c);
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      auto it = g.rows(c).find(static_cast<int>(r));
      for (Eigen::Index j = 0; j < t.cols(); ++j) out.push_back(it == g.rows(c).end() ? 0.0 : it->second(j));
    }
  };
  auto add = [&](const auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data()[i]);
  };
  add_table(EntityClass::kUser);
  add_table(EntityClass::kBundle);
  add_table(EntityClass::kItem);
  for (const auto& l : g.layers) {
    for (const auto& w : l.weight) add(w);
    for (const auto& c : l.bias) add(c);
  }
  add(g.mlp1);
  add(g.mlp2);
  return out;
}

}  // namespace suger::testing
