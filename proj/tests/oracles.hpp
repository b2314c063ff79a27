#pragma once

// Independent reference implementations used only by tests. None of these
// call into the code paths they check.

#include "suger/graph_store.hpp"
#include "suger/model.hpp"
#include "suger/subgraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <vector>

namespace suger::oracle {

using Key = std::pair<int, int>;  // (entity class, id)

// Undirected BFS distance from {user, bundle} to every reachable node of the
// whole store.
inline std::map<Key, int> bfs_distances(const GraphStore& store, int user, int bundle) {
  std::map<Key, int> dist;
  std::deque<Key> queue;
  dist[{0, user}] = 0;
  dist[{1, bundle}] = 0;
  queue.push_back({0, user});
  queue.push_back({1, bundle});
  while (!queue.empty()) {
    const Key cur = queue.front();
    queue.pop_front();
    for (Relation r : kAllRelations) {
      if (static_cast<int>(source_class(r)) != cur.first) continue;
      for (int t : store.neighbors(NodeRef{static_cast<EntityClass>(cur.first), cur.second}, r)) {
        const Key nk{static_cast<int>(target_class(r)), t};
        if (dist.count(nk)) continue;
        dist[nk] = dist[cur] + 1;
        queue.push_back(nk);
      }
    }
  }
  return dist;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

using Vec = std::vector<double>;

inline Vec matvec(const Matrix& w, const Vec& x) {
  Vec y(static_cast<std::size_t>(w.rows()), 0.0);
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) y[static_cast<std::size_t>(i)] += w(i, j) * x[static_cast<std::size_t>(j)];
  }
  return y;
}

inline Vec row_of(const Matrix& m, int r) {
  Vec v(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) v[static_cast<std::size_t>(j)] = m(r, j);
  return v;
}

inline double mlp_logit(const ModelParams& p, const Vec& x) {
  const Vec z = matvec(p.mlp1, x);
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += p.mlp2(static_cast<Eigen::Index>(i)) * std::max(0.0, z[i]);
  return s;
}

// Overlap factors by explicit set intersection.
inline std::vector<double> deltas_for_base(const GraphStore& store, const EnclosingSubgraph& sg, int base_bundle_id) {
  std::vector<double> delta(sg.num_nodes(), 1.0);
  auto base_span = store.bundle_items(base_bundle_id);
  const std::set<int> base(base_span.begin(), base_span.end());
  if (base.empty()) return delta;
  for (const auto& n : sg.nodes) {
    if (n.node.entity_class != EntityClass::kBundle) continue;
    int common = 0;
    for (int i : store.bundle_items(n.node.id)) common += base.count(i) ? 1 : 0;
    delta[static_cast<std::size_t>(n.local_index)] = 1.0 + static_cast<double>(common) / static_cast<double>(base.size());
  }
  return delta;
}

// Literal transcription of the layer equations, one node at a time.
inline double reference_logit(const GraphStore& store, const EnclosingSubgraph& sg, const ModelParams& p,
                              const ModelConfig& c) {
  const std::size_t n = sg.num_nodes();
  const std::size_t d = static_cast<std::size_t>(c.d);
  const int stages = c.layers + 1;
  std::vector<std::vector<Vec>> H(1, std::vector<Vec>(n, Vec(d, 0.0)));
  for (const auto& node : sg.nodes) {
    Vec& h = H[0][static_cast<std::size_t>(node.local_index)];
    h[static_cast<std::size_t>(node.type_code)] = 1.0;
    const Matrix& table = node.node.entity_class == EntityClass::kUser     ? p.user_free
                          : node.node.entity_class == EntityClass::kBundle ? p.bundle_free
                                                                           : p.item_free;
    for (int j = 0; j < c.free_dim; ++j) h[static_cast<std::size_t>(c.type_dim + j)] = table(node.node.id, j);
  }

  auto leaky = [&](double x) { return x > 0 ? x : c.leaky_slope * x; };

  for (int l = 0; l < c.layers; ++l) {
    const auto& cur = H.back();
    // Base bundle from the MLP applied to repeated stage embeddings.
    int base = -1;
    double best = -1.0;
    for (const auto& node : sg.nodes) {
      if (node.node.entity_class != EntityClass::kBundle) continue;
      Vec x;
      for (int s = 0; s < stages; ++s) x.insert(x.end(), cur[0].begin(), cur[0].end());
      for (int s = 0; s < stages; ++s) {
        const auto& e = cur[static_cast<std::size_t>(node.local_index)];
        x.insert(x.end(), e.begin(), e.end());
      }
      const double r = sigmoid(mlp_logit(p, x));
      if (base < 0 || r > best || (r == best && node.node.id < sg.nodes[static_cast<std::size_t>(base)].node.id)) {
        base = node.local_index;
        best = r;
      }
    }
    const auto delta = deltas_for_base(store, sg, sg.nodes[static_cast<std::size_t>(base)].node.id);

    std::vector<Vec> next(n, Vec(d, 0.0));
    const auto& lp = p.layers[static_cast<std::size_t>(l)];
    for (std::size_t v = 0; v < n; ++v) {
      std::vector<Vec> parts;
      for (Relation r : kAllRelations) {
        std::vector<int> nbrs;
        for (auto [s, t] : sg.edges_of(r)) {
          if (t == static_cast<int>(v)) nbrs.push_back(s);
        }
        if (nbrs.empty()) continue;
        Vec m = cur[v];
        for (int s : nbrs) {
          const double w = r == Relation::kBU ? delta[static_cast<std::size_t>(s)] : 1.0;
          for (std::size_t j = 0; j < d; ++j) m[j] += w * cur[static_cast<std::size_t>(s)][j];
        }
        Vec out = matvec(lp.w(r), m);
        for (std::size_t j = 0; j < d; ++j) out[j] = leaky(out[j] + lp.c(r)(static_cast<Eigen::Index>(j))) / nbrs.size();
        parts.push_back(out);
      }
      if (parts.empty()) {
        next[v] = cur[v];
        continue;
      }
      for (const auto& part : parts) {
        for (std::size_t j = 0; j < d; ++j) next[v][j] += part[j] / static_cast<double>(parts.size());
      }
    }
    H.push_back(std::move(next));
  }

  Vec e_sub;
  for (int s = 0; s < stages; ++s) e_sub.insert(e_sub.end(), H[static_cast<std::size_t>(s)][0].begin(), H[static_cast<std::size_t>(s)][0].end());
  for (int s = 0; s < stages; ++s) e_sub.insert(e_sub.end(), H[static_cast<std::size_t>(s)][1].begin(), H[static_cast<std::size_t>(s)][1].end());
  return mlp_logit(p, e_sub);
}

inline double recall(const std::vector<int>& ranked, const std::vector<int>& relevant, int k) {
  const std::set<int> top(ranked.begin(), ranked.begin() + std::min<std::ptrdiff_t>(k, static_cast<std::ptrdiff_t>(ranked.size())));
  int hits = 0;
  for (int r : relevant) hits += top.count(r) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

inline double ndcg(const std::vector<int>& ranked, const std::vector<int>& relevant, int k) {
  double dcg = 0.0;
  for (int r : relevant) {
    auto it = std::find(ranked.begin(), ranked.end(), r);
    if (it == ranked.end()) continue;
    const auto pos = static_cast<int>(it - ranked.begin()) + 1;
    if (pos <= k) dcg += std::log(2.0) / std::log(pos + 1.0);
  }
  double idcg = 0.0;
  for (int p = 1; p <= std::min<int>(k, static_cast<int>(relevant.size())); ++p) idcg += std::log(2.0) / std::log(p + 1.0);
  return dcg / idcg;
}

}  // namespace suger::oracle
