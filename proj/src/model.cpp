#include "suger/model.hpp"

#include "suger/rng.hpp"

#include <algorithm>
#include <cmath>

namespace suger {

void ModelConfig::validate() const {
  if (d <= 0 || d % 2 != 0) throw Error("model: d must be a positive even number");
  if (layers < 1) throw Error("model: layers must be >= 1");
  if (depth < 1) throw Error("model: depth must be >= 1");
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw Error("model: leaky_slope must lie in (0,1)");
  if (type_dim + free_dim != d) throw Error("model: type_dim + free_dim must equal d");
  if (type_dim < 3 * depth + 2) throw Error("model: type_dim must be >= 3*depth + 2");
  if (free_dim < 0) throw Error("model: free_dim must be >= 0");
  if (hidden < 1) throw Error("model: hidden must be >= 1");
  if (!(sigma_init >= 0.0)) throw Error("model: sigma_init must be >= 0");
}

Matrix& ModelParams::free_table(EntityClass c) {
  switch (c) {
    case EntityClass::kUser: return user_free;
    case EntityClass::kBundle: return bundle_free;
    case EntityClass::kItem: return item_free;
  }
  return user_free;
}

const Matrix& ModelParams::free_table(EntityClass c) const {
  return const_cast<ModelParams*>(this)->free_table(c);
}

bool ModelParams::all_finite() const {
  if (!user_free.allFinite() || !bundle_free.allFinite() || !item_free.allFinite()) return false;
  for (const auto& l : layers) {
    for (const auto& w : l.weight) if (!w.allFinite()) return false;
    for (const auto& c : l.bias) if (!c.allFinite()) return false;
  }
  return mlp1.allFinite() && mlp2.allFinite();
}

namespace {

void fill_gaussian(Matrix& m, double sigma, Rng& rng) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = sigma * rng.normal();
}

// Glorot uniform.
void fill_glorot(Eigen::Ref<Matrix> m, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = limit * (2.0 * rng.uniform() - 1.0);
  }
}

}  // namespace

ModelParams init_params(const ModelConfig& config, int num_users, int num_bundles, int num_items,
                        std::uint64_t seed) {
  config.validate();
  ModelParams p;
  resample_free_embeddings(p, config, num_users, num_bundles, num_items, mix_seed(seed, 1));

  Rng rng(mix_seed(seed, 2));
  p.layers.resize(static_cast<std::size_t>(config.layers));
  for (auto& layer : p.layers) {
    for (int r = 0; r < kNumRelations; ++r) {
      layer.weight[static_cast<std::size_t>(r)].resize(config.d, config.d);
      fill_glorot(layer.weight[static_cast<std::size_t>(r)], config.d, config.d, rng);
      layer.bias[static_cast<std::size_t>(r)] = Vector::Zero(config.d);
    }
  }
  p.mlp1.resize(config.hidden, config.subgraph_width());
  fill_glorot(p.mlp1, config.subgraph_width(), config.hidden, rng);
  Matrix mlp2(1, config.hidden);
  fill_glorot(mlp2, config.hidden, 1, rng);
  p.mlp2 = mlp2.row(0).transpose();
  return p;
}

void resample_free_embeddings(ModelParams& params, const ModelConfig& config, int num_users, int num_bundles,
                              int num_items, std::uint64_t seed) {
  Rng rng(seed);
  params.user_free.resize(num_users, config.free_dim);
  params.bundle_free.resize(num_bundles, config.free_dim);
  params.item_free.resize(num_items, config.free_dim);
  fill_gaussian(params.user_free, config.sigma_init, rng);
  fill_gaussian(params.bundle_free, config.sigma_init, rng);
  fill_gaussian(params.item_free, config.sigma_init, rng);
}

Matrix node_features(const EnclosingSubgraph& sg, const ModelParams& params, const ModelConfig& config) {
  Matrix h = Matrix::Zero(static_cast<Eigen::Index>(sg.num_nodes()), config.d);
  for (const auto& n : sg.nodes) {
    if (n.type_code < 0 || n.type_code >= config.type_dim) {
      throw Error("node_features: type code " + std::to_string(n.type_code) + " does not fit type_dim " +
                  std::to_string(config.type_dim));
    }
    h(n.local_index, n.type_code) = 1.0;
    h.row(n.local_index).tail(config.free_dim) = params.free_table(n.node.entity_class).row(n.node.id);
  }
  return h;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

namespace {

double overlap_count(std::span<const int> a, std::span<const int> b) {
  std::size_t i = 0, j = 0, n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++n, ++i, ++j;
    }
  }
  return static_cast<double>(n);
}

// Sums the L+1 column blocks of each half of mlp1 so that mlp1 applied to a
// repeated vector becomes a single d-wide product per half.
std::pair<Matrix, Matrix> folded_mlp1(const ModelParams& params, const ModelConfig& config) {
  const int d = config.d;
  const int stages = config.stages();
  Matrix user_part = Matrix::Zero(config.hidden, d);
  Matrix bundle_part = Matrix::Zero(config.hidden, d);
  for (int s = 0; s < stages; ++s) {
    user_part += params.mlp1.middleCols(s * d, d);
    bundle_part += params.mlp1.middleCols((stages + s) * d, d);
  }
  return {std::move(user_part), std::move(bundle_part)};
}

}  // namespace

SimilarityFactors similarity_factors(const GraphStore& store, const EnclosingSubgraph& sg, const Matrix& h,
                                     const ModelParams& params, const ModelConfig& config) {
  SimilarityFactors f;
  f.delta.assign(sg.num_nodes(), 1.0);
  f.rating.assign(sg.num_nodes(), 0.0);

  const auto [user_part, bundle_part] = folded_mlp1(params, config);
  const Vector user_hidden = user_part * h.row(EnclosingSubgraph::kCenterUser).transpose();

  int best = -1;
  for (const auto& n : sg.nodes) {
    if (n.node.entity_class != EntityClass::kBundle) continue;
    const Vector z = user_hidden + bundle_part * h.row(n.local_index).transpose();
    const double r = sigmoid(params.mlp2.dot(z.cwiseMax(0.0)));
    f.rating[static_cast<std::size_t>(n.local_index)] = r;
    if (best < 0) {
      best = n.local_index;
      continue;
    }
    const double rb = f.rating[static_cast<std::size_t>(best)];
    if (r > rb || (r == rb && n.node.id < sg.nodes[static_cast<std::size_t>(best)].node.id)) best = n.local_index;
  }
  f.base_local = best;
  if (best < 0) return f;

  const auto base_items = store.bundle_items(sg.nodes[static_cast<std::size_t>(best)].node.id);
  if (base_items.empty()) {
    f.degenerate = true;
    return f;
  }
  const double denom = static_cast<double>(base_items.size());
  for (const auto& n : sg.nodes) {
    if (n.node.entity_class != EntityClass::kBundle) continue;
    f.delta[static_cast<std::size_t>(n.local_index)] =
        1.0 + overlap_count(store.bundle_items(n.node.id), base_items) / denom;
  }
  return f;
}

namespace {

double leaky(double x, double slope) { return x > 0.0 ? x : slope * x; }
double leaky_grad(double x, double slope) { return x > 0.0 ? 1.0 : slope; }

double message_weight(Relation r, int src, const SimilarityFactors& factors) {
  return r == Relation::kBU ? factors.delta[static_cast<std::size_t>(src)] : 1.0;
}

}  // namespace

Matrix propagate_layer(const EnclosingSubgraph& sg, const Matrix& h, const LayerParams& layer,
                       const SimilarityFactors& factors, const ModelConfig& config, LayerTrace* trace) {
  const auto n = static_cast<int>(sg.num_nodes());
  const int d = config.d;

  std::vector<int> part_count(static_cast<std::size_t>(n), 0);
  std::array<std::vector<int>, kNumRelations> row_of;
  std::array<PartTrace, kNumRelations> parts;

  for (Relation r : kAllRelations) {
    const auto ri = static_cast<std::size_t>(index_of(r));
    auto& rows = row_of[ri];
    rows.assign(static_cast<std::size_t>(n), -1);
    auto& part = parts[ri];
    std::vector<int> degree;
    for (auto [s, t] : sg.edges[ri]) {
      if (rows[static_cast<std::size_t>(t)] < 0) {
        rows[static_cast<std::size_t>(t)] = static_cast<int>(part.targets.size());
        part.targets.push_back(t);
        degree.push_back(0);
        ++part_count[static_cast<std::size_t>(t)];
      }
      ++degree[static_cast<std::size_t>(rows[static_cast<std::size_t>(t)])];
    }
    part.inv_neighbors.resize(degree.size());
    for (std::size_t k = 0; k < degree.size(); ++k) part.inv_neighbors[k] = 1.0 / degree[k];

    const auto m = static_cast<Eigen::Index>(part.targets.size());
    part.input.resize(m, d);
    for (Eigen::Index k = 0; k < m; ++k) part.input.row(k) = h.row(part.targets[static_cast<std::size_t>(k)]);
    for (auto [s, t] : sg.edges[ri]) {
      part.input.row(rows[static_cast<std::size_t>(t)]) += message_weight(r, s, factors) * h.row(s);
    }
    if (m > 0) {
      part.pre.noalias() = part.input * layer.w(r).transpose();
      part.pre.rowwise() += layer.c(r).transpose();
    } else {
      part.pre.resize(0, d);
    }
  }

  Matrix next = Matrix::Zero(n, d);
  for (Relation r : kAllRelations) {
    const auto& part = parts[static_cast<std::size_t>(index_of(r))];
    for (std::size_t k = 0; k < part.targets.size(); ++k) {
      const int t = part.targets[k];
      const double scale = part.inv_neighbors[k] / part_count[static_cast<std::size_t>(t)];
      const auto pre = part.pre.row(static_cast<Eigen::Index>(k));
      auto out = next.row(t);
      for (int j = 0; j < d; ++j) out(j) += scale * leaky(pre(j), config.leaky_slope);
    }
  }
  for (int v = 0; v < n; ++v) {
    if (part_count[static_cast<std::size_t>(v)] == 0) next.row(v) = h.row(v);
  }

  if (trace != nullptr) {
    trace->parts = std::move(parts);
    trace->part_count = std::move(part_count);
    trace->factors = factors;
  }
  return next;
}

Vector aggregate(const std::vector<Matrix>& stages, const EnclosingSubgraph& sg) {
  (void)sg;  // centers live at fixed local indices
  const auto d = stages.front().cols();
  const auto s = static_cast<Eigen::Index>(stages.size());
  Vector e(2 * s * d);
  for (Eigen::Index k = 0; k < s; ++k) {
    e.segment(k * d, d) = stages[static_cast<std::size_t>(k)].row(EnclosingSubgraph::kCenterUser).transpose();
    e.segment((s + k) * d, d) =
        stages[static_cast<std::size_t>(k)].row(EnclosingSubgraph::kCenterBundle).transpose();
  }
  return e;
}

Score score(const Vector& e_sub, const ModelParams& params) {
  if (e_sub.size() != params.mlp1.cols()) {
    throw Error("score: subgraph embedding width " + std::to_string(e_sub.size()) + " does not match MLP input " +
                std::to_string(params.mlp1.cols()));
  }
  const Vector z = params.mlp1 * e_sub;
  Score s;
  s.logit = params.mlp2.dot(z.cwiseMax(0.0));
  s.probability = sigmoid(s.logit);
  return s;
}

ForwardTrace forward(const GraphStore& store, const EnclosingSubgraph& sg, const ModelParams& params,
                     const ModelConfig& config) {
  ForwardTrace tr;
  tr.sg = sg;
  tr.stages.reserve(static_cast<std::size_t>(config.stages()));
  tr.stages.push_back(node_features(sg, params, config));
  tr.layers.resize(static_cast<std::size_t>(config.layers));
  for (int l = 0; l < config.layers; ++l) {
    const Matrix& h = tr.stages.back();
    const SimilarityFactors f = similarity_factors(store, sg, h, params, config);
    Matrix next = propagate_layer(sg, h, params.layers[static_cast<std::size_t>(l)], f, config,
                                  &tr.layers[static_cast<std::size_t>(l)]);
    tr.stages.push_back(std::move(next));
  }
  tr.e_sub = aggregate(tr.stages, sg);
  tr.hidden_pre = params.mlp1 * tr.e_sub;
  tr.result.logit = params.mlp2.dot(tr.hidden_pre.cwiseMax(0.0));
  tr.result.probability = sigmoid(tr.result.logit);
  return tr;
}

Gradients Gradients::zeros_like(const ModelParams& params) {
  Gradients g;
  g.layers.resize(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    for (int r = 0; r < kNumRelations; ++r) {
      const auto ri = static_cast<std::size_t>(r);
      g.layers[l].weight[ri] = Matrix::Zero(params.layers[l].weight[ri].rows(), params.layers[l].weight[ri].cols());
      g.layers[l].bias[ri] = Vector::Zero(params.layers[l].bias[ri].size());
    }
  }
  g.mlp1 = Matrix::Zero(params.mlp1.rows(), params.mlp1.cols());
  g.mlp2 = Vector::Zero(params.mlp2.size());
  return g;
}

void Gradients::add(const Gradients& other, double s) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t r = 0; r < static_cast<std::size_t>(kNumRelations); ++r) {
      layers[l].weight[r] += s * other.layers[l].weight[r];
      layers[l].bias[r] += s * other.layers[l].bias[r];
    }
  }
  mlp1 += s * other.mlp1;
  mlp2 += s * other.mlp2;
  for (std::size_t c = 0; c < free_rows.size(); ++c) {
    for (const auto& [id, row] : other.free_rows[c]) {
      auto [it, inserted] = free_rows[c].try_emplace(id, s * row);
      if (!inserted) it->second += s * row;
    }
  }
}

void Gradients::scale(double s) {
  for (auto& l : layers) {
    for (auto& w : l.weight) w *= s;
    for (auto& c : l.bias) c *= s;
  }
  mlp1 *= s;
  mlp2 *= s;
  for (auto& rows : free_rows) {
    for (auto& [id, row] : rows) row *= s;
  }
}

void backward(const ForwardTrace& trace, const ModelParams& params, const ModelConfig& config, double upstream,
              Gradients& grads) {
  const int d = config.d;
  const int stages = config.stages();
  const auto n = static_cast<Eigen::Index>(trace.sg.num_nodes());

  // Scoring MLP.
  const Vector hidden = trace.hidden_pre.cwiseMax(0.0);
  grads.mlp2 += upstream * hidden;
  Vector dz = upstream * params.mlp2;
  for (Eigen::Index j = 0; j < dz.size(); ++j) {
    if (trace.hidden_pre(j) <= 0.0) dz(j) = 0.0;
  }
  grads.mlp1.noalias() += dz * trace.e_sub.transpose();
  const Vector de_sub = params.mlp1.transpose() * dz;

  // Concatenation scatters back into the center rows of every stage.
  std::vector<Matrix> dh(static_cast<std::size_t>(stages), Matrix::Zero(n, d));
  for (int s = 0; s < stages; ++s) {
    dh[static_cast<std::size_t>(s)].row(EnclosingSubgraph::kCenterUser) += de_sub.segment(s * d, d).transpose();
    dh[static_cast<std::size_t>(s)].row(EnclosingSubgraph::kCenterBundle) +=
        de_sub.segment((stages + s) * d, d).transpose();
  }

  for (int l = config.layers - 1; l >= 0; --l) {
    const auto& lt = trace.layers[static_cast<std::size_t>(l)];
    const auto& lp = params.layers[static_cast<std::size_t>(l)];
    auto& lg = grads.layers[static_cast<std::size_t>(l)];
    const Matrix& dnext = dh[static_cast<std::size_t>(l) + 1];
    Matrix& dcur = dh[static_cast<std::size_t>(l)];

    for (Eigen::Index v = 0; v < n; ++v) {
      if (lt.part_count[static_cast<std::size_t>(v)] == 0) dcur.row(v) += dnext.row(v);
    }
    for (Relation r : kAllRelations) {
      const auto ri = static_cast<std::size_t>(index_of(r));
      const auto& part = lt.parts[ri];
      const auto m = static_cast<Eigen::Index>(part.targets.size());
      if (m == 0) continue;
      Matrix dpre(m, d);
      std::vector<int> row_of(static_cast<std::size_t>(n), -1);
      for (Eigen::Index k = 0; k < m; ++k) {
        const int t = part.targets[static_cast<std::size_t>(k)];
        row_of[static_cast<std::size_t>(t)] = static_cast<int>(k);
        const double scale = part.inv_neighbors[static_cast<std::size_t>(k)] / lt.part_count[static_cast<std::size_t>(t)];
        for (int j = 0; j < d; ++j) {
          dpre(k, j) = scale * dnext(t, j) * leaky_grad(part.pre(k, j), config.leaky_slope);
        }
      }
      lg.weight[ri].noalias() += dpre.transpose() * part.input;
      lg.bias[ri] += dpre.colwise().sum().transpose();
      const Matrix dinput = dpre * lp.weight[ri];
      for (Eigen::Index k = 0; k < m; ++k) dcur.row(part.targets[static_cast<std::size_t>(k)]) += dinput.row(k);
      for (auto [s, t] : trace.sg.edges[ri]) {
        dcur.row(s) += message_weight(r, s, lt.factors) * dinput.row(row_of[static_cast<std::size_t>(t)]);
      }
    }
  }

  const Matrix& dh0 = dh.front();
  for (const auto& node : trace.sg.nodes) {
    const Vector row = dh0.row(node.local_index).tail(config.free_dim).transpose();
    auto& rows = grads.rows(node.node.entity_class);
    auto [it, inserted] = rows.try_emplace(node.node.id, row);
    if (!inserted) it->second += row;
  }
}

}  // namespace suger
