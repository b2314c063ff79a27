#include "suger/training.hpp"

#include "suger/parallel.hpp"
#include "suger/rng.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <type_traits>
#include <sstream>

namespace suger {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw Error("train: learning_rate must be >= 0");
  if (!(weight_decay >= 0.0) || !(bpr_lambda >= 0.0)) throw Error("train: regularizers must be >= 0");
  if (epochs < 0) throw Error("train: epochs must be >= 0");
  if (batch_size < 1) throw Error("train: batch_size must be >= 1");
  if (caps.per_relation < 1) throw Error("train: neighbor cap must be >= 1");
}

namespace {

double shared_norm_sq(const ModelParams& p) {
  double s = p.mlp1.squaredNorm() + p.mlp2.squaredNorm();
  for (const auto& l : p.layers) {
    for (const auto& w : l.weight) s += w.squaredNorm();
    for (const auto& c : l.bias) s += c.squaredNorm();
  }
  return s;
}

// Entities of either subgraph, each once, in (class, id) order.
std::set<std::pair<int, int>> touched_entities(const EnclosingSubgraph& a, const EnclosingSubgraph& b) {
  std::set<std::pair<int, int>> out;
  for (const auto* sg : {&a, &b}) {
    for (const auto& n : sg->nodes) out.emplace(static_cast<int>(n.node.entity_class), n.node.id);
  }
  return out;
}

}  // namespace

double regularization_norm_sq(const ModelParams& params, const EnclosingSubgraph& pos,
                              const EnclosingSubgraph& neg) {
  double s = shared_norm_sq(params);
  for (auto [c, id] : touched_entities(pos, neg)) {
    s += params.free_table(static_cast<EntityClass>(c)).row(id).squaredNorm();
  }
  return s;
}

double bpr_loss(double pos_logit, double neg_logit, double reg_norm_sq, double lambda) {
  return softplus(-(pos_logit - neg_logit)) + lambda * reg_norm_sq;
}

PairGradient bpr_backward(const ForwardTrace& pos, const ForwardTrace& neg, const ModelParams& params,
                          const ModelConfig& config, double lambda) {
  PairGradient out;
  out.grads = Gradients::zeros_like(params);
  const double diff = pos.result.logit - neg.result.logit;
  const double reg = lambda > 0.0 ? regularization_norm_sq(params, pos.sg, neg.sg) : 0.0;
  out.loss = bpr_loss(pos.result.logit, neg.result.logit, reg, lambda);

  // d/d(diff) of softplus(-diff)
  const double g = -sigmoid(-diff);
  backward(pos, params, config, g, out.grads);
  backward(neg, params, config, -g, out.grads);

  // Entities of both subgraphs always appear in free_rows after backward.
  if (lambda > 0.0) {
    auto& G = out.grads;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      for (std::size_t r = 0; r < static_cast<std::size_t>(kNumRelations); ++r) {
        G.layers[l].weight[r] += 2.0 * lambda * params.layers[l].weight[r];
        G.layers[l].bias[r] += 2.0 * lambda * params.layers[l].bias[r];
      }
    }
    G.mlp1 += 2.0 * lambda * params.mlp1;
    G.mlp2 += 2.0 * lambda * params.mlp2;
    for (int c = 0; c < 3; ++c) {
      const auto cls = static_cast<EntityClass>(c);
      for (auto& [id, row] : G.rows(cls)) row += 2.0 * lambda * params.free_table(cls).row(id).transpose();
    }
  }
  return out;
}

AdamState AdamState::zeros_like(const ModelParams& params) {
  auto zero = [](const ModelParams& p) {
    ModelParams z = p;
    z.user_free.setZero();
    z.bundle_free.setZero();
    z.item_free.setZero();
    for (auto& l : z.layers) {
      for (auto& w : l.weight) w.setZero();
      for (auto& c : l.bias) c.setZero();
    }
    z.mlp1.setZero();
    z.mlp2.setZero();
    return z;
  };
  return AdamState{zero(params), zero(params), 0};
}

namespace {

struct AdamCoeffs {
  double lr, wd, bc1, bc2;
};

void adam_update(double* p, double* m, double* v, const double* g, Eigen::Index n, const AdamCoeffs& k) {
  for (Eigen::Index i = 0; i < n; ++i) {
    const double gi = g != nullptr ? g[i] : 0.0;
    m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * gi;
    v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * gi * gi;
    p[i] -= k.lr * k.wd * p[i];
    p[i] -= k.lr * (m[i] / k.bc1) / (std::sqrt(v[i] / k.bc2) + kAdamEps);
  }
}

}  // namespace

void adam_step(ModelParams& params, AdamState& state, const Gradients& grads, double learning_rate,
               double weight_decay) {
  ++state.step;
  const auto t = static_cast<double>(state.step);
  const AdamCoeffs k{learning_rate, weight_decay, 1.0 - std::pow(kAdamBeta1, t), 1.0 - std::pow(kAdamBeta2, t)};

  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    for (std::size_t r = 0; r < static_cast<std::size_t>(kNumRelations); ++r) {
      auto& w = params.layers[l].weight[r];
      adam_update(w.data(), state.m.layers[l].weight[r].data(), state.v.layers[l].weight[r].data(),
                  grads.layers[l].weight[r].data(), w.size(), k);
      auto& c = params.layers[l].bias[r];
      adam_update(c.data(), state.m.layers[l].bias[r].data(), state.v.layers[l].bias[r].data(),
                  grads.layers[l].bias[r].data(), c.size(), k);
    }
  }
  adam_update(params.mlp1.data(), state.m.mlp1.data(), state.v.mlp1.data(), grads.mlp1.data(), params.mlp1.size(), k);
  adam_update(params.mlp2.data(), state.m.mlp2.data(), state.v.mlp2.data(), grads.mlp2.data(), params.mlp2.size(), k);

  for (int c = 0; c < 3; ++c) {
    const auto cls = static_cast<EntityClass>(c);
    Matrix& table = params.free_table(cls);
    Matrix& m = state.m.free_table(cls);
    Matrix& v = state.v.free_table(cls);
    const auto& rows = grads.rows(cls);
    const Eigen::Index width = table.cols();
    for (Eigen::Index id = 0; id < table.rows(); ++id) {
      auto it = rows.find(static_cast<int>(id));
      const double* g = it == rows.end() ? nullptr : it->second.data();
      adam_update(table.row(id).data(), m.row(id).data(), v.row(id).data(), g, width, k);
    }
  }
}

namespace {

struct TripleWork {
  double loss = 0.0;
  Gradients grads;
};

}  // namespace

TrainResult train(const Split& split, const GraphStore& store, const ModelConfig& config, const TrainConfig& tcfg,
                  const Checkpoint* resume, const EpochCallback& on_epoch) {
  config.validate();
  tcfg.validate();

  TrainResult result;
  Checkpoint& ck = result.checkpoint;
  if (resume != nullptr) {
    if (!(resume->config == config)) throw Error("train: checkpoint model config differs from the requested config");
    if (resume->base_seed != tcfg.base_seed) throw Error("train: checkpoint base seed differs from the requested seed");
    if (resume->num_users != split.num_users || resume->num_bundles != split.num_bundles ||
        resume->num_items != split.num_items) {
      throw Error("train: checkpoint entity counts differ from the split");
    }
    ck = *resume;
  } else {
    ck.config = config;
    ck.num_users = split.num_users;
    ck.num_bundles = split.num_bundles;
    ck.num_items = split.num_items;
    ck.params = init_params(config, split.num_users, split.num_bundles, split.num_items, mix_seed(tcfg.base_seed, 0x1417));
    ck.adam = AdamState::zeros_like(ck.params);
    ck.base_seed = tcfg.base_seed;
    ck.epoch = 0;
  }

  for (int epoch = ck.epoch; epoch < tcfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t epoch_seed = tcfg.base_seed + static_cast<std::uint64_t>(epoch);
    NegativeSample sample = sample_negatives(split, epoch_seed);
    if (sample.triples.empty()) throw Error("train: no training triples");
    auto& triples = sample.triples;
    Rng order_rng(mix_seed(epoch_seed, 0x0de7));
    order_rng.shuffle(triples);

    double loss_sum = 0.0;
    const auto extract_seed = mix_seed(tcfg.base_seed, static_cast<std::uint64_t>(epoch));
    for (std::size_t begin = 0; begin < triples.size(); begin += static_cast<std::size_t>(tcfg.batch_size)) {
      const std::size_t end = std::min(triples.size(), begin + static_cast<std::size_t>(tcfg.batch_size));
      std::vector<TripleWork> work(end - begin);
      parallel_for(work.size(), tcfg.threads, [&](std::size_t j) {
        const auto& t = triples[begin + j];
        const auto pos_sg =
            extract_subgraph(store, t.user, t.pos_bundle, config.depth, ExtractMode::kTrain, tcfg.caps, extract_seed);
        const auto neg_sg =
            extract_subgraph(store, t.user, t.neg_bundle, config.depth, ExtractMode::kTrain, tcfg.caps, extract_seed);
        const auto pos = forward(store, pos_sg, ck.params, config);
        const auto neg = forward(store, neg_sg, ck.params, config);
        auto pg = bpr_backward(pos, neg, ck.params, config, tcfg.bpr_lambda);
        work[j].loss = pg.loss;
        work[j].grads = std::move(pg.grads);
      });
      Gradients total = Gradients::zeros_like(ck.params);
      for (const auto& w : work) {
        total.add(w.grads);
        loss_sum += w.loss;
      }
      total.scale(1.0 / static_cast<double>(work.size()));
      adam_step(ck.params, ck.adam, total, tcfg.learning_rate, tcfg.weight_decay);
    }
    ck.epoch = epoch + 1;

    EpochLog entry;
    entry.epoch = epoch + 1;
    entry.mean_loss = loss_sum / static_cast<double>(triples.size());
    entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    entry.triples = triples.size();
    entry.skipped = sample.skipped_users.size();
    if (!std::isfinite(entry.mean_loss)) throw Error("train: non-finite loss at epoch " + std::to_string(epoch + 1));
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry, ck);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoint container

namespace {

constexpr char kMagic[4] = {'S', 'G', 'R', 'C'};

template <class T>
void put(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    out.append(bytes.data(), sizeof(T));
  } else {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.append(bytes, sizeof(T));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <class T>
  T get() {
    need(sizeof(T));
    std::array<char, sizeof(T)> raw;
    std::memcpy(raw.data(), bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    pos_ += sizeof(T);
    return std::bit_cast<T>(raw);
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("checkpoint: truncated file");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

template <class T>
struct TensorRef {
  std::string name;
  std::vector<std::uint64_t> dims;
  T* data;
};

std::uint64_t element_count(const std::vector<std::uint64_t>& dims) {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

// P is ModelParams or const ModelParams.
template <class P, class T = std::conditional_t<std::is_const_v<P>, const double, double>>
void add_params(std::vector<TensorRef<T>>& out, const std::string& prefix, P& p) {
  auto mat = [&](const std::string& name, auto& m) {
    out.push_back({prefix + name, {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())}, m.data()});
  };
  auto vec = [&](const std::string& name, auto& v) {
    out.push_back({prefix + name, {static_cast<std::uint64_t>(v.size())}, v.data()});
  };
  mat("free/user", p.user_free);
  mat("free/bundle", p.bundle_free);
  mat("free/item", p.item_free);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    for (Relation r : kAllRelations) {
      const std::string base = "layer" + std::to_string(l) + "/" + std::string(to_string(r));
      mat(base + "/weight", p.layers[l].w(r));
      vec(base + "/bias", p.layers[l].c(r));
    }
  }
  mat("mlp1", p.mlp1);
  vec("mlp2", p.mlp2);
}

struct Meta {
  std::vector<double> model_config;
  std::vector<double> counts;
  std::vector<double> train_state;
  std::vector<double> seed;
};

std::vector<double> encode_config(const ModelConfig& c) {
  return {static_cast<double>(c.d),        static_cast<double>(c.layers),   static_cast<double>(c.depth),
          c.leaky_slope,                   static_cast<double>(c.type_dim), static_cast<double>(c.free_dim),
          static_cast<double>(c.hidden),   c.sigma_init};
}

ModelConfig decode_config(const std::vector<double>& v) {
  if (v.size() != 8) throw FormatError("checkpoint: malformed model config");
  ModelConfig c;
  c.d = static_cast<int>(v[0]);
  c.layers = static_cast<int>(v[1]);
  c.depth = static_cast<int>(v[2]);
  c.leaky_slope = v[3];
  c.type_dim = static_cast<int>(v[4]);
  c.free_dim = static_cast<int>(v[5]);
  c.hidden = static_cast<int>(v[6]);
  c.sigma_init = v[7];
  return c;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
  Meta meta;
  meta.model_config = encode_config(ck.config);
  meta.counts = {static_cast<double>(ck.num_users), static_cast<double>(ck.num_bundles),
                 static_cast<double>(ck.num_items)};
  meta.train_state = {static_cast<double>(ck.epoch), static_cast<double>(ck.adam.step)};
  meta.seed = {static_cast<double>(ck.base_seed >> 32), static_cast<double>(ck.base_seed & 0xffffffffULL)};

  std::vector<TensorRef<const double>> tensors;
  auto meta_ref = [&](const std::string& name, const std::vector<double>& v) {
    tensors.push_back({name, {static_cast<std::uint64_t>(v.size())}, v.data()});
  };
  meta_ref("meta/model_config", meta.model_config);
  meta_ref("meta/counts", meta.counts);
  meta_ref("meta/train_state", meta.train_state);
  meta_ref("meta/base_seed", meta.seed);
  add_params(tensors, "", ck.params);
  add_params(tensors, "adam_m/", ck.adam.m);
  add_params(tensors, "adam_v/", ck.adam.v);

  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) put<std::uint64_t>(out, d);
    const auto n = element_count(t.dims);
    for (std::uint64_t i = 0; i < n; ++i) put<double>(out, t.data[i]);
  }
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (bytes.size() < 4 || bytes.substr(0, 4) != std::string_view(kMagic, 4)) {
    throw FormatError("checkpoint: bad magic (not an SGRC file)");
  }
  in.take(4);
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto count = in.get<std::uint32_t>();

  struct Raw {
    std::vector<std::uint64_t> dims;
    std::vector<double> data;
  };
  std::map<std::string, Raw> raw;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto name_len = in.get<std::uint32_t>();
    std::string name(in.take(name_len));
    const auto rank = in.get<std::uint32_t>();
    Raw r;
    for (std::uint32_t i = 0; i < rank; ++i) r.dims.push_back(in.get<std::uint64_t>());
    const auto n = element_count(r.dims);
    if (n > bytes.size()) throw FormatError("checkpoint: truncated file");
    r.data.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) r.data[i] = in.get<double>();
    raw.emplace(std::move(name), std::move(r));
  }
  if (!in.done()) throw FormatError("checkpoint: trailing bytes");

  auto vec = [&](const std::string& name) -> const std::vector<double>& {
    auto it = raw.find(name);
    if (it == raw.end()) throw FormatError("checkpoint: missing tensor " + name);
    return it->second.data;
  };

  Checkpoint ck;
  ck.config = decode_config(vec("meta/model_config"));
  ck.config.validate();
  const auto& counts = vec("meta/counts");
  const auto& state = vec("meta/train_state");
  const auto& seed = vec("meta/base_seed");
  if (counts.size() != 3 || state.size() != 2 || seed.size() != 2) throw FormatError("checkpoint: malformed metadata");
  ck.num_users = static_cast<int>(counts[0]);
  ck.num_bundles = static_cast<int>(counts[1]);
  ck.num_items = static_cast<int>(counts[2]);
  ck.epoch = static_cast<int>(state[0]);
  ck.base_seed = (static_cast<std::uint64_t>(seed[0]) << 32) | static_cast<std::uint64_t>(seed[1]);

  ck.params = init_params(ck.config, ck.num_users, ck.num_bundles, ck.num_items, 0);
  ck.adam = AdamState::zeros_like(ck.params);
  ck.adam.step = static_cast<std::int64_t>(state[1]);

  std::vector<TensorRef<double>> tensors;
  add_params(tensors, "", ck.params);
  add_params(tensors, "adam_m/", ck.adam.m);
  add_params(tensors, "adam_v/", ck.adam.v);
  for (auto& t : tensors) {
    auto it = raw.find(t.name);
    if (it == raw.end()) throw FormatError("checkpoint: missing tensor " + t.name);
    if (it->second.dims != t.dims) throw FormatError("checkpoint: shape mismatch for " + t.name);
    std::copy(it->second.data.begin(), it->second.data.end(), t.data);
  }
  return ck;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

void write_loss_log(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  for (const auto& e : log) out << e.epoch << ' ' << e.mean_loss << ' ' << std::setprecision(6) << e.seconds
                                << std::setprecision(17) << '\n';
}

}  // namespace suger
