#pragma once

#include "suger/data.hpp"
#include "suger/graph_store.hpp"
#include "suger/model.hpp"
#include "suger/subgraph.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace suger {

struct TrainConfig {
  double learning_rate = 3e-5;
  double weight_decay = 2e-7;   // decoupled, applied by the optimizer
  double bpr_lambda = 1e-5;     // L2 inside the loss
  int epochs = 20;
  int batch_size = 32;
  std::uint64_t base_seed = 42;
  SamplingCaps caps{};
  int threads = 1;  // 0 = hardware concurrency; results do not depend on it

  void validate() const;
};

// Sum of squares of every tensor a (pos, neg) pair touches: all relation and
// MLP tensors plus the free rows of entities present in either subgraph.
double regularization_norm_sq(const ModelParams& params, const EnclosingSubgraph& pos,
                              const EnclosingSubgraph& neg);

// -ln sigmoid(pos - neg) + lambda * reg_norm_sq
double bpr_loss(double pos_logit, double neg_logit, double reg_norm_sq, double lambda);

struct PairGradient {
  double loss = 0.0;
  Gradients grads;
};

// Exact gradient of bpr_loss for one triple; both traces must come from the
// same parameter snapshot.
PairGradient bpr_backward(const ForwardTrace& pos, const ForwardTrace& neg, const ModelParams& params,
                          const ModelConfig& config, double lambda);

struct AdamState {
  ModelParams m;
  ModelParams v;
  std::int64_t step = 0;

  static AdamState zeros_like(const ModelParams& params);
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

// One Adam step with decoupled weight decay. Rows of the free tables absent
// from `grads` are updated with a zero gradient.
void adam_step(ModelParams& params, AdamState& state, const Gradients& grads, double learning_rate,
               double weight_decay);

struct Checkpoint {
  ModelConfig config;
  int num_users = 0;
  int num_bundles = 0;
  int num_items = 0;
  ModelParams params;
  AdamState adam;
  std::uint64_t base_seed = 0;
  int epoch = 0;  // completed epochs
};

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  double seconds = 0.0;
  std::size_t triples = 0;
  std::size_t skipped = 0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&, const Checkpoint&)>;

// Fresh run when `resume` is null; otherwise continues from its epoch up to
// tcfg.epochs. Fully determined by tcfg.base_seed.
TrainResult train(const Split& split, const GraphStore& store, const ModelConfig& config, const TrainConfig& tcfg,
                  const Checkpoint* resume = nullptr, const EpochCallback& on_epoch = {});

// Little-endian "SGRC" container of named float64 tensors.
inline constexpr std::uint32_t kCheckpointVersion = 1;
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// `epoch mean_loss wallclock_seconds` per line.
void write_loss_log(const std::filesystem::path& path, const std::vector<EpochLog>& log);

}  // namespace suger
