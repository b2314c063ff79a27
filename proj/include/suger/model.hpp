#pragma once

#include "suger/graph_store.hpp"
#include "suger/subgraph.hpp"
#include "suger/types.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <vector>

namespace suger {

struct ModelConfig {
  int d = 64;            // per-stage embedding width
  int layers = 4;        // propagation layers L; L+1 stages are concatenated
  int depth = 1;         // subgraph hops k
  double leaky_slope = 0.01;
  int type_dim = 32;     // one-hot type block, zero padded
  int free_dim = 32;     // learned per-entity block
  int hidden = 128;      // MLP hidden width
  double sigma_init = 0.1;

  // Throws Error describing the first violated constraint.
  void validate() const;
  int stages() const { return layers + 1; }
  int subgraph_width() const { return 2 * stages() * d; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Relation weights are indexed by the relation the message arrives through:
//   IB item->bundle, UB user->bundle, IU item->user, BU bundle->user,
//   UI user->item, BI bundle->item.
struct LayerParams {
  std::array<Matrix, kNumRelations> weight;  // d x d
  std::array<Vector, kNumRelations> bias;    // d

  Matrix& w(Relation r) { return weight[static_cast<std::size_t>(index_of(r))]; }
  const Matrix& w(Relation r) const { return weight[static_cast<std::size_t>(index_of(r))]; }
  Vector& c(Relation r) { return bias[static_cast<std::size_t>(index_of(r))]; }
  const Vector& c(Relation r) const { return bias[static_cast<std::size_t>(index_of(r))]; }
};

struct ModelParams {
  Matrix user_free;    // |U| x free_dim
  Matrix bundle_free;  // |B| x free_dim
  Matrix item_free;    // |I| x free_dim
  std::vector<LayerParams> layers;
  Matrix mlp1;  // hidden x 2(L+1)d
  Vector mlp2;  // hidden

  Matrix& free_table(EntityClass c);
  const Matrix& free_table(EntityClass c) const;
  bool all_finite() const;
};

ModelParams init_params(const ModelConfig& config, int num_users, int num_bundles, int num_items,
                        std::uint64_t seed);

// Fresh Gaussian(0, sigma_init^2) free-embedding tables, leaving every shared
// tensor untouched.
void resample_free_embeddings(ModelParams& params, const ModelConfig& config, int num_users, int num_bundles,
                              int num_items, std::uint64_t seed);

// Row v = [one-hot(type_code) padded to type_dim | free row of the entity].
Matrix node_features(const EnclosingSubgraph& sg, const ModelParams& params, const ModelConfig& config);

struct SimilarityFactors {
  int base_local = -1;          // local index of b_t
  std::vector<double> delta;    // per local node; 1.0 for non-bundle nodes
  std::vector<double> rating;   // per local node; rating r_b for bundle nodes, 0 otherwise
  bool degenerate = false;      // b_t has no items, all deltas forced to 1
};

// Rates each bundle node with the scoring MLP applied to the stage embeddings
// of the centered user and the bundle, each repeated L+1 times, and weights
// bundles by their item overlap with the best-rated one.
SimilarityFactors similarity_factors(const GraphStore& store, const EnclosingSubgraph& sg, const Matrix& h,
                                     const ModelParams& params, const ModelConfig& config);

// Activations of one relation part at one layer.
struct PartTrace {
  std::vector<int> targets;          // local indices with a nonempty neighbor set
  std::vector<double> inv_neighbors; // 1 / |N_r(t)|
  Matrix input;                      // e_t + sum of (weighted) neighbor embeddings
  Matrix pre;                        // W input + c
};

struct LayerTrace {
  std::array<PartTrace, kNumRelations> parts;
  std::vector<int> part_count;  // present parts per node
  SimilarityFactors factors;
};

Matrix propagate_layer(const EnclosingSubgraph& sg, const Matrix& h, const LayerParams& layer,
                       const SimilarityFactors& factors, const ModelConfig& config, LayerTrace* trace = nullptr);

// [user stages 0..L | bundle stages 0..L] for the two centers.
Vector aggregate(const std::vector<Matrix>& stages, const EnclosingSubgraph& sg);

struct Score {
  double logit = 0.0;
  double probability = 0.5;
};

double sigmoid(double x);
// ln(1 + exp(x)) without overflow.
double softplus(double x);

Score score(const Vector& e_sub, const ModelParams& params);

struct ForwardTrace {
  EnclosingSubgraph sg;
  std::vector<Matrix> stages;  // H^0..H^L
  std::vector<LayerTrace> layers;
  Vector e_sub;
  Vector hidden_pre;
  Score result;
};

ForwardTrace forward(const GraphStore& store, const EnclosingSubgraph& sg, const ModelParams& params,
                     const ModelConfig& config);

// Gradients for one or more traces. Free-embedding rows are kept sparse.
struct Gradients {
  std::vector<LayerParams> layers;
  Matrix mlp1;
  Vector mlp2;
  std::array<std::map<int, Vector>, 3> free_rows;  // by EntityClass

  static Gradients zeros_like(const ModelParams& params);
  std::map<int, Vector>& rows(EntityClass c) { return free_rows[static_cast<std::size_t>(c)]; }
  const std::map<int, Vector>& rows(EntityClass c) const { return free_rows[static_cast<std::size_t>(c)]; }
  void add(const Gradients& other, double scale = 1.0);
  void scale(double s);
};

// Accumulates d(upstream * logit)/d(params) into `grads`. The similarity
// factors are piecewise constant in the parameters and receive no gradient.
void backward(const ForwardTrace& trace, const ModelParams& params, const ModelConfig& config, double upstream,
              Gradients& grads);

}  // namespace suger
