#pragma once

#include "suger/data.hpp"
#include "suger/graph_store.hpp"
#include "suger/model.hpp"
#include "suger/subgraph.hpp"
#include "suger/training.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace suger {

// Preference of `user` for `bundle`; larger ranks first.
using Scorer = std::function<double(int user, int bundle)>;

struct RankingTask {
  int user = 0;
  std::vector<int> relevant;    // sorted test positives
  std::vector<int> candidates;  // ascending bundle ids, train positives excluded
};

struct RankedBundle {
  int bundle;
  double score;
};

// Descending score; equal scores ordered by ascending bundle id.
std::vector<RankedBundle> rank_bundles(const Scorer& scorer, const RankingTask& task);

// `ranked` holds bundle ids best first; `relevant` must be nonempty.
double recall_at_k(const std::vector<int>& ranked, const std::vector<int>& relevant, int k);
double ndcg_at_k(const std::vector<int>& ranked, const std::vector<int>& relevant, int k);

struct CandidatePolicy {
  enum class Kind { kAll, kSampled };
  Kind kind = Kind::kAll;
  int sample_size = 100;  // non-relevant candidates per user when sampled
  std::uint64_t seed = 0;
};

struct EvalConfig {
  std::vector<int> ks{20, 40, 80};
  CandidatePolicy policy{};
  SamplingCaps caps{};
  std::uint64_t extract_seed = 0;
  int threads = 1;
};

struct MetricsReport {
  std::vector<int> ks;
  std::map<int, double> recall;
  std::map<int, double> ndcg;
  std::size_t users_evaluated = 0;
  std::size_t users_skipped = 0;
  std::string dataset;
  std::string checkpoint;
  std::string mode = "basic";
  std::map<std::string, std::string> metadata;
};

// One task per user with at least one test positive, in ascending user order.
std::vector<RankingTask> build_ranking_tasks(const Split& split, const CandidatePolicy& policy,
                                             std::size_t* skipped = nullptr);

MetricsReport evaluate(const Scorer& scorer, const Split& split, const EvalConfig& cfg);

// Probability from inference-mode extraction followed by a forward pass.
Scorer model_scorer(const GraphStore& store, const ModelParams& params, const ModelConfig& config,
                    SamplingCaps caps, std::uint64_t extract_seed);

// Training-split degree of each bundle.
Scorer popularity_scorer(const Split& split);

// 1 for test positives, 0 otherwise. Test hook: yields perfect metrics.
Scorer oracle_scorer(const Split& split);

MetricsReport evaluate_model(const ModelParams& params, const ModelConfig& config, const Split& split,
                             const EvalConfig& cfg);

// Throws Error when the checkpoint cannot drive extraction at `target`.
void check_transfer_compatible(const ModelConfig& checkpoint_config, const ModelConfig& target);

// Shared tensors come from the source checkpoint; target entities get fresh
// Gaussian(0, sigma_init^2) free embeddings drawn from `embedding_seed`.
MetricsReport transfer_evaluate(const Checkpoint& source, const Split& target, const ModelConfig& target_config,
                                const EvalConfig& cfg, std::uint64_t embedding_seed);

// JSON object with dataset, checkpoint, mode, users_evaluated, users_skipped,
// recall@K / ndcg@K and a meta object.
std::string report_to_json(const MetricsReport& report);
MetricsReport report_from_json(std::string_view text);

}  // namespace suger
