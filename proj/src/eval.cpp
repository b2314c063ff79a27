#include "suger/eval.hpp"

#include "suger/parallel.hpp"
#include "suger/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <memory>

namespace suger {

std::vector<RankedBundle> rank_bundles(const Scorer& scorer, const RankingTask& task) {
  std::vector<RankedBundle> out;
  out.reserve(task.candidates.size());
  for (int b : task.candidates) out.push_back({b, scorer(task.user, b)});
  std::stable_sort(out.begin(), out.end(), [](const RankedBundle& a, const RankedBundle& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.bundle < b.bundle;
  });
  return out;
}

namespace {

void check_metric_args(const std::vector<int>& relevant, int k) {
  if (k < 1) throw Error("metric: K must be >= 1");
  if (relevant.empty()) throw Error("metric: relevant set is empty");
}

bool is_relevant(const std::vector<int>& relevant, int b) {
  return std::find(relevant.begin(), relevant.end(), b) != relevant.end();
}

}  // namespace

double recall_at_k(const std::vector<int>& ranked, const std::vector<int>& relevant, int k) {
  check_metric_args(relevant, k);
  const auto top = std::min(ranked.size(), static_cast<std::size_t>(k));
  std::size_t hits = 0;
  for (std::size_t p = 0; p < top; ++p) hits += is_relevant(relevant, ranked[p]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double ndcg_at_k(const std::vector<int>& ranked, const std::vector<int>& relevant, int k) {
  check_metric_args(relevant, k);
  const auto top = std::min(ranked.size(), static_cast<std::size_t>(k));
  double dcg = 0.0;
  for (std::size_t p = 0; p < top; ++p) {
    if (is_relevant(relevant, ranked[p])) dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  }
  double idcg = 0.0;
  const auto ideal = std::min(relevant.size(), static_cast<std::size_t>(k));
  for (std::size_t p = 0; p < ideal; ++p) idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  return dcg / idcg;
}

std::vector<RankingTask> build_ranking_tasks(const Split& split, const CandidatePolicy& policy,
                                             std::size_t* skipped) {
  std::vector<std::vector<int>> train_pos(static_cast<std::size_t>(split.num_users));
  std::vector<std::vector<int>> test_pos(static_cast<std::size_t>(split.num_users));
  for (auto [u, b] : split.train_ub.pairs) train_pos[static_cast<std::size_t>(u)].push_back(b);
  for (auto [u, b] : split.test_ub.pairs) test_pos[static_cast<std::size_t>(u)].push_back(b);

  std::vector<RankingTask> tasks;
  std::size_t n_skipped = 0;
  for (int u = 0; u < split.num_users; ++u) {
    const auto& rel = test_pos[static_cast<std::size_t>(u)];
    if (rel.empty()) {
      ++n_skipped;
      continue;
    }
    const auto& seen = train_pos[static_cast<std::size_t>(u)];
    RankingTask t;
    t.user = u;
    t.relevant = rel;
    std::vector<int> others;
    for (int b = 0; b < split.num_bundles; ++b) {
      if (std::binary_search(seen.begin(), seen.end(), b)) continue;
      if (std::binary_search(rel.begin(), rel.end(), b)) {
        t.candidates.push_back(b);
      } else {
        others.push_back(b);
      }
    }
    if (policy.kind == CandidatePolicy::Kind::kAll) {
      t.candidates.insert(t.candidates.end(), others.begin(), others.end());
    } else {
      Rng rng(mix_seed(policy.seed, static_cast<std::uint64_t>(u)));
      const int m = std::min(policy.sample_size, static_cast<int>(others.size()));
      for (int pos : rng.sample_positions(static_cast<int>(others.size()), m)) {
        t.candidates.push_back(others[static_cast<std::size_t>(pos)]);
      }
    }
    std::sort(t.candidates.begin(), t.candidates.end());
    tasks.push_back(std::move(t));
  }
  if (skipped != nullptr) *skipped = n_skipped;
  return tasks;
}

MetricsReport evaluate(const Scorer& scorer, const Split& split, const EvalConfig& cfg) {
  for (int k : cfg.ks) {
    if (k < 1) throw Error("evaluate: every K must be >= 1");
  }
  MetricsReport report;
  report.ks = cfg.ks;
  const auto tasks = build_ranking_tasks(split, cfg.policy, &report.users_skipped);
  if (tasks.empty()) throw Error("evaluate: no user has a test positive");

  const std::size_t nk = cfg.ks.size();
  std::vector<double> recall(tasks.size() * nk), ndcg(tasks.size() * nk);
  parallel_for(tasks.size(), cfg.threads, [&](std::size_t t) {
    const auto ranked = rank_bundles(scorer, tasks[t]);
    std::vector<int> ids;
    ids.reserve(ranked.size());
    for (const auto& r : ranked) ids.push_back(r.bundle);
    for (std::size_t j = 0; j < nk; ++j) {
      recall[t * nk + j] = recall_at_k(ids, tasks[t].relevant, cfg.ks[j]);
      ndcg[t * nk + j] = ndcg_at_k(ids, tasks[t].relevant, cfg.ks[j]);
    }
  });

  for (std::size_t j = 0; j < nk; ++j) {
    double r = 0.0, n = 0.0;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      r += recall[t * nk + j];
      n += ndcg[t * nk + j];
    }
    report.recall[cfg.ks[j]] = r / static_cast<double>(tasks.size());
    report.ndcg[cfg.ks[j]] = n / static_cast<double>(tasks.size());
  }
  report.users_evaluated = tasks.size();
  report.metadata["candidates"] = cfg.policy.kind == CandidatePolicy::Kind::kAll ? "all" : "sampled";
  report.metadata["extract_seed"] = std::to_string(cfg.extract_seed);
  report.metadata["neighbor_cap"] =
      cfg.caps.per_relation == SamplingCaps::kUnlimited ? "unlimited" : std::to_string(cfg.caps.per_relation);
  report.metadata["split_seed"] = std::to_string(split.seed);
  return report;
}

Scorer model_scorer(const GraphStore& store, const ModelParams& params, const ModelConfig& config,
                    SamplingCaps caps, std::uint64_t extract_seed) {
  return [&store, &params, config, caps, extract_seed](int u, int b) {
    const auto sg = extract_subgraph(store, u, b, config.depth, ExtractMode::kInference, caps, extract_seed);
    return forward(store, sg, params, config).result.probability;
  };
}

Scorer popularity_scorer(const Split& split) {
  auto degree = std::make_shared<std::vector<double>>(static_cast<std::size_t>(split.num_bundles), 0.0);
  for (auto [u, b] : split.train_ub.pairs) (*degree)[static_cast<std::size_t>(b)] += 1.0;
  return [degree](int, int b) { return (*degree)[static_cast<std::size_t>(b)]; };
}

Scorer oracle_scorer(const Split& split) {
  auto test = std::make_shared<PairList>(split.test_ub);
  return [test](int u, int b) { return test->contains(u, b) ? 1.0 : 0.0; };
}

MetricsReport evaluate_model(const ModelParams& params, const ModelConfig& config, const Split& split,
                             const EvalConfig& cfg) {
  const GraphStore store = GraphStore::build(split);
  return evaluate(model_scorer(store, params, config, cfg.caps, cfg.extract_seed), split, cfg);
}

void check_transfer_compatible(const ModelConfig& ck, const ModelConfig& target) {
  auto mismatch = [](const char* what, auto a, auto b) {
    throw Error(std::string("transfer: checkpoint ") + what + "=" + std::to_string(a) + " but target config has " +
                std::to_string(b));
  };
  if (ck.d != target.d) mismatch("d", ck.d, target.d);
  if (ck.layers != target.layers) mismatch("layers", ck.layers, target.layers);
  if (ck.type_dim != target.type_dim) mismatch("type_dim", ck.type_dim, target.type_dim);
  if (ck.free_dim != target.free_dim) mismatch("free_dim", ck.free_dim, target.free_dim);
  if (ck.hidden != target.hidden) mismatch("hidden", ck.hidden, target.hidden);
  if (ck.depth != target.depth) mismatch("depth", ck.depth, target.depth);
  if (ck.leaky_slope != target.leaky_slope) mismatch("leaky_slope", ck.leaky_slope, target.leaky_slope);
}

MetricsReport transfer_evaluate(const Checkpoint& source, const Split& target, const ModelConfig& target_config,
                                const EvalConfig& cfg, std::uint64_t embedding_seed) {
  check_transfer_compatible(source.config, target_config);
  ModelParams params = source.params;
  resample_free_embeddings(params, source.config, target.num_users, target.num_bundles, target.num_items,
                           embedding_seed);
  MetricsReport report = evaluate_model(params, source.config, target, cfg);
  report.mode = "transfer";
  report.metadata["embedding_seed"] = std::to_string(embedding_seed);
  return report;
}

std::string report_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["dataset"] = report.dataset;
  j["checkpoint"] = report.checkpoint;
  j["mode"] = report.mode;
  j["users_evaluated"] = report.users_evaluated;
  j["users_skipped"] = report.users_skipped;
  for (int k : report.ks) {
    j["recall@" + std::to_string(k)] = report.recall.at(k);
    j["ndcg@" + std::to_string(k)] = report.ndcg.at(k);
  }
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [key, v] : report.metadata) meta[key] = v;
  j["meta"] = meta;
  return j.dump(2) + "\n";
}

MetricsReport report_from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  MetricsReport r;
  r.dataset = j.at("dataset").get<std::string>();
  r.checkpoint = j.at("checkpoint").get<std::string>();
  r.mode = j.at("mode").get<std::string>();
  r.users_evaluated = j.at("users_evaluated").get<std::size_t>();
  r.users_skipped = j.at("users_skipped").get<std::size_t>();
  for (const auto& [key, v] : j.items()) {
    if (key.rfind("recall@", 0) == 0) {
      const int k = std::stoi(key.substr(7));
      r.ks.push_back(k);
      r.recall[k] = v.get<double>();
    } else if (key.rfind("ndcg@", 0) == 0) {
      r.ndcg[std::stoi(key.substr(5))] = v.get<double>();
    }
  }
  std::sort(r.ks.begin(), r.ks.end());
  if (j.contains("meta")) {
    for (const auto& [key, v] : j.at("meta").items()) r.metadata[key] = v.get<std::string>();
  }
  return r;
}

}  // namespace suger
