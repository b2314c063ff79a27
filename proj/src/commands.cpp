#include "suger/commands.hpp"

#include "suger/synth.hpp"

#include <fstream>
#include <ostream>

namespace suger {

namespace {

void write_effective_config(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  write_key_values(RunPaths{cfg.output_dir}.effective_config(), cfg.to_key_values());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

InteractionDataset load_source(const RunConfig& cfg, KeyValues& provenance, std::ostream& log) {
  if (cfg.source == RunConfig::Source::kSynth) {
    provenance = cfg.synth.to_key_values();
    provenance.set("synth.domain", cfg.synth_domain == RunConfig::Domain::kSingle ? "single"
                                   : cfg.synth_domain == RunConfig::Domain::kA    ? "a"
                                                                                  : "b");
    if (cfg.synth_domain == RunConfig::Domain::kSingle) return generate(cfg.synth);
    provenance.set("synth.seed_b", std::to_string(cfg.synth_seed_b));
    auto [a, b] = generate_domain_pair(cfg.synth, cfg.synth.seed, cfg.synth_seed_b);
    return cfg.synth_domain == RunConfig::Domain::kA ? std::move(a) : std::move(b);
  }
  for (const char* name : {"user_bundle.txt", "user_item.txt", "bundle_item.txt"}) {
    if (!std::filesystem::exists(cfg.dataset_dir / name)) {
      throw Error("prepare: missing input " + (cfg.dataset_dir / name).string());
    }
  }
  auto ub = load_interactions(cfg.dataset_dir / "user_bundle.txt", PairKind::kUserBundle);
  auto ui = load_interactions(cfg.dataset_dir / "user_item.txt", PairKind::kUserItem);
  auto bi = load_interactions(cfg.dataset_dir / "bundle_item.txt", PairKind::kBundleItem);
  log << "loaded " << ub.size() << " user-bundle, " << ui.size() << " user-item, " << bi.size()
      << " bundle-item pairs (duplicates dropped: " << ub.duplicates_dropped << ", " << ui.duplicates_dropped
      << ", " << bi.duplicates_dropped << ")\n";
  provenance.set("source_dir", cfg.dataset_dir.string());
  provenance.set("duplicates.user_bundle", std::to_string(ub.duplicates_dropped));
  provenance.set("duplicates.user_item", std::to_string(ui.duplicates_dropped));
  provenance.set("duplicates.bundle_item", std::to_string(bi.duplicates_dropped));
  return build_dataset(std::move(ub), std::move(ui), std::move(bi));
}

Checkpoint load_trained(const RunConfig& cfg) {
  const auto path = RunPaths{cfg.output_dir}.checkpoint();
  if (!std::filesystem::exists(path)) throw Error("missing checkpoint " + path.string() + " (run train first)");
  return load_checkpoint(path);
}

EvalConfig eval_config(const RunConfig& cfg) {
  EvalConfig e = cfg.eval;
  e.threads = cfg.threads();
  return e;
}

}  // namespace

Split cmd_prepare(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const RunPaths paths{cfg.output_dir};
  write_effective_config(cfg);

  KeyValues provenance;
  InteractionDataset raw = load_source(cfg, provenance, log);
  if (!raw.bundles_without_items.empty()) {
    std::string list;
    for (int b : raw.bundles_without_items) list += (list.empty() ? "" : ",") + std::to_string(b);
    log << "warning: " << raw.bundles_without_items.size() << " bundle(s) in user-bundle pairs have no items: "
        << list << "\n";
    provenance.set("bundles_without_items", list);
  }
  write_dataset(paths.data(), raw, provenance);

  auto [dense, mapping] = remap_dense(raw);
  Split split = split_train_test(dense, cfg.split_ratio, cfg.split_seed);
  save_split(paths.split(), split, mapping);
  log << "prepared " << split.num_users << " users, " << split.num_bundles << " bundles, " << split.num_items
      << " items; " << split.train_ub.size() << " train / " << split.test_ub.size() << " test user-bundle pairs\n";
  return split;
}

TrainResult cmd_train(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const RunPaths paths{cfg.output_dir};
  write_effective_config(cfg);
  const Split split = load_split(paths.split());
  const GraphStore store = GraphStore::build(split);

  TrainConfig tcfg = cfg.train;
  tcfg.threads = cfg.threads();
  Checkpoint resume;
  const bool resuming = !cfg.resume_from.empty();
  if (resuming) resume = load_checkpoint(cfg.resume_from);

  TrainResult result = train(split, store, cfg.model, tcfg, resuming ? &resume : nullptr,
                             [&](const EpochLog& e, const Checkpoint&) {
                               log << "epoch " << e.epoch << " loss " << e.mean_loss << " (" << e.triples
                                   << " triples, " << e.seconds << " s)\n";
                             });
  save_checkpoint(result.checkpoint, paths.checkpoint());
  write_loss_log(paths.loss_log(), result.log);
  return result;
}

MetricsReport cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const RunPaths paths{cfg.output_dir};
  write_effective_config(cfg);
  const Split split = load_split(paths.split());
  const EvalConfig ecfg = eval_config(cfg);

  MetricsReport report;
  switch (cfg.scorer) {
    case RunConfig::ScorerKind::kModel: {
      const Checkpoint ck = load_trained(cfg);
      check_transfer_compatible(ck.config, cfg.model);
      report = evaluate_model(ck.params, ck.config, split, ecfg);
      report.checkpoint = paths.checkpoint().string();
      break;
    }
    case RunConfig::ScorerKind::kPopularity:
      report = evaluate(popularity_scorer(split), split, ecfg);
      report.checkpoint = "popularity";
      break;
    case RunConfig::ScorerKind::kOracle:
      report = evaluate(oracle_scorer(split), split, ecfg);
      report.checkpoint = "oracle";
      break;
  }
  report.dataset = cfg.dataset_name;
  report.mode = "basic";
  write_text(paths.metrics(), report_to_json(report));
  log << "evaluated " << report.users_evaluated << " users\n";
  return report;
}

MetricsReport cmd_transfer(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (cfg.source_checkpoint.empty()) throw Error("transfer: transfer.source_checkpoint is not set");
  const RunPaths paths{cfg.output_dir};
  write_effective_config(cfg);
  const Split target = load_split(paths.split());
  const Checkpoint source = load_checkpoint(cfg.source_checkpoint);
  MetricsReport report = transfer_evaluate(source, target, cfg.model, eval_config(cfg), cfg.transfer_seed);
  report.dataset = cfg.dataset_name;
  report.checkpoint = cfg.source_checkpoint.string();
  write_text(paths.transfer_metrics(), report_to_json(report));
  log << "transfer-evaluated " << report.users_evaluated << " users\n";
  return report;
}

}  // namespace suger
