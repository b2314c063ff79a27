#pragma once

#include "suger/eval.hpp"
#include "suger/kv.hpp"
#include "suger/model.hpp"
#include "suger/synth.hpp"
#include "suger/training.hpp"

#include <filesystem>
#include <string>

namespace suger {

// Everything a `suger` subcommand needs, read from one `key = value` file.
// Keys (defaults in parentheses):
//   dataset.name (synthetic)     dataset.source: files | synth (synth)
//   dataset.dir                  directory with user_bundle.txt, user_item.txt, bundle_item.txt
//   synth.*                      SynthConfig fields, plus synth.domain: single | a | b (single)
//                                and synth.seed_b (the second domain's seed, 14)
//   split.ratio (0.6)  split.seed (7)
//   model.d (64) model.layers (4) model.depth (1) model.leaky_slope (0.01)
//   model.type_dim (32) model.free_dim (32) model.hidden (128) model.sigma_init (0.1)
//   train.learning_rate (3e-05) train.weight_decay (2e-07) train.bpr_lambda (1e-05)
//   train.epochs (20) train.batch_size (32) train.seed (42) train.threads (1; 0 = all cores)
//   train.resume_from ("")
//   sampling.neighbor_cap (50; 0 = unlimited)
//   eval.ks (20,40,80) eval.candidates: all | sampled (all) eval.sample_size (100)
//   eval.seed (0) eval.scorer: model | popularity | oracle (model)
//   mode: basic | transfer (basic)
//   transfer.source_checkpoint ("") transfer.seed (99)
//   output.dir (run)   deterministic (false)
struct RunConfig {
  enum class Source { kFiles, kSynth };
  enum class Domain { kSingle, kA, kB };
  enum class ScorerKind { kModel, kPopularity, kOracle };

  std::string dataset_name = "synthetic";
  Source source = Source::kSynth;
  std::filesystem::path dataset_dir;
  SynthConfig synth{};
  Domain synth_domain = Domain::kSingle;
  std::uint64_t synth_seed_b = 14;

  double split_ratio = 0.6;
  std::uint64_t split_seed = 7;

  ModelConfig model{};
  TrainConfig train{};
  std::filesystem::path resume_from;

  EvalConfig eval{};
  ScorerKind scorer = ScorerKind::kModel;

  std::string mode = "basic";
  std::filesystem::path source_checkpoint;
  std::uint64_t transfer_seed = 99;

  std::filesystem::path output_dir = "run";
  bool deterministic = false;

  // Unknown keys and malformed values throw ParseError.
  static RunConfig from_key_values(const KeyValues& kv);
  static RunConfig load(const std::filesystem::path& path);
  // Every key, defaults filled in.
  KeyValues to_key_values() const;

  void validate() const;
  int threads() const { return deterministic ? 1 : train.threads; }
};

}  // namespace suger
