#pragma once

#include "suger/config.hpp"
#include "suger/eval.hpp"
#include "suger/training.hpp"

#include <filesystem>
#include <iosfwd>

namespace suger {

// Output directory layout shared by every subcommand.
struct RunPaths {
  std::filesystem::path root;

  std::filesystem::path data() const { return root / "data"; }
  std::filesystem::path split() const { return root / "split"; }
  std::filesystem::path checkpoint() const { return root / "checkpoint.sgrc"; }
  std::filesystem::path loss_log() const { return root / "loss_log.txt"; }
  std::filesystem::path metrics() const { return root / "metrics.json"; }
  std::filesystem::path transfer_metrics() const { return root / "metrics_transfer.json"; }
  std::filesystem::path effective_config() const { return root / "effective_config.txt"; }
};

// Load (or generate), remap to dense ids, split, persist.
Split cmd_prepare(const RunConfig& cfg, std::ostream& log);
TrainResult cmd_train(const RunConfig& cfg, std::ostream& log);
MetricsReport cmd_evaluate(const RunConfig& cfg, std::ostream& log);
MetricsReport cmd_transfer(const RunConfig& cfg, std::ostream& log);

}  // namespace suger
