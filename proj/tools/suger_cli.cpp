// suger: prepare / train / evaluate / transfer over one config file.

#include "suger/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Subgraph-based bundle recommendation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  bool deterministic = false;
  app.add_option("-c,--config", config_path, "key = value run configuration")->required();
  app.add_option("--set", overrides, "override a config entry, key=value (repeatable)");
  app.add_flag("--deterministic", deterministic, "force serial execution");

  auto* prepare = app.add_subcommand("prepare", "load or generate data, split and persist");
  auto* train = app.add_subcommand("train", "train with BPR and write checkpoint + loss log");
  auto* evaluate = app.add_subcommand("evaluate", "Recall@K / NDCG@K on the test split");
  auto* transfer = app.add_subcommand("transfer", "evaluate a source checkpoint on this config's dataset");

  CLI11_PARSE(app, argc, argv);

  try {
    suger::KeyValues kv = suger::read_key_values(config_path);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw suger::ParseError("--set expects key=value, got '" + o + "'");
      kv.set(o.substr(0, eq), o.substr(eq + 1));
    }
    suger::RunConfig cfg = suger::RunConfig::from_key_values(kv);
    if (deterministic) cfg.deterministic = true;

    if (prepare->parsed()) suger::cmd_prepare(cfg, std::cerr);
    if (train->parsed()) suger::cmd_train(cfg, std::cerr);
    if (evaluate->parsed()) {
      const auto r = suger::cmd_evaluate(cfg, std::cerr);
      std::cout << suger::report_to_json(r);
    }
    if (transfer->parsed()) {
      const auto r = suger::cmd_transfer(cfg, std::cerr);
      std::cout << suger::report_to_json(r);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
