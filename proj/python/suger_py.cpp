#include "suger/commands.hpp"
#include "suger/config.hpp"
#include "suger/data.hpp"
#include "suger/eval.hpp"
#include "suger/graph_store.hpp"
#include "suger/model.hpp"
#include "suger/subgraph.hpp"
#include "suger/synth.hpp"
#include "suger/training.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace suger;

namespace {

py::dict report_dict(const MetricsReport& r) {
  py::dict d;
  d["mode"] = r.mode;
  d["users_evaluated"] = r.users_evaluated;
  d["users_skipped"] = r.users_skipped;
  for (int k : r.ks) {
    d[py::str("recall@" + std::to_string(k))] = r.recall.at(k);
    d[py::str("ndcg@" + std::to_string(k))] = r.ndcg.at(k);
  }
  return d;
}

RunConfig run_config(const std::string& text) {
  auto cfg = RunConfig::from_key_values(KeyValues::parse(text));
  cfg.validate();
  return cfg;
}

// Runs one subcommand; returns its log text alongside the result.
template <typename F>
auto with_log(F&& f) {
  std::ostringstream log;
  auto result = f(log);
  return std::make_pair(std::move(result), log.str());
}

}  // namespace

PYBIND11_MODULE(_suger, m) {
  // Translators run newest first, so the subclass registers last.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::enum_<ExtractMode>(m, "ExtractMode")
      .value("TRAIN", ExtractMode::kTrain)
      .value("INFERENCE", ExtractMode::kInference);

  py::class_<InteractionDataset>(m, "Dataset")
      .def_readonly("num_users", &InteractionDataset::num_users)
      .def_readonly("num_bundles", &InteractionDataset::num_bundles)
      .def_readonly("num_items", &InteractionDataset::num_items)
      .def_property_readonly("user_bundle", [](const InteractionDataset& d) { return d.ub.pairs; })
      .def_property_readonly("user_item", [](const InteractionDataset& d) { return d.ui.pairs; })
      .def_property_readonly("bundle_item", [](const InteractionDataset& d) { return d.bi.pairs; });

  m.def(
      "dataset_from_pairs",
      [](std::vector<std::pair<int, int>> ub, std::vector<std::pair<int, int>> ui,
         std::vector<std::pair<int, int>> bi) {
        return build_dataset(PairList::from_pairs(PairKind::kUserBundle, std::move(ub)),
                             PairList::from_pairs(PairKind::kUserItem, std::move(ui)),
                             PairList::from_pairs(PairKind::kBundleItem, std::move(bi)));
      },
      py::arg("user_bundle"), py::arg("user_item"), py::arg("bundle_item"));

  m.def(
      "generate",
      [](int num_users, int num_bundles, int num_items, std::uint64_t seed) {
        SynthConfig c;
        c.num_users = num_users;
        c.num_bundles = num_bundles;
        c.num_items = num_items;
        c.seed = seed;
        c.validate();
        return generate(c);
      },
      py::arg("num_users") = 500, py::arg("num_bundles") = 300, py::arg("num_items") = 1000,
      py::arg("seed") = 13);

  py::class_<Split>(m, "Split")
      .def_readonly("num_users", &Split::num_users)
      .def_readonly("num_bundles", &Split::num_bundles)
      .def_readonly("num_items", &Split::num_items)
      .def_property_readonly("train", [](const Split& s) { return s.train_ub.pairs; })
      .def_property_readonly("test", [](const Split& s) { return s.test_ub.pairs; });

  m.def("split", &split_train_test, py::arg("dataset"), py::arg("ratio") = 0.6, py::arg("seed") = 7);
  m.def(
      "negatives",
      [](const Split& s, std::uint64_t seed) {
        std::vector<std::tuple<int, int, int>> out;
        for (const auto& t : sample_negatives(s, seed).triples) out.emplace_back(t.user, t.pos_bundle, t.neg_bundle);
        return out;
      },
      py::arg("split"), py::arg("seed"));

  py::class_<GraphStore>(m, "GraphStore")
      .def(py::init([](const Split& s) { return GraphStore::build(s); }), py::arg("split"))
      .def_property_readonly("num_users", &GraphStore::num_users)
      .def_property_readonly("num_bundles", &GraphStore::num_bundles)
      .def_property_readonly("num_items", &GraphStore::num_items);

  py::class_<EnclosingSubgraph>(m, "Subgraph")
      .def_readonly("depth", &EnclosingSubgraph::depth)
      .def_readonly("leakage_removed", &EnclosingSubgraph::leakage_removed)
      .def_property_readonly("num_nodes", &EnclosingSubgraph::num_nodes)
      .def_property_readonly("num_edges", &EnclosingSubgraph::num_edges)
      // (class, id, hop, type code) per local index.
      .def_property_readonly("nodes",
                             [](const EnclosingSubgraph& sg) {
                               std::vector<std::tuple<std::string, int, int, int>> out;
                               for (const auto& n : sg.nodes) {
                                 out.emplace_back(std::string(to_string(n.node.entity_class)), n.node.id, n.hop,
                                                  n.type_code);
                               }
                               return out;
                             })
      .def_property_readonly("edges", [](const EnclosingSubgraph& sg) {
        std::map<std::string, EdgeList> out;
        for (Relation r : kAllRelations) out[std::string(to_string(r))] = sg.edges_of(r);
        return out;
      });

  m.def(
      "extract",
      [](const GraphStore& store, int user, int bundle, int depth, ExtractMode mode, int cap, std::uint64_t seed) {
        return extract_subgraph(store, user, bundle, depth, mode,
                                cap <= 0 ? SamplingCaps::unlimited() : SamplingCaps{cap}, seed);
      },
      py::arg("store"), py::arg("user"), py::arg("bundle"), py::arg("depth") = 1,
      py::arg("mode") = ExtractMode::kInference, py::arg("cap") = 50, py::arg("seed") = 0);

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("d", &ModelConfig::d)
      .def_readwrite("layers", &ModelConfig::layers)
      .def_readwrite("depth", &ModelConfig::depth)
      .def_readwrite("leaky_slope", &ModelConfig::leaky_slope)
      .def_readwrite("type_dim", &ModelConfig::type_dim)
      .def_readwrite("free_dim", &ModelConfig::free_dim)
      .def_readwrite("hidden", &ModelConfig::hidden)
      .def_readwrite("sigma_init", &ModelConfig::sigma_init)
      .def("validate", &ModelConfig::validate);

  py::class_<ModelParams>(m, "ModelParams");
  m.def("init_params", &init_params, py::arg("config"), py::arg("num_users"), py::arg("num_bundles"),
        py::arg("num_items"), py::arg("seed"));
  m.def(
      "score",
      [](const GraphStore& store, const EnclosingSubgraph& sg, const ModelParams& p, const ModelConfig& c) {
        const auto r = forward(store, sg, p, c).result;
        return std::make_pair(r.logit, r.probability);
      },
      py::arg("store"), py::arg("subgraph"), py::arg("params"), py::arg("config"),
      "(logit, probability) for one subgraph.");

  py::class_<Checkpoint>(m, "Checkpoint")
      .def_readonly("config", &Checkpoint::config)
      .def_readonly("params", &Checkpoint::params)
      .def_readonly("epoch", &Checkpoint::epoch)
      .def_readonly("num_users", &Checkpoint::num_users)
      .def_readonly("num_bundles", &Checkpoint::num_bundles)
      .def_readonly("num_items", &Checkpoint::num_items);
  m.def("load_checkpoint", [](const std::filesystem::path& p) { return load_checkpoint(p); }, py::arg("path"));

  m.def("recall_at_k", &recall_at_k, py::arg("ranked"), py::arg("relevant"), py::arg("k"));
  m.def("ndcg_at_k", &ndcg_at_k, py::arg("ranked"), py::arg("relevant"), py::arg("k"));
  m.def(
      "evaluate_scorer",
      [](const std::function<double(int, int)>& scorer, const Split& split, std::vector<int> ks) {
        EvalConfig cfg;
        cfg.ks = std::move(ks);
        // A Python callback cannot run on worker threads without the GIL.
        cfg.threads = 1;
        return report_dict(evaluate(scorer, split, cfg));
      },
      py::arg("scorer"), py::arg("split"), py::arg("ks") = std::vector<int>{20, 40, 80});
  m.def(
      "evaluate_model",
      [](const Checkpoint& ckpt, const Split& split, std::vector<int> ks) {
        EvalConfig cfg;
        cfg.ks = std::move(ks);
        const auto rep = [&] {
          py::gil_scoped_release release;
          return evaluate_model(ckpt.params, ckpt.config, split, cfg);
        }();
        return report_dict(rep);
      },
      py::arg("checkpoint"), py::arg("split"), py::arg("ks") = std::vector<int>{20, 40, 80});

  // Subcommands take the same `key = value` text as the CLI config file.
  m.def(
      "prepare",
      [](const std::string& config) {
        return with_log([&](auto& l) { return cmd_prepare(run_config(config), l); });
      },
      py::arg("config"));
  m.def(
      "train",
      [](const std::string& config) {
        py::gil_scoped_release release;
        auto [res, log] = with_log([&](auto& l) { return cmd_train(run_config(config), l); });
        return std::make_pair(res.checkpoint, log);
      },
      py::arg("config"));
  m.def(
      "evaluate",
      [](const std::string& config) {
        auto [rep, log] = [&] {
          py::gil_scoped_release release;
          return with_log([&](auto& l) { return cmd_evaluate(run_config(config), l); });
        }();
        return std::make_pair(report_dict(rep), log);
      },
      py::arg("config"));
  m.def(
      "transfer",
      [](const std::string& config) {
        auto [rep, log] = [&] {
          py::gil_scoped_release release;
          return with_log([&](auto& l) { return cmd_transfer(run_config(config), l); });
        }();
        return std::make_pair(report_dict(rep), log);
      },
      py::arg("config"));
}
