#include "suger/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

namespace suger {

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ParseError("config: bad value '" + value + "' for " + key);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ParseError("config: bad boolean '" + value + "' for " + key);
}

std::vector<int> parse_ks(const std::string& key, const std::string& value) {
  std::vector<int> ks;
  std::stringstream ss(value);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto b = tok.find_first_not_of(' ');
    const auto e = tok.find_last_not_of(' ');
    if (b == std::string::npos) throw ParseError("config: empty entry in " + key);
    ks.push_back(parse_number<int>(key, tok.substr(b, e - b + 1)));
  }
  if (ks.empty()) throw ParseError("config: " + key + " needs at least one K");
  return ks;
}

std::string join_ks(const std::vector<int>& ks) {
  std::string s;
  for (std::size_t i = 0; i < ks.size(); ++i) s += (i ? "," : "") + std::to_string(ks[i]);
  return s;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

template <class T>
Setter num(T RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, const std::string& v) { c.*field = parse_number<T>(k, v); };
}

template <class Member>
Setter nested(Member member) {
  return [member](RunConfig& c, const std::string& k, const std::string& v) {
    auto& ref = member(c);
    ref = parse_number<std::decay_t<decltype(ref)>>(k, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"dataset.name", [](RunConfig& c, const std::string&, const std::string& v) { c.dataset_name = v; }},
      {"dataset.source",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "files") c.source = RunConfig::Source::kFiles;
         else if (v == "synth") c.source = RunConfig::Source::kSynth;
         else throw ParseError("config: " + k + " must be files or synth");
       }},
      {"dataset.dir", [](RunConfig& c, const std::string&, const std::string& v) { c.dataset_dir = v; }},
      {"synth.num_users", nested([](RunConfig& c) -> auto& { return c.synth.num_users; })},
      {"synth.num_bundles", nested([](RunConfig& c) -> auto& { return c.synth.num_bundles; })},
      {"synth.num_items", nested([](RunConfig& c) -> auto& { return c.synth.num_items; })},
      {"synth.bundle_size_min", nested([](RunConfig& c) -> auto& { return c.synth.bundle_size_min; })},
      {"synth.bundle_size_max", nested([](RunConfig& c) -> auto& { return c.synth.bundle_size_max; })},
      {"synth.items_per_user_min", nested([](RunConfig& c) -> auto& { return c.synth.items_per_user_min; })},
      {"synth.items_per_user_max", nested([](RunConfig& c) -> auto& { return c.synth.items_per_user_max; })},
      {"synth.liked_bundles_min", nested([](RunConfig& c) -> auto& { return c.synth.liked_bundles_min; })},
      {"synth.liked_bundles_max", nested([](RunConfig& c) -> auto& { return c.synth.liked_bundles_max; })},
      {"synth.liked_item_keep", nested([](RunConfig& c) -> auto& { return c.synth.liked_item_keep; })},
      {"synth.affinity_strength", nested([](RunConfig& c) -> auto& { return c.synth.affinity_strength; })},
      {"synth.noise_rate", nested([](RunConfig& c) -> auto& { return c.synth.noise_rate; })},
      {"synth.seed", nested([](RunConfig& c) -> auto& { return c.synth.seed; })},
      {"synth.seed_b", num(&RunConfig::synth_seed_b)},
      {"synth.domain",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "single") c.synth_domain = RunConfig::Domain::kSingle;
         else if (v == "a") c.synth_domain = RunConfig::Domain::kA;
         else if (v == "b") c.synth_domain = RunConfig::Domain::kB;
         else throw ParseError("config: " + k + " must be single, a or b");
       }},
      {"split.ratio", num(&RunConfig::split_ratio)},
      {"split.seed", num(&RunConfig::split_seed)},
      {"model.d", nested([](RunConfig& c) -> auto& { return c.model.d; })},
      {"model.layers", nested([](RunConfig& c) -> auto& { return c.model.layers; })},
      {"model.depth", nested([](RunConfig& c) -> auto& { return c.model.depth; })},
      {"model.leaky_slope", nested([](RunConfig& c) -> auto& { return c.model.leaky_slope; })},
      {"model.type_dim", nested([](RunConfig& c) -> auto& { return c.model.type_dim; })},
      {"model.free_dim", nested([](RunConfig& c) -> auto& { return c.model.free_dim; })},
      {"model.hidden", nested([](RunConfig& c) -> auto& { return c.model.hidden; })},
      {"model.sigma_init", nested([](RunConfig& c) -> auto& { return c.model.sigma_init; })},
      {"train.learning_rate", nested([](RunConfig& c) -> auto& { return c.train.learning_rate; })},
      {"train.weight_decay", nested([](RunConfig& c) -> auto& { return c.train.weight_decay; })},
      {"train.bpr_lambda", nested([](RunConfig& c) -> auto& { return c.train.bpr_lambda; })},
      {"train.epochs", nested([](RunConfig& c) -> auto& { return c.train.epochs; })},
      {"train.batch_size", nested([](RunConfig& c) -> auto& { return c.train.batch_size; })},
      {"train.seed", nested([](RunConfig& c) -> auto& { return c.train.base_seed; })},
      {"train.threads", nested([](RunConfig& c) -> auto& { return c.train.threads; })},
      {"train.resume_from", [](RunConfig& c, const std::string&, const std::string& v) { c.resume_from = v; }},
      {"sampling.neighbor_cap",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const int cap = parse_number<int>(k, v);
         if (cap < 0) throw ParseError("config: " + k + " must be >= 0");
         c.train.caps.per_relation = cap == 0 ? SamplingCaps::kUnlimited : cap;
         c.eval.caps = c.train.caps;
       }},
      {"eval.ks", [](RunConfig& c, const std::string& k, const std::string& v) { c.eval.ks = parse_ks(k, v); }},
      {"eval.candidates",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "all") c.eval.policy.kind = CandidatePolicy::Kind::kAll;
         else if (v == "sampled") c.eval.policy.kind = CandidatePolicy::Kind::kSampled;
         else throw ParseError("config: " + k + " must be all or sampled");
       }},
      {"eval.sample_size", nested([](RunConfig& c) -> auto& { return c.eval.policy.sample_size; })},
      {"eval.seed",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.eval.extract_seed = parse_number<std::uint64_t>(k, v);
         c.eval.policy.seed = c.eval.extract_seed;
       }},
      {"eval.scorer",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "model") c.scorer = RunConfig::ScorerKind::kModel;
         else if (v == "popularity") c.scorer = RunConfig::ScorerKind::kPopularity;
         else if (v == "oracle") c.scorer = RunConfig::ScorerKind::kOracle;
         else throw ParseError("config: " + k + " must be model, popularity or oracle");
       }},
      {"mode",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v != "basic" && v != "transfer") throw ParseError("config: " + k + " must be basic or transfer");
         c.mode = v;
       }},
      {"transfer.source_checkpoint",
       [](RunConfig& c, const std::string&, const std::string& v) { c.source_checkpoint = v; }},
      {"transfer.seed", num(&RunConfig::transfer_seed)},
      {"output.dir", [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
      {"deterministic",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.deterministic = parse_bool(k, v); }},
  };
  return table;
}

}  // namespace

RunConfig RunConfig::from_key_values(const KeyValues& kv) {
  RunConfig c;
  const auto& table = setters();
  for (const auto& [key, value] : kv.entries()) {
    auto it = table.find(key);
    if (it == table.end()) throw ParseError("config: unknown key '" + key + "'");
    it->second(c, key, value);
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  RunConfig c = from_key_values(read_key_values(path));
  c.validate();
  return c;
}

KeyValues RunConfig::to_key_values() const {
  KeyValues kv = synth.to_key_values();
  kv.set("dataset.name", dataset_name);
  kv.set("dataset.source", source == Source::kFiles ? "files" : "synth");
  kv.set("dataset.dir", dataset_dir.string());
  kv.set("synth.seed_b", std::to_string(synth_seed_b));
  kv.set("synth.domain", synth_domain == Domain::kSingle ? "single" : synth_domain == Domain::kA ? "a" : "b");
  kv.set("split.ratio", format_double(split_ratio));
  kv.set("split.seed", std::to_string(split_seed));
  kv.set("model.d", std::to_string(model.d));
  kv.set("model.layers", std::to_string(model.layers));
  kv.set("model.depth", std::to_string(model.depth));
  kv.set("model.leaky_slope", format_double(model.leaky_slope));
  kv.set("model.type_dim", std::to_string(model.type_dim));
  kv.set("model.free_dim", std::to_string(model.free_dim));
  kv.set("model.hidden", std::to_string(model.hidden));
  kv.set("model.sigma_init", format_double(model.sigma_init));
  kv.set("train.learning_rate", format_double(train.learning_rate));
  kv.set("train.weight_decay", format_double(train.weight_decay));
  kv.set("train.bpr_lambda", format_double(train.bpr_lambda));
  kv.set("train.epochs", std::to_string(train.epochs));
  kv.set("train.batch_size", std::to_string(train.batch_size));
  kv.set("train.seed", std::to_string(train.base_seed));
  kv.set("train.threads", std::to_string(train.threads));
  kv.set("train.resume_from", resume_from.string());
  kv.set("sampling.neighbor_cap",
         train.caps.per_relation == SamplingCaps::kUnlimited ? "0" : std::to_string(train.caps.per_relation));
  kv.set("eval.ks", join_ks(eval.ks));
  kv.set("eval.candidates", eval.policy.kind == CandidatePolicy::Kind::kAll ? "all" : "sampled");
  kv.set("eval.sample_size", std::to_string(eval.policy.sample_size));
  kv.set("eval.seed", std::to_string(eval.extract_seed));
  kv.set("eval.scorer", scorer == ScorerKind::kModel        ? "model"
                        : scorer == ScorerKind::kPopularity ? "popularity"
                                                            : "oracle");
  kv.set("mode", mode);
  kv.set("transfer.source_checkpoint", source_checkpoint.string());
  kv.set("transfer.seed", std::to_string(transfer_seed));
  kv.set("output.dir", output_dir.string());
  kv.set("deterministic", deterministic ? "true" : "false");
  return kv;
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  if (source == Source::kSynth) synth.validate();
  if (source == Source::kFiles && dataset_dir.empty()) throw Error("config: dataset.source = files needs dataset.dir");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw Error("config: split.ratio must lie in (0,1)");
  for (int k : eval.ks) {
    if (k < 1) throw Error("config: eval.ks entries must be >= 1");
  }
  if (mode == "transfer" && source_checkpoint.empty()) {
    throw Error("config: mode = transfer needs transfer.source_checkpoint");
  }
}

}  // namespace suger
