#include "suger/data.hpp"

#include "suger/kv.hpp"
#include "suger/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace suger {

std::string_view to_string(PairKind k) {
  switch (k) {
    case PairKind::kUserBundle: return "user-bundle";
    case PairKind::kUserItem: return "user-item";
    case PairKind::kBundleItem: return "bundle-item";
  }
  return "?";
}

bool PairList::contains(int left, int right) const {
  return std::binary_search(pairs.begin(), pairs.end(), std::pair{left, right});
}

PairList PairList::from_pairs(PairKind kind, std::vector<std::pair<int, int>> raw) {
  PairList out;
  out.kind = kind;
  std::sort(raw.begin(), raw.end());
  const auto before = raw.size();
  raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
  out.duplicates_dropped = before - raw.size();
  out.pairs = std::move(raw);
  return out;
}

namespace {

bool parse_id(std::string_view tok, int& out) {
  if (tok.empty()) return false;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc{} && ptr == tok.data() + tok.size() && out >= 0;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) toks.push_back(line.substr(i, j - i));
    i = j;
  }
  return toks;
}

}  // namespace

PairList parse_interactions(std::string_view text, PairKind kind) {
  std::vector<std::pair<int, int>> raw;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    int a = 0, b = 0;
    if (toks.size() != 2 || !parse_id(toks[0], a) || !parse_id(toks[1], b)) {
      throw ParseError("line " + std::to_string(line_no) + ": expected two nonnegative integers, got '" +
                       std::string(line) + "'");
    }
    raw.emplace_back(a, b);
  }
  if (raw.empty()) throw ParseError(std::string("empty ") + std::string(to_string(kind)) + " relation");
  return PairList::from_pairs(kind, std::move(raw));
}

PairList load_interactions(const std::filesystem::path& path, PairKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_interactions(ss.str(), kind);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

InteractionDataset build_dataset(PairList ub, PairList ui, PairList bi, int num_users, int num_bundles,
                                 int num_items) {
  if (ub.kind != PairKind::kUserBundle || ui.kind != PairKind::kUserItem || bi.kind != PairKind::kBundleItem) {
    throw Error("build_dataset: pair lists passed in the wrong order");
  }
  int max_u = -1, max_b = -1, max_i = -1;
  for (auto [u, b] : ub.pairs) max_u = std::max(max_u, u), max_b = std::max(max_b, b);
  for (auto [u, i] : ui.pairs) max_u = std::max(max_u, u), max_i = std::max(max_i, i);
  for (auto [b, i] : bi.pairs) max_b = std::max(max_b, b), max_i = std::max(max_i, i);

  auto resolve = [](int given, int max_seen, const char* what) {
    if (given < 0) return max_seen + 1;
    if (max_seen >= given) {
      throw Error(std::string("build_dataset: ") + what + " id " + std::to_string(max_seen) +
                  " exceeds declared count " + std::to_string(given));
    }
    return given;
  };

  InteractionDataset ds;
  ds.num_users = resolve(num_users, max_u, "user");
  ds.num_bundles = resolve(num_bundles, max_b, "bundle");
  ds.num_items = resolve(num_items, max_i, "item");

  std::vector<char> has_items(static_cast<std::size_t>(ds.num_bundles), 0);
  for (auto [b, i] : bi.pairs) has_items[static_cast<std::size_t>(b)] = 1;
  std::vector<char> reported(static_cast<std::size_t>(ds.num_bundles), 0);
  for (auto [u, b] : ub.pairs) {
    if (!has_items[static_cast<std::size_t>(b)] && !reported[static_cast<std::size_t>(b)]) {
      reported[static_cast<std::size_t>(b)] = 1;
      ds.bundles_without_items.push_back(b);
    }
  }
  std::sort(ds.bundles_without_items.begin(), ds.bundles_without_items.end());

  ds.ub = std::move(ub);
  ds.ui = std::move(ui);
  ds.bi = std::move(bi);
  return ds;
}

std::pair<InteractionDataset, IdMapping> remap_dense(const InteractionDataset& ds) {
  std::vector<int> users, bundles, items;
  for (auto [u, b] : ds.ub.pairs) users.push_back(u), bundles.push_back(b);
  for (auto [u, i] : ds.ui.pairs) users.push_back(u), items.push_back(i);
  for (auto [b, i] : ds.bi.pairs) bundles.push_back(b), items.push_back(i);
  auto uniq = [](std::vector<int>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  uniq(users);
  uniq(bundles);
  uniq(items);
  auto idx = [](const std::vector<int>& v, int x) {
    return static_cast<int>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
  };
  auto remap = [&](const PairList& pl, const std::vector<int>& l, const std::vector<int>& r) {
    std::vector<std::pair<int, int>> out;
    out.reserve(pl.size());
    for (auto [a, b] : pl.pairs) out.emplace_back(idx(l, a), idx(r, b));
    PairList res = PairList::from_pairs(pl.kind, std::move(out));
    res.duplicates_dropped = pl.duplicates_dropped;
    return res;
  };
  PairList ub = remap(ds.ub, users, bundles);
  PairList ui = remap(ds.ui, users, items);
  PairList bi = remap(ds.bi, bundles, items);
  InteractionDataset dense =
      build_dataset(std::move(ub), std::move(ui), std::move(bi), static_cast<int>(users.size()),
                    static_cast<int>(bundles.size()), static_cast<int>(items.size()));
  return {std::move(dense), IdMapping{std::move(users), std::move(bundles), std::move(items)}};
}

Split split_train_test(const InteractionDataset& ds, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error("split ratio must lie in (0,1)");
  const std::size_t n = ds.ub.size();
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<std::pair<int, int>> train, test;
  train.reserve(n_train);
  test.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? train : test).push_back(ds.ub.pairs[order[i]]);
  }

  Split s;
  s.train_ub = PairList::from_pairs(PairKind::kUserBundle, std::move(train));
  s.test_ub = PairList::from_pairs(PairKind::kUserBundle, std::move(test));
  s.ui = ds.ui;
  s.bi = ds.bi;
  s.num_users = ds.num_users;
  s.num_bundles = ds.num_bundles;
  s.num_items = ds.num_items;
  s.split_ratio = ratio;
  s.seed = seed;
  return s;
}

NegativeSample sample_negatives(const Split& split, std::uint64_t seed) {
  NegativeSample out;
  const int nb = split.num_bundles;
  std::vector<std::vector<int>> positives(static_cast<std::size_t>(split.num_users));
  for (auto [u, b] : split.train_ub.pairs) positives[static_cast<std::size_t>(u)].push_back(b);

  Rng rng(seed);
  out.triples.reserve(split.train_ub.size());
  for (auto [u, b] : split.train_ub.pairs) {
    const auto& pos = positives[static_cast<std::size_t>(u)];  // sorted: train_ub is sorted
    const int free = nb - static_cast<int>(pos.size());
    if (free <= 0) {
      out.skipped_users.push_back(u);
      continue;
    }
    int neg;
    if (static_cast<int>(pos.size()) * 2 <= nb) {
      do {
        neg = rng.uniform_int(nb);
      } while (std::binary_search(pos.begin(), pos.end(), neg));
    } else {
      // Dense user: pick the r-th bundle of the complement directly.
      int r = rng.uniform_int(free);
      neg = 0;
      auto it = pos.begin();
      for (;; ++neg) {
        if (it != pos.end() && *it == neg) {
          ++it;
          continue;
        }
        if (r-- == 0) break;
      }
    }
    out.triples.push_back({u, b, neg});
  }
  return out;
}

void write_pairs(const std::filesystem::path& path, const PairList& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (auto [a, b] : pairs.pairs) out << a << ' ' << b << '\n';
}

namespace {

void write_ids(const std::filesystem::path& path, const std::vector<int>& ids) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t i = 0; i < ids.size(); ++i) out << i << ' ' << ids[i] << '\n';
}

PairList load_maybe_empty(const std::filesystem::path& path, PairKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return PairList{kind, {}, 0};
  return parse_interactions(text, kind);
}

}  // namespace

void save_split(const std::filesystem::path& dir, const Split& split, const IdMapping& mapping) {
  std::filesystem::create_directories(dir);
  write_pairs(dir / "train_ub.txt", split.train_ub);
  write_pairs(dir / "test_ub.txt", split.test_ub);
  write_pairs(dir / "user_item.txt", split.ui);
  write_pairs(dir / "bundle_item.txt", split.bi);
  write_ids(dir / "id_map_user.txt", mapping.users);
  write_ids(dir / "id_map_bundle.txt", mapping.bundles);
  write_ids(dir / "id_map_item.txt", mapping.items);

  KeyValues meta;
  meta.set("split_ratio", format_double(split.split_ratio));
  meta.set("seed", std::to_string(split.seed));
  meta.set("num_users", std::to_string(split.num_users));
  meta.set("num_bundles", std::to_string(split.num_bundles));
  meta.set("num_items", std::to_string(split.num_items));
  meta.set("num_train_ub", std::to_string(split.train_ub.size()));
  meta.set("num_test_ub", std::to_string(split.test_ub.size()));
  meta.set("num_ui", std::to_string(split.ui.size()));
  meta.set("num_bi", std::to_string(split.bi.size()));
  meta.set("id_map.user", "id_map_user.txt");
  meta.set("id_map.bundle", "id_map_bundle.txt");
  meta.set("id_map.item", "id_map_item.txt");
  write_key_values(dir / "split_meta.txt", meta);
}

Split load_split(const std::filesystem::path& dir) {
  const KeyValues meta = read_key_values(dir / "split_meta.txt");
  Split s;
  s.split_ratio = std::stod(meta.get("split_ratio"));
  s.seed = std::stoull(meta.get("seed"));
  s.num_users = std::stoi(meta.get("num_users"));
  s.num_bundles = std::stoi(meta.get("num_bundles"));
  s.num_items = std::stoi(meta.get("num_items"));
  s.train_ub = load_maybe_empty(dir / "train_ub.txt", PairKind::kUserBundle);
  s.test_ub = load_maybe_empty(dir / "test_ub.txt", PairKind::kUserBundle);
  s.ui = load_maybe_empty(dir / "user_item.txt", PairKind::kUserItem);
  s.bi = load_maybe_empty(dir / "bundle_item.txt", PairKind::kBundleItem);
  auto check = [&](const PairList& pl, int nl, int nr) {
    for (auto [a, b] : pl.pairs) {
      if (a >= nl || b >= nr) throw Error(dir.string() + ": id outside declared counts in split");
    }
  };
  check(s.train_ub, s.num_users, s.num_bundles);
  check(s.test_ub, s.num_users, s.num_bundles);
  check(s.ui, s.num_users, s.num_items);
  check(s.bi, s.num_bundles, s.num_items);
  return s;
}

}  // namespace suger
