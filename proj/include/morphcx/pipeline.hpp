#pragma once

// End-to-end measurement for one language/POS: split, train, weights, tree,
// i-complexity. Also run configuration and artifact writing.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "morphcx/complexity.hpp"
#include "morphcx/config.hpp"
#include "morphcx/corpus.hpp"
#include "morphcx/error.hpp"
#include "morphcx/strmodel.hpp"
#include "morphcx/structure.hpp"

namespace morphcx {

inline constexpr std::string_view kVersion = "0.1.0";

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  std::string hex;
  for (unsigned int k = 0; k < len; ++k) hex += fmt::format("{:02x}", digest[k]);
  return hex;
}

/// Synthetic system description: SynthSpec keys plus `paradigms` (count).
struct SynthConfig {
  SynthSpec spec;
  std::size_t paradigms = 600;
};

inline SynthConfig synth_from_config(const KeyValueConfig& kv, std::uint64_t default_seed) {
  SynthConfig sc;
  auto& s = sc.spec;
  s.n = kv.number<std::size_t>("n", s.n);
  s.pos = kv.get_or("pos", s.pos);
  s.class_probs = kv.doubles("class_probs", s.class_probs);
  s.suffixes.clear();
  for (std::size_t c = 1; c <= s.class_probs.size(); ++c) {
    const auto key = fmt::format("suffixes.{}", c);
    if (!kv.has(key)) throw ParseError("synthetic config lacks " + key);
    std::vector<std::string> row;
    for (auto& cell : kv.strings(key)) row.push_back(cell == "∅" || cell == "-" ? "" : cell);
    s.suffixes.push_back(std::move(row));
  }
  s.stem_alphabet = kv.get_or("stem_alphabet", s.stem_alphabet);
  s.stem_min = kv.number<std::size_t>("stem_min", s.stem_min);
  s.stem_max = kv.number<std::size_t>("stem_max", s.stem_max);
  s.seed = kv.number<std::uint64_t>("seed", default_seed);
  sc.paradigms = kv.number<std::size_t>("paradigms", sc.paradigms);
  return sc;
}

struct RunConfig {
  std::string language = "unknown";
  std::filesystem::path data;    // UniMorph TSV
  std::filesystem::path synth;   // or a synthetic system config
  std::filesystem::path scores;  // optional imported scores
  std::string pos;
  SplitSpec split;
  TrainOptions train;
  std::size_t n_perm = 10000;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "out";
  std::size_t threads = 1;

  static RunConfig from(const KeyValueConfig& kv) {
    RunConfig c;
    c.language = kv.get_or("language", c.language);
    c.data = kv.get_or("data", "");
    c.synth = kv.get_or("synth", "");
    c.scores = kv.get_or("scores", "");
    c.pos = kv.get_or("pos", "");
    if (auto r = kv.get("regime")) c.split.regime = parse_regime(*r);
    c.split.paradigm_count = kv.number<std::size_t>("paradigm_count", c.split.paradigm_count);
    c.split.pair_count = kv.number<std::size_t>("pair_count", c.split.pair_count);
    c.split.dev_paradigms = kv.number<std::size_t>("dev_paradigms", c.split.dev_paradigms);
    c.split.test_paradigms = kv.number<std::size_t>("test_paradigms", c.split.test_paradigms);
    c.train.order = kv.number<int>("order", c.train.order);
    c.train.alpha = kv.number<double>("alpha", c.train.alpha);
    c.train.lambda_grid = kv.doubles("lambda_grid", c.train.lambda_grid);
    c.n_perm = kv.number<std::size_t>("n_perm", c.n_perm);
    if (kv.has("seed")) c.seed = kv.number<std::uint64_t>("seed", 0);
    c.out = kv.get_or("out", c.out.string());
    c.threads = kv.number<std::size_t>("threads", c.threads);
    if (c.seed) c.split.seed = *c.seed;
    return c;
  }

  /// Every setting that influences results (not threads or out).
  KeyValueConfig effective() const {
    KeyValueConfig kv;
    kv.set("language", language);
    if (!data.empty()) kv.set("data", data.string());
    if (!synth.empty()) kv.set("synth", synth.string());
    if (!scores.empty()) kv.set("scores", scores.string());
    kv.set("pos", pos);
    kv.set("regime", std::string(to_string(split.regime)));
    kv.set("paradigm_count", std::to_string(split.paradigm_count));
    kv.set("pair_count", std::to_string(split.pair_count));
    kv.set("dev_paradigms", std::to_string(split.dev_paradigms));
    kv.set("test_paradigms", std::to_string(split.test_paradigms));
    kv.set("order", std::to_string(train.order));
    kv.set("alpha", fmt::format("{}", train.alpha));
    kv.set("lambda_grid", fmt::format("{}", fmt::join(train.lambda_grid, ",")));
    kv.set("n_perm", std::to_string(n_perm));
    if (seed) kv.set("seed", std::to_string(*seed));
    return kv;
  }

  std::string hash() const { return sha256_hex(effective().canonical()); }
};

namespace detail {

/// Runs fn, prefixing any library error with the stage name.
template <class Fn>
auto stage(std::string_view name, Fn&& fn) -> decltype(fn()) {
  const auto prefix = [&](const std::exception& e) {
    return "stage " + std::string(name) + ": " + e.what();
  };
  try {
    return fn();
  } catch (const ParseError& e) {
    throw ParseError(prefix(e));
  } catch (const DataError& e) {
    throw DataError(prefix(e));
  } catch (const LookupError& e) {
    throw LookupError(prefix(e));
  } catch (const Error& e) {
    throw Error(prefix(e));
  }
}

}  // namespace detail

/// Reads the UniMorph file (or samples the synthetic system) named by the
/// config and groups it into paradigms.
inline Lexicon load_lexicon(const RunConfig& cfg) {
  if (!cfg.synth.empty()) {
    if (!cfg.seed) throw Error("a seed is required");
    const auto sc = synth_from_config(KeyValueConfig::load(cfg.synth), *cfg.seed);
    const SynthSystem sys(sc.spec);
    Lexicon lex;
    lex.paradigms = sys.sample(sc.paradigms);
    lex.inventory = SlotInventory(sys.slots());
    return lex;
  }
  if (cfg.data.empty()) throw Error("config names neither data nor synth");
  std::ifstream in(cfg.data);
  if (!in) throw Error("cannot read " + cfg.data.string());
  auto parsed = parse_unimorph(in);
  if (!parsed.errors.empty()) {
    throw ParseError(cfg.data.string() + ": " + parsed.errors.front().what() + " (" +
                     std::to_string(parsed.errors.size()) + " malformed lines)");
  }
  return build_paradigms(parsed.words, cfg.pos);
}

struct RunResult {
  Lexicon lexicon;
  DataSplit split;
  std::optional<ConditionalParadigmModel> model;
  WeightMatrix weights;
  Arborescence tree;
  IComplexity icomplexity;
  ComplexityPoint point;
  std::vector<std::string> notes;
};

/// Split, train (unless scores are supplied), learn the tree on dev, and
/// measure on test.
inline RunResult run_pipeline(const RunConfig& cfg, Lexicon lexicon,
                              const ScoreTable* scores = nullptr) {
  if (!cfg.seed) throw Error("a seed is required");
  RunResult r;
  r.lexicon = std::move(lexicon);
  const auto& inv = r.lexicon.inventory;
  r.notes = r.lexicon.warnings;

  r.split = detail::stage("split", [&] { return make_split(r.lexicon.paradigms, cfg.split); });
  r.notes.insert(r.notes.end(), r.split.notes.begin(), r.split.notes.end());

  const auto measure = [&](const auto& scorer) {
    r.weights = detail::stage("weights", [&] {
      return compute_weights(scorer, inv, r.split.dev, cfg.threads);
    });
    r.notes.insert(r.notes.end(), r.weights.flags.begin(), r.weights.flags.end());
    r.tree = detail::stage("learn-tree", [&] { return max_arborescence(r.weights, cfg.threads); });
    r.icomplexity = detail::stage("measure", [&] {
      return i_complexity(scorer, inv, r.tree, r.split.test, cfg.threads);
    });
  };
  if (scores) {
    measure(*scores);
  } else {
    r.model = detail::stage("train", [&] {
      return train(r.split.train, cfg.train, r.split.dev_pairs());
    });
    r.notes.insert(r.notes.end(), r.model->notes().begin(), r.model->notes().end());
    std::size_t unknown = 0;
    for (const auto& p : r.split.test) {
      for (const auto& [_, form] : p.entries) unknown += r.model->unknown_symbols(form);
    }
    if (unknown) r.notes.push_back(fmt::format("{} test characters outside the training alphabet", unknown));
    measure(*r.model);
  }

  r.point.language = cfg.language;
  r.point.pos = cfg.pos.empty() ? std::string(slot_pos(inv[0])) : cfg.pos;
  r.point.regime = std::string(to_string(cfg.split.regime));
  r.point.e_complexity = e_complexity(r.lexicon.paradigms);
  r.point.i_total_bits = r.icomplexity.total_bits;
  r.point.i_per_form_bits = r.icomplexity.per_form_bits;
  r.point.d = r.icomplexity.d;
  r.point.seed = *cfg.seed;
  return r;
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

/// Stamps a JSON artifact with the config hash and seed.
inline nlohmann::json stamped(nlohmann::json j, const RunConfig& cfg) {
  j["config_hash"] = cfg.hash();
  j["seed"] = cfg.seed.value_or(0);
  return j;
}

inline std::string point_csv(const std::vector<ComplexityPoint>& points, const RunConfig& cfg) {
  std::string out = fmt::format("# config_hash={} seed={}\n{}\n", cfg.hash(),
                                cfg.seed.value_or(0), kPointCsvHeader);
  for (const auto& p : points) out += to_csv_row(p) + "\n";
  return out;
}

/// point.csv, weights.json, tree.json, tree.dot, split.json, model.json (when
/// trained) and manifest.json under `dir`.
inline void write_run_outputs(const RunResult& r, const RunConfig& cfg,
                              const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& inv = r.lexicon.inventory;
  write_text(dir / "point.csv", point_csv({r.point}, cfg));
  write_text(dir / "weights.json", stamped(weights_to_json(r.weights, inv), cfg).dump(1) + "\n");
  write_text(dir / "tree.json", stamped(tree_to_json(r.tree, inv, &r.weights), cfg).dump(1) + "\n");
  write_text(dir / "tree.dot", fmt::format("// config_hash={} seed={}\n", cfg.hash(),
                                           cfg.seed.value_or(0)) +
                                   tree_to_dot(r.tree, inv, &r.weights));
  auto split = split_to_json(r.split);
  split["slots"] = inv.slots();
  write_text(dir / "split.json", stamped(split, cfg).dump(1) + "\n");
  if (r.model) write_text(dir / "model.json", stamped(model_to_json(*r.model), cfg).dump() + "\n");
  nlohmann::json manifest = {
      {"tool", "morphcx"},
      {"version", kVersion},
      {"config", cfg.effective().entries()},
      {"i_total_bits", r.point.i_total_bits},
      {"i_per_form_bits", r.point.i_per_form_bits},
      {"e_complexity", r.point.e_complexity},
      {"notes", r.notes},
  };
  write_text(dir / "manifest.json", stamped(manifest, cfg).dump(1) + "\n");
}

}  // namespace morphcx
