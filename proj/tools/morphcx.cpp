// Command-line driver. Every command reads an optional key = value config
// file; flags override it.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "morphcx/morphcx.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace morphcx;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

// Config keys settable by flag; the flag is the key with '_' -> '-'.
const std::vector<std::string> kConfigKeys = {
    "language", "data", "synth", "scores", "pos", "regime", "paradigm_count",
    "pair_count", "dev_paradigms", "test_paradigms", "order", "alpha", "lambda_grid",
    "n_perm", "seed", "out", "threads"};

const std::set<std::string> kPathKeys = {"data", "synth", "scores"};

struct Settings {
  std::string config_file;
  std::map<std::string, std::string> flags;
  std::multimap<std::string, CLI::Option*> options;
  std::vector<std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_file, "key = value config file");
    for (const auto& key : kConfigKeys) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      options.emplace(key, cmd->add_option(flag, flags[key]));
    }
    cmd->add_option("--set", overrides, "extra KEY=VALUE settings")->allow_extra_args(false);
  }

  KeyValueConfig merged() const {
    KeyValueConfig kv;
    if (!config_file.empty()) {
      if (!fs::exists(config_file)) throw UsageError("config file not found: " + config_file);
      kv = KeyValueConfig::load(config_file);
    }
    for (const auto& item : overrides) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects KEY=VALUE, got " + item);
      kv.set(item.substr(0, eq), item.substr(eq + 1));
    }
    for (const auto& [key, opt] : options) {
      if (opt->count()) kv.set(key, flags.at(key));
    }
    return kv;
  }

  RunConfig run_config(bool needs_seed) const {
    const auto kv = merged();
    for (const auto& key : kPathKeys) {
      if (auto p = kv.get(key); p && !p->empty() && !fs::exists(*p)) {
        throw UsageError(key + " path does not exist: " + *p);
      }
    }
    auto cfg = RunConfig::from(kv);
    if ((needs_seed || !cfg.synth.empty()) && !cfg.seed) {
      throw UsageError("--seed is required for this command");
    }
    return cfg;
  }
};

fs::path out_dir(const RunConfig& cfg) {
  fs::create_directories(cfg.out);
  return cfg.out;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j, const RunConfig& cfg) {
  write_text(path, stamped(j, cfg).dump(1) + "\n");
}

std::optional<ScoreTable> load_score_file(const RunConfig& cfg) {
  if (cfg.scores.empty()) return std::nullopt;
  std::ifstream in(cfg.scores);
  try {
    return load_scores(in);
  } catch (const ParseError& e) {
    throw ParseError(cfg.scores.string() + ": " + e.what());
  }
}

SlotInventory split_inventory(const DataSplit& s) {
  std::set<SlotId> slots;
  for (const auto& p : s.train) slots.insert(p.tgt_slot);
  for (const auto* group : {&s.dev, &s.test}) {
    for (const auto& p : *group) {
      for (const auto& [slot, _] : p.entries) slots.insert(slot);
    }
  }
  return SlotInventory({slots.begin(), slots.end()});
}

std::size_t split_e_complexity(const DataSplit& s) {
  std::map<std::string, std::set<SlotId>> filled;
  for (const auto& p : s.train) filled[p.lexeme].insert(p.tgt_slot);
  std::size_t best = e_complexity(s.test);
  best = std::max(best, e_complexity(s.dev));
  for (const auto& [_, slots] : filled) best = std::max(best, slots.size());
  return best;
}

// Commands --------------------------------------------------------------------

int cmd_ingest(const Settings& st) {
  const auto cfg = st.run_config(false);
  const auto lex = load_lexicon(cfg);
  std::size_t filled = 0;
  json per_slot = json::object();
  for (const auto& slot : lex.inventory.slots()) per_slot[slot] = 0;
  for (const auto& p : lex.paradigms) {
    filled += p.size();
    for (const auto& [slot, _] : p.entries) per_slot[slot] = per_slot[slot].get<int>() + 1;
  }
  const double coverage = static_cast<double>(filled) /
                          static_cast<double>(lex.paradigms.size() * lex.inventory.size());
  json store = lexicon_to_json(lex);
  store["summary"] = {{"lexemes", lex.paradigms.size()},
                      {"slots", lex.inventory.size()},
                      {"forms", filled},
                      {"coverage", coverage},
                      {"forms_per_slot", per_slot},
                      {"warnings", lex.warnings}};
  const auto path = out_dir(cfg) / "paradigms.json";
  write_json(path, store, cfg);
  fmt::print("lexemes: {}\nslots: {}\nforms: {}\ncoverage: {:.4f}\n", lex.paradigms.size(),
             lex.inventory.size(), filled, coverage);
  for (const auto& w : lex.warnings) fmt::print(std::cerr, "warning: {}\n", w);
  if (lex.paradigms.size() < 500) {
    fmt::print(std::cerr, "warning: {} paradigms, below 500-paradigm threshold\n",
               lex.paradigms.size());
  }
  fmt::print("wrote {}\n", path.string());
  return 0;
}

int cmd_split(const Settings& st) {
  const auto cfg = st.run_config(true);
  const auto lex = load_lexicon(cfg);
  const auto split = make_split(lex.paradigms, cfg.split);
  const auto path = out_dir(cfg) / "split.json";
  json j = split_to_json(split);
  j["slots"] = lex.inventory.slots();
  write_json(path, j, cfg);
  for (const auto& n : split.notes) fmt::print(std::cerr, "note: {}\n", n);
  fmt::print("train pairs: {}\ndev paradigms: {}\ntest paradigms: {}\nwrote {}\n",
             split.train.size(), split.dev.size(), split.test.size(), path.string());
  return 0;
}

struct SplitFile {
  DataSplit split;
  SlotInventory inventory;
};

SplitFile load_split(const fs::path& path) {
  const auto j = read_json(path);
  SplitFile f{split_from_json(j), {}};
  f.inventory = j.contains("slots") ? SlotInventory(j.at("slots").get<std::vector<SlotId>>())
                                    : split_inventory(f.split);
  return f;
}

int cmd_train(const Settings& st, const std::string& split_path) {
  const auto cfg = st.run_config(false);
  const auto sf = load_split(split_path.empty() ? cfg.out / "split.json" : fs::path(split_path));
  const auto model = train(sf.split.train, cfg.train, sf.split.dev_pairs());
  const auto path = out_dir(cfg) / "model.json";
  write_text(path, stamped(model_to_json(model), cfg).dump() + "\n");
  for (const auto& n : model.notes()) fmt::print(std::cerr, "note: {}\n", n);
  fmt::print("lambda: {}\nalphabet: {}\nwrote {}\n", model.lambda(), model.alphabet().size(),
             path.string());
  return 0;
}

template <class Fn>
auto with_scorer(const RunConfig& cfg, const std::string& model_path, Fn&& fn) {
  if (auto scores = load_score_file(cfg)) return fn(*scores);
  const auto m = model_from_json(read_json(model_path.empty() ? cfg.out / "model.json"
                                                              : fs::path(model_path)));
  return fn(m);
}

int cmd_weights(const Settings& st, const std::string& split_path, const std::string& model_path) {
  const auto cfg = st.run_config(false);
  const auto sf = load_split(split_path.empty() ? cfg.out / "split.json" : fs::path(split_path));
  const auto w = with_scorer(cfg, model_path, [&](const auto& scorer) {
    return compute_weights(scorer, sf.inventory, sf.split.dev, cfg.threads);
  });
  const auto path = out_dir(cfg) / "weights.json";
  write_json(path, weights_to_json(w, sf.inventory), cfg);
  for (const auto& f : w.flags) fmt::print(std::cerr, "note: {}\n", f);
  fmt::print("wrote {}\n", path.string());
  return 0;
}

int cmd_learn_tree(const Settings& st, const std::string& weights_path) {
  const auto cfg = st.run_config(false);
  const auto [w, inv] =
      weights_from_json(read_json(weights_path.empty() ? cfg.out / "weights.json" : fs::path(weights_path)));
  const auto tree = max_arborescence(w, cfg.threads);
  const auto dir = out_dir(cfg);
  write_json(dir / "tree.json", tree_to_json(tree, inv, &w), cfg);
  write_text(dir / "tree.dot", fmt::format("// config_hash={} seed={}\n", cfg.hash(),
                                           cfg.seed.value_or(0)) +
                                   tree_to_dot(tree, inv, &w));
  fmt::print("root: {}\nscore: {}\nwrote {}\n", inv[tree.root], tree_score(tree, w),
             (dir / "tree.json").string());
  return 0;
}

int cmd_measure(const Settings& st, const std::string& split_path, const std::string& model_path,
                const std::string& tree_path) {
  const auto cfg = st.run_config(false);
  const auto sf = load_split(split_path.empty() ? cfg.out / "split.json" : fs::path(split_path));
  const auto [tree, inv] =
      tree_from_json(read_json(tree_path.empty() ? cfg.out / "tree.json" : fs::path(tree_path)));
  if (!(inv == sf.inventory)) throw DataError("tree and split have different slot inventories");
  const auto ic = with_scorer(cfg, model_path, [&](const auto& scorer) {
    return i_complexity(scorer, inv, tree, sf.split.test, cfg.threads);
  });
  ComplexityPoint p;
  p.language = cfg.language;
  p.pos = cfg.pos.empty() ? std::string(slot_pos(inv[0])) : cfg.pos;
  p.regime = std::string(to_string(cfg.split.regime));
  p.e_complexity = split_e_complexity(sf.split);
  p.i_total_bits = ic.total_bits;
  p.i_per_form_bits = ic.per_form_bits;
  p.d = ic.d;
  p.seed = cfg.seed.value_or(0);
  const auto path = out_dir(cfg) / "point.csv";
  write_text(path, point_csv({p}, cfg));
  fmt::print("{}\n{}\n", kPointCsvHeader, to_csv_row(p));
  return 0;
}

int cmd_run(const Settings& st) {
  const auto cfg = st.run_config(true);
  auto lex = detail::stage("ingest", [&] { return load_lexicon(cfg); });
  const auto scores = detail::stage("scores", [&] { return load_score_file(cfg); });
  const auto r = run_pipeline(cfg, std::move(lex), scores ? &*scores : nullptr);
  const auto dir = out_dir(cfg);
  write_run_outputs(r, cfg, dir);
  for (const auto& n : r.notes) fmt::print(std::cerr, "note: {}\n", n);
  fmt::print("{}\n{}\n", kPointCsvHeader, to_csv_row(r.point));
  fmt::print("tree root: {}\nwrote {}\n", r.lexicon.inventory[r.tree.root], dir.string());
  return 0;
}

int cmd_pareto(const Settings& st, const std::string& points_path) {
  const auto cfg = st.run_config(true);
  const fs::path path =
      points_path.empty() ? fs::path(MORPHCX_DATA_DIR) / "table2_green.csv" : fs::path(points_path);
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read points file " + path.string());
  std::vector<LabeledPoint> points;
  try {
    points = read_points_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  auto kv = cfg.effective();
  kv.set("points", path.string());
  const auto hash = sha256_hex(kv.canonical());

  std::map<std::string, std::vector<LabeledPoint>> by_pos;
  for (const auto& p : points) by_pos[p.pos].push_back(p);
  if (by_pos.empty()) throw DataError("no points in " + path.string());

  const auto dir = out_dir(cfg);
  json report = {{"points_file", path.string()}, {"n_perm", cfg.n_perm},
                 {"seed", *cfg.seed},           {"config_hash", hash},
                 {"by_pos", json::object()},     {"errors", json::object()}};
  std::size_t ok = 0;
  for (const auto& [pos, pts] : by_pos) {
    std::vector<Point> xy;
    for (const auto& p : pts) xy.push_back({p.x, p.y});
    try {
      const auto r = perm_test(xy, cfg.n_perm, *cfg.seed, cfg.threads);
      const auto curve = pareto_curve(xy);
      const auto svg_name = "pareto_" + pos + ".svg";
      write_text(dir / svg_name,
                 pareto_svg(pts, curve, pos + fmt::format(" (p = {:.4f})", r.p_value),
                            fmt::format("config_hash={} seed={}", hash, *cfg.seed)));
      json steps = json::array();
      for (const auto& s : curve.steps) steps.push_back({s.x, s.y});
      report["by_pos"][pos] = {{"points", pts.size()},      {"area", r.observed_area},
                               {"count_leq", r.count_leq},  {"p_value", r.p_value},
                               {"curve", steps},            {"svg", svg_name}};
      fmt::print("{}: {} points, area {:.6f}, p = {:.6f}\n", pos, pts.size(), r.observed_area,
                 r.p_value);
      ++ok;
    } catch (const DataError& e) {
      report["errors"][pos] = e.what();
      fmt::print(std::cerr, "error: POS {}: {}\n", pos, e.what());
    }
  }
  write_text(dir / "pareto.json", report.dump(1) + "\n");
  fmt::print("wrote {}\n", (dir / "pareto.json").string());
  if (!ok) throw DataError("no POS had enough points for the test");
  return 0;
}

Plat load_plat_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read plat file " + path);
  try {
    auto plat = parse_plat(in);
    plat.validate();
    return plat;
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

json critique_report(const Plat& plat) {
  const std::size_t n = plat.slot_count();
  const double avg = avg_cond_entropy(plat);
  const double joint = joint_exponent_entropy(plat);
  const auto best = best_tree_conditional(plat);
  json tree = json::object();
  for (std::size_t i = 0; i < n; ++i) {
    if (i != best.tree.root) tree[plat.slots[i]] = plat.slots[best.tree.parent[i]];
  }

  // A suppletive pair: no stem + exponent analysis produces it, so the plat
  // gives it probability zero, while the string model stays positive.
  const std::size_t j = 0;
  const std::size_t i = n > 1 ? 1 : 0;
  const std::string src = "go" + plat.exponents[0][j];
  const std::string tgt = "went";
  std::vector<PairRecord> pairs;
  for (const auto* stem : {"walk", "jump", "talk", "kick", "play", "look"}) {
    for (std::size_t c = 0; c < plat.class_count(); ++c) {
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
          if (a == b) continue;
          pairs.push_back({stem, stem + plat.exponents[c][a], plat.slots[a],
                           stem + plat.exponents[c][b], plat.slots[b]});
        }
      }
    }
  }
  json suppletion = {{"source", src}, {"source_slot", plat.slots[j]},
                     {"target", tgt}, {"target_slot", plat.slots[i]}};
  suppletion["plat_probability"] = plat_form_prob(plat, i, j, src, tgt);
  if (!pairs.empty()) {
    const auto m = train(pairs, {}, {});
    suppletion["model_log2prob"] = m.logprob(SourceView{src, plat.slots[j]}, plat.slots[i], tgt);
  }
  return {{"class_entropy", class_entropy(plat)},
          {"joint_exponent_entropy", joint},
          {"joint_per_form", joint / static_cast<double>(n)},
          {"avg_cond_entropy", avg},
          {"joint_per_form_exceeds_average", joint / static_cast<double>(n) > avg},
          {"best_tree", {{"root", plat.slots[best.tree.root]}, {"parent", tree}}},
          {"best_tree_bits", best.bits},
          {"best_tree_bits_per_edge", n > 1 ? best.bits / static_cast<double>(n - 1) : 0.0},
          {"suppletion", suppletion}};
}

int cmd_plat(const Settings& st, const std::string& plat_path, bool critique, bool critique_only) {
  const auto cfg = st.run_config(false);
  const auto plat = load_plat_file(plat_path);
  json report = {{"plat", plat_path}, {"slots", plat.slots}, {"classes", plat.classes}};
  if (!critique_only) {
    json pairs = json::array();
    for (std::size_t i = 0; i < plat.slot_count(); ++i) {
      for (std::size_t j = 0; j < plat.slot_count(); ++j) {
        if (i != j) {
          pairs.push_back({{"i", plat.slots[i]}, {"j", plat.slots[j]},
                           {"bits", cond_entropy(plat, i, j)}});
        }
      }
    }
    report["cond_entropy"] = pairs;
    report["avg_cond_entropy"] = avg_cond_entropy(plat);
    fmt::print("average conditional entropy: {:.6f} bits\n", report["avg_cond_entropy"].get<double>());
  }
  if (critique || critique_only) {
    report["critique"] = critique_report(plat);
    const auto& c = report["critique"];
    fmt::print("joint exponent entropy: {:.6f} bits ({:.6f} per form)\n",
               c["joint_exponent_entropy"].get<double>(), c["joint_per_form"].get<double>());
    fmt::print("best tree: {:.6f} bits over {} edges\n", c["best_tree_bits"].get<double>(),
               plat.slot_count() - 1);
    fmt::print("suppletion {} -> {}: plat p = {}, model log2 q = {}\n",
               c["suppletion"]["source"].get<std::string>(),
               c["suppletion"]["target"].get<std::string>(),
               c["suppletion"]["plat_probability"].dump(), c["suppletion"].value("model_log2prob", 0.0));
  }
  const auto dir = out_dir(cfg);
  const auto stem = fs::path(plat_path).stem().string();
  const auto path = dir / (stem + (critique_only ? ".critique.json" : ".plat.json"));
  write_json(path, report, cfg);
  fmt::print("wrote {}\n", path.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morphological complexity measurement"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Settings st;
  std::string split_path, model_path, weights_path, tree_path, points_path, plat_path;
  bool critique = false;

  auto* ingest = app.add_subcommand("ingest", "parse a UniMorph file into a paradigm store");
  auto* split = app.add_subcommand("split", "hold out dev/test paradigms and sample training pairs");
  auto* trn = app.add_subcommand("train", "fit the reference string model on a split");
  trn->add_option("--split", split_path, "split.json (default: <out>/split.json)");
  auto* weights = app.add_subcommand("weights", "dev-set edge and root weights");
  weights->add_option("--split", split_path);
  weights->add_option("--model", model_path, "model.json (default: <out>/model.json)");
  auto* learn = app.add_subcommand("learn-tree", "maximum spanning arborescence over slots");
  learn->add_option("--weights", weights_path, "weights.json (default: <out>/weights.json)");
  auto* measure = app.add_subcommand("measure", "i-complexity of the test paradigms");
  measure->add_option("--split", split_path);
  measure->add_option("--model", model_path);
  measure->add_option("--tree", tree_path, "tree.json (default: <out>/tree.json)");
  auto* run = app.add_subcommand("run", "split, train, learn the tree and measure");
  auto* pareto = app.add_subcommand("pareto", "Pareto curve area and permutation test per POS");
  pareto->add_option("--points", points_path, "points CSV (default: bundled Table 2 fixture)");
  auto* plat = app.add_subcommand("plat", "conditional entropies of an exponent plat");
  plat->add_option("plat", plat_path, "plat TSV")->required();
  plat->add_flag("--critique", critique, "add joint-vs-average and suppletion comparisons");
  auto* crit = app.add_subcommand("critique", "joint-vs-average and suppletion comparisons");
  crit->add_option("plat", plat_path, "plat TSV")->required();

  for (auto* cmd : {ingest, split, trn, weights, learn, measure, run, pareto, plat, crit}) {
    st.attach(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  try {
    if (*ingest) return cmd_ingest(st);
    if (*split) return cmd_split(st);
    if (*trn) return cmd_train(st, split_path);
    if (*weights) return cmd_weights(st, split_path, model_path);
    if (*learn) return cmd_learn_tree(st, weights_path);
    if (*measure) return cmd_measure(st, split_path, model_path, tree_path);
    if (*run) return cmd_run(st);
    if (*pareto) return cmd_pareto(st, points_path);
    if (*plat) return cmd_plat(st, plat_path, critique, false);
    if (*crit) return cmd_plat(st, plat_path, true, true);
  } catch (const UsageError& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return static_cast<int>(ExitCode::kUsage);
  } catch (const ParseError& e) {
    fmt::print(std::cerr, "parse error: {}\n", e.what());
    return static_cast<int>(ExitCode::kParse);
  } catch (const DataError& e) {
    fmt::print(std::cerr, "insufficient data: {}\n", e.what());
    return static_cast<int>(ExitCode::kNoData);
  } catch (const LookupError& e) {
    fmt::print(std::cerr, "missing data: {}\n", e.what());
    return static_cast<int>(ExitCode::kNoData);
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return static_cast<int>(ExitCode::kInternal);
  }
  return static_cast<int>(ExitCode::kUsage);
}
