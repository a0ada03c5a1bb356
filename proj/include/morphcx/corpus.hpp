#pragma once

// UniMorph ingestion: lexicon parsing, paradigm grouping, source encoding
// for the reinflection models, and train/dev/test splits.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "morphcx/error.hpp"
#include "morphcx/rng.hpp"
#include "morphcx/utf8.hpp"

namespace morphcx {

/// A canonical feature-bundle string such as "N;DAT;PL".
using SlotId = std::string;

/// Reserved slot name standing for the empty (root) source.
inline constexpr std::string_view kRootSlot = "ROOT";

struct WordType {
  std::string lexeme;
  SlotId slot;
  std::string form;

  friend bool operator==(const WordType&, const WordType&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace detail

/// The ";"-separated features of a slot, in order.
inline std::vector<std::string> slot_features(std::string_view slot) {
  std::vector<std::string> out;
  for (auto f : detail::split(slot, ';')) out.emplace_back(f);
  return out;
}

struct ParseResult {
  std::vector<WordType> words;
  std::vector<ParseError> errors;
};

/// Reads lemma<TAB>form<TAB>features lines. Blank lines and lines starting
/// with '#' are skipped; malformed lines are collected in `errors`.
inline ParseResult parse_unimorph(std::istream& in) {
  ParseResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (detail::trim(view).empty() || view.front() == '#') continue;
    const auto fields = detail::split(view, '\t');
    if (fields.size() != 3) {
      result.errors.emplace_back(
          "expected 3 tab-separated fields, found " +
              std::to_string(fields.size()),
          lineno);
      continue;
    }
    const auto lemma = detail::trim(fields[0]);
    const auto form = detail::trim(fields[1]);
    const auto feats = detail::trim(fields[2]);
    if (lemma.empty() || form.empty() || feats.empty()) {
      result.errors.emplace_back("empty lemma, form or feature field", lineno);
      continue;
    }
    if (!utf8::valid(lemma) || !utf8::valid(form) || !utf8::valid(feats)) {
      result.errors.emplace_back("invalid UTF-8", lineno);
      continue;
    }
    if (feats == kRootSlot) {
      result.errors.emplace_back("feature string ROOT is reserved", lineno);
      continue;
    }
    result.words.push_back(
        {std::string(lemma), std::string(feats), std::string(form)});
  }
  return result;
}

/// Ordered, duplicate-free list of the n slots of one language and POS.
class SlotInventory {
 public:
  SlotInventory() = default;

  explicit SlotInventory(std::vector<SlotId> slots) : slots_(std::move(slots)) {
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (slots_[i] == kRootSlot) throw DataError("slot name ROOT is reserved");
      if (!index_.emplace(slots_[i], i).second) {
        throw DataError("duplicate slot in inventory: " + slots_[i]);
      }
    }
  }

  std::size_t size() const noexcept { return slots_.size(); }
  const SlotId& operator[](std::size_t i) const { return slots_.at(i); }
  const std::vector<SlotId>& slots() const noexcept { return slots_; }

  std::optional<std::size_t> find(std::string_view slot) const {
    const auto it = index_.find(std::string(slot));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(std::string_view slot) const {
    if (auto i = find(slot)) return *i;
    throw LookupError("slot not in inventory: " + std::string(slot));
  }

  friend bool operator==(const SlotInventory& a, const SlotInventory& b) {
    return a.slots_ == b.slots_;
  }

 private:
  std::vector<SlotId> slots_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// The forms of one lexeme. May be partial.
struct Paradigm {
  std::string lexeme;
  std::map<SlotId, std::string> entries;

  std::size_t size() const noexcept { return entries.size(); }

  const std::string* find(std::string_view slot) const {
    const auto it = entries.find(std::string(slot));
    return it == entries.end() ? nullptr : &it->second;
  }

  friend bool operator==(const Paradigm&, const Paradigm&) = default;
};

struct Lexicon {
  SlotInventory inventory;
  std::vector<Paradigm> paradigms;
  std::vector<std::string> warnings;
};

/// POS feature of a slot: its first ";"-separated token.
inline std::string_view slot_pos(std::string_view slot) {
  return slot.substr(0, slot.find(';'));
}

/// Groups words into paradigms, keeping only slots whose POS (first feature)
/// equals `pos_filter`; an empty filter keeps everything. Paradigms appear in
/// order of first mention, the inventory is sorted. The first occurrence of
/// a duplicated (lexeme, slot) wins.
inline Lexicon build_paradigms(const std::vector<WordType>& words,
                               std::string_view pos_filter = {}) {
  Lexicon lex;
  std::set<SlotId> slots;
  std::unordered_map<std::string, std::size_t> by_lexeme;
  for (const auto& w : words) {
    if (!pos_filter.empty() && slot_pos(w.slot) != pos_filter) continue;
    auto [it, inserted] = by_lexeme.emplace(w.lexeme, lex.paradigms.size());
    if (inserted) lex.paradigms.push_back({w.lexeme, {}});
    auto& para = lex.paradigms[it->second];
    auto [e, fresh] = para.entries.emplace(w.slot, w.form);
    if (!fresh) {
      if (e->second != w.form) {
        lex.warnings.push_back("duplicate " + w.lexeme + " / " + w.slot +
                               ": kept '" + e->second + "', dropped '" +
                               w.form + "'");
      }
      continue;
    }
    slots.insert(w.slot);
  }
  if (slots.empty()) {
    throw DataError("no forms left after POS filter '" +
                    std::string(pos_filter) + "'");
  }
  lex.inventory = SlotInventory({slots.begin(), slots.end()});
  return lex;
}

/// Character set of observed forms plus reserved symbols outside Unicode.
struct Alphabet {
  static constexpr char32_t kBegin = 0x110000;
  static constexpr char32_t kEnd = 0x110001;
  static constexpr char32_t kUnknown = 0x110002;

  std::set<char32_t> symbols;

  static bool is_reserved(char32_t c) { return c >= kBegin; }

  void add(std::string_view form) {
    for (char32_t c : utf8::decode(form)) symbols.insert(c);
  }
  bool contains(char32_t c) const { return symbols.count(c) != 0; }
  std::size_t size() const noexcept { return symbols.size(); }
};

/// Non-owning view of a conditioning form; std::nullopt means the empty
/// string (a root factor).
struct SourceView {
  std::string_view form;
  std::string_view slot;
};
using Conditioning = std::optional<SourceView>;

/// Token sequence fed to a reinflection model: source characters, then
/// IN=f for each source feature, then OUT=f for each target feature.
inline std::vector<std::string> encode_pair(const Conditioning& src,
                                            std::string_view tgt_slot) {
  std::vector<std::string> tokens;
  if (src) {
    for (char32_t c : utf8::decode(src->form)) {
      std::string t;
      utf8::append(t, c);
      tokens.push_back(std::move(t));
    }
    for (auto& f : slot_features(src->slot)) tokens.push_back("IN=" + f);
  }
  for (auto& f : slot_features(tgt_slot)) tokens.push_back("OUT=" + f);
  return tokens;
}

/// One directed training or evaluation mapping. Root mappings carry
/// src = "" and src_slot = "ROOT".
struct PairRecord {
  std::string lexeme;
  std::string src;
  SlotId src_slot;
  std::string tgt;
  SlotId tgt_slot;

  bool is_root() const noexcept { return src_slot == kRootSlot; }
  Conditioning source() const {
    if (is_root()) return std::nullopt;
    return SourceView{src, src_slot};
  }

  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

/// All mappings within one paradigm: for each filled target slot, the root
/// mapping and every non-identity mapping from another filled slot.
inline std::vector<PairRecord> expand_pairs(const Paradigm& p,
                                            bool include_roots = true) {
  std::vector<PairRecord> out;
  for (const auto& [tslot, tform] : p.entries) {
    if (include_roots) {
      out.push_back({p.lexeme, "", SlotId(kRootSlot), tform, tslot});
    }
    for (const auto& [sslot, sform] : p.entries) {
      if (sslot == tslot) continue;
      out.push_back({p.lexeme, sform, sslot, tform, tslot});
    }
  }
  return out;
}

enum class Regime { kPurple, kGreen };

inline std::string_view to_string(Regime r) {
  return r == Regime::kPurple ? "purple" : "green";
}

inline Regime parse_regime(std::string_view s) {
  if (s == "purple") return Regime::kPurple;
  if (s == "green") return Regime::kGreen;
  throw ParseError("unknown regime '" + std::string(s) +
                   "' (expected purple or green)");
}

struct SplitSpec {
  Regime regime = Regime::kGreen;
  std::size_t paradigm_count = 600;
  std::size_t pair_count = 60000;
  std::size_t dev_paradigms = 50;
  std::size_t test_paradigms = 50;
  std::uint64_t seed = 0;
};

struct DataSplit {
  std::vector<PairRecord> train;
  std::vector<Paradigm> dev;
  std::vector<Paradigm> test;
  std::vector<std::string> notes;

  std::vector<PairRecord> dev_pairs() const { return expand(dev); }
  std::vector<PairRecord> test_pairs() const { return expand(test); }

  static std::vector<PairRecord> expand(const std::vector<Paradigm>& ps) {
    std::vector<PairRecord> out;
    for (const auto& p : ps) {
      auto e = expand_pairs(p);
      out.insert(out.end(), e.begin(), e.end());
    }
    return out;
  }
};

/// Holds out dev and test paradigms (each with at least two filled slots)
/// and samples training mappings from the rest under `spec.regime`.
inline DataSplit make_split(const std::vector<Paradigm>& paradigms,
                            const SplitSpec& spec) {
  std::vector<std::size_t> order(paradigms.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = make_rng(spec.seed);
  shuffle(std::span<std::size_t>(order), rng);

  DataSplit split;
  std::vector<std::size_t> rest;
  for (std::size_t idx : order) {
    const bool eligible = paradigms[idx].size() >= 2;
    if (eligible && split.dev.size() < spec.dev_paradigms) {
      split.dev.push_back(paradigms[idx]);
    } else if (eligible && split.test.size() < spec.test_paradigms) {
      split.test.push_back(paradigms[idx]);
    } else {
      rest.push_back(idx);
    }
  }
  if (split.dev.size() < spec.dev_paradigms ||
      split.test.size() < spec.test_paradigms || rest.empty()) {
    const auto eligible = static_cast<std::size_t>(std::count_if(
        paradigms.begin(), paradigms.end(),
        [](const Paradigm& p) { return p.size() >= 2; }));
    throw DataError("too few paradigms: need " +
                    std::to_string(spec.dev_paradigms) + " dev + " +
                    std::to_string(spec.test_paradigms) +
                    " test paradigms with >= 2 filled slots plus at least 1 "
                    "for training; have " +
                    std::to_string(paradigms.size()) + " paradigms, " +
                    std::to_string(eligible) + " eligible");
  }

  if (spec.regime == Regime::kPurple) {
    std::size_t take = spec.paradigm_count;
    if (rest.size() < take) {
      split.notes.push_back("only " + std::to_string(rest.size()) +
                            " training paradigms available (requested " +
                            std::to_string(take) + "); using all");
      take = rest.size();
    }
    for (std::size_t k = 0; k < take; ++k) {
      auto e = expand_pairs(paradigms[rest[k]]);
      split.train.insert(split.train.end(), e.begin(), e.end());
    }
  } else {
    std::vector<PairRecord> pool;
    for (std::size_t idx : rest) {
      auto e = expand_pairs(paradigms[idx]);
      pool.insert(pool.end(), e.begin(), e.end());
    }
    if (pool.size() <= spec.pair_count) {
      if (pool.size() < spec.pair_count) {
        split.notes.push_back("only " + std::to_string(pool.size()) +
                              " training pairs available (requested " +
                              std::to_string(spec.pair_count) +
                              "); using all");
      }
      split.train = std::move(pool);
    } else {
      shuffle(std::span<PairRecord>(pool), rng, spec.pair_count);
      pool.resize(spec.pair_count);
      split.train = std::move(pool);
    }
  }
  return split;
}

// JSON ----------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const PairRecord& p) {
  j = {{"lexeme", p.lexeme},
       {"src", p.src},
       {"src_slot", p.src_slot},
       {"tgt", p.tgt},
       {"tgt_slot", p.tgt_slot}};
}

inline void from_json(const nlohmann::json& j, PairRecord& p) {
  p.lexeme = j.value("lexeme", "");
  j.at("src").get_to(p.src);
  j.at("src_slot").get_to(p.src_slot);
  j.at("tgt").get_to(p.tgt);
  j.at("tgt_slot").get_to(p.tgt_slot);
}

inline void to_json(nlohmann::json& j, const Paradigm& p) {
  j = {{"lexeme", p.lexeme}, {"entries", p.entries}};
}

inline void from_json(const nlohmann::json& j, Paradigm& p) {
  j.at("lexeme").get_to(p.lexeme);
  j.at("entries").get_to(p.entries);
}

inline nlohmann::json split_to_json(const DataSplit& s) {
  return {{"train", s.train},
          {"dev_paradigms", s.dev},
          {"test_paradigms", s.test},
          {"dev_pairs", s.dev_pairs()},
          {"test_pairs", s.test_pairs()},
          {"notes", s.notes}};
}

inline DataSplit split_from_json(const nlohmann::json& j) {
  DataSplit s;
  j.at("train").get_to(s.train);
  j.at("dev_paradigms").get_to(s.dev);
  j.at("test_paradigms").get_to(s.test);
  if (j.contains("notes")) j.at("notes").get_to(s.notes);
  return s;
}

inline nlohmann::json lexicon_to_json(const Lexicon& lex) {
  return {{"slots", lex.inventory.slots()}, {"paradigms", lex.paradigms}};
}

inline Lexicon lexicon_from_json(const nlohmann::json& j) {
  Lexicon lex;
  lex.inventory = SlotInventory(j.at("slots").get<std::vector<SlotId>>());
  j.at("paradigms").get_to(lex.paradigms);
  return lex;
}

}  // namespace morphcx
