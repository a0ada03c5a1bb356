#pragma once

// Conditional string models q(m_i | m_j) and q(m_i | empty) with support
// over all strings: a suffix edit-rule distribution interpolated with a
// smoothed character n-gram. All log-probabilities are base 2.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "morphcx/arborescence.hpp"
#include "morphcx/corpus.hpp"
#include "morphcx/error.hpp"
#include "morphcx/utf8.hpp"

namespace morphcx {

/// Anything that scores log2 q(tgt_form | src) for a target slot.
template <class S>
concept ConditionalScorer = requires(const S& s, const Conditioning& src,
                                     std::string_view slot,
                                     std::string_view form) {
  { s.logprob(src, slot, form) } -> std::convertible_to<double>;
};

// Edit rules ------------------------------------------------------------------

struct EditRule {
  std::u32string src_suffix;
  std::u32string tgt_suffix;
  double count = 0;
};

/// Factors src = P + a, tgt = P + b with P the longest common prefix and
/// returns the rule a -> b.
inline EditRule extract_rule(std::u32string_view src, std::u32string_view tgt) {
  const auto [s_it, t_it] =
      std::mismatch(src.begin(), src.end(), tgt.begin(), tgt.end());
  const auto lcp = static_cast<std::size_t>(s_it - src.begin());
  return {std::u32string(src.substr(lcp)), std::u32string(tgt.substr(lcp)), 1};
}

/// src with src_suffix replaced by tgt_suffix, or nullopt if not applicable.
inline std::optional<std::u32string> apply_rule(std::u32string_view src,
                                                const EditRule& rule) {
  if (src.size() < rule.src_suffix.size() ||
      src.substr(src.size() - rule.src_suffix.size()) != rule.src_suffix) {
    return std::nullopt;
  }
  std::u32string out(src.substr(0, src.size() - rule.src_suffix.size()));
  out += rule.tgt_suffix;
  return out;
}

/// Rule counts for one (source slot, target slot) pair, indexed by source
/// suffix so applicable rules are found by walking the suffixes of a form.
class EditRuleTable {
 public:
  void add(const EditRule& r) {
    rules_[r.src_suffix][r.tgt_suffix] += r.count;
  }

  bool empty() const noexcept { return rules_.empty(); }

  std::size_t rule_count() const {
    std::size_t n = 0;
    for (const auto& [_, row] : rules_) n += row.size();
    return n;
  }

  std::vector<EditRule> rules() const {
    std::vector<EditRule> out;
    for (const auto& [s, row] : rules_) {
      for (const auto& [t, c] : row) out.push_back({s, t, c});
    }
    return out;
  }

  /// Distribution over outputs of the rules applicable to src, each rule
  /// weighted count + alpha. Empty when nothing applies.
  std::map<std::u32string, double> outputs(std::u32string_view src,
                                           double alpha) const {
    std::map<std::u32string, double> out;
    double total = 0;
    for (std::size_t len = 0; len <= src.size(); ++len) {
      const auto it = rules_.find(std::u32string(src.substr(src.size() - len)));
      if (it == rules_.end()) continue;
      const auto stem = src.substr(0, src.size() - len);
      for (const auto& [tgt_suffix, count] : it->second) {
        std::u32string form(stem);
        form += tgt_suffix;
        out[form] += count + alpha;
        total += count + alpha;
      }
    }
    for (auto& [_, p] : out) p /= total;
    return out;
  }

  /// q_rules(tgt | src), or nullopt when no rule applies to src.
  std::optional<double> prob(std::u32string_view src, std::u32string_view tgt,
                             double alpha) const {
    double total = 0;
    double hit = 0;
    for (std::size_t len = 0; len <= src.size(); ++len) {
      const auto it = rules_.find(std::u32string(src.substr(src.size() - len)));
      if (it == rules_.end()) continue;
      const auto stem = src.substr(0, src.size() - len);
      const bool stem_matches =
          tgt.size() >= stem.size() && tgt.substr(0, stem.size()) == stem;
      for (const auto& [tgt_suffix, count] : it->second) {
        total += count + alpha;
        if (stem_matches && tgt.size() == stem.size() + tgt_suffix.size() &&
            tgt.substr(stem.size()) == tgt_suffix) {
          hit += count + alpha;
        }
      }
    }
    if (total == 0) return std::nullopt;
    return hit / total;
  }

 private:
  std::map<std::u32string, std::map<std::u32string, double>> rules_;
};

// Character n-gram ----------------------------------------------------------

/// Add-alpha smoothed character k-gram over alphabet + {unknown, end}.
/// Every history yields a proper distribution, so the model is a
/// distribution over all strings (including the empty one).
class CharNGram {
 public:
  struct Row {
    std::map<char32_t, double> next;
    double total = 0;
  };

  explicit CharNGram(int order = 3, double alpha = 0.1)
      : order_(order), alpha_(alpha) {
    if (order < 1) throw Error("n-gram order must be >= 1");
    if (!(alpha > 0)) throw Error("smoothing alpha must be positive");
  }

  int order() const noexcept { return order_; }
  double alpha() const noexcept { return alpha_; }
  const std::map<std::u32string, Row>& rows() const noexcept { return rows_; }

  /// Symbols must already be mapped onto the alphabet (see Alphabet).
  void add(std::u32string_view symbols, double weight = 1) {
    std::u32string hist(static_cast<std::size_t>(order_ - 1), Alphabet::kBegin);
    for (std::size_t i = 0; i <= symbols.size(); ++i) {
      const char32_t sym = i < symbols.size() ? symbols[i] : Alphabet::kEnd;
      auto& row = rows_[hist];
      row.next[sym] += weight;
      row.total += weight;
      if (!hist.empty()) {
        hist.erase(hist.begin());
        hist.push_back(sym);
      }
    }
  }

  void set_row(std::u32string history, Row row) {
    rows_[std::move(history)] = std::move(row);
  }

  /// P(sym | history) with `vocab` outcomes (alphabet + unknown + end).
  double next_prob(std::u32string_view history, char32_t sym,
                   std::size_t vocab) const {
    const auto it = rows_.find(std::u32string(history));
    if (it == rows_.end()) return 1.0 / static_cast<double>(vocab);
    const auto s = it->second.next.find(sym);
    const double c = s == it->second.next.end() ? 0.0 : s->second;
    return (c + alpha_) /
           (it->second.total + alpha_ * static_cast<double>(vocab));
  }

  double log2prob(std::u32string_view symbols, std::size_t vocab) const {
    std::u32string hist(static_cast<std::size_t>(order_ - 1), Alphabet::kBegin);
    double lp = 0;
    for (std::size_t i = 0; i <= symbols.size(); ++i) {
      const char32_t sym = i < symbols.size() ? symbols[i] : Alphabet::kEnd;
      lp += std::log2(next_prob(hist, sym, vocab));
      if (!hist.empty()) {
        hist.erase(hist.begin());
        hist.push_back(sym);
      }
    }
    return lp;
  }

 private:
  int order_;
  double alpha_;
  std::map<std::u32string, Row> rows_;
};

// The model -----------------------------------------------------------------

struct TrainOptions {
  int order = 3;
  double alpha = 0.1;
  std::vector<double> lambda_grid{0.5, 0.2, 0.1, 0.05, 0.01, 0.001};
  /// Used when there is no dev data to select from.
  double default_lambda = 0.05;
};

class ConditionalParadigmModel {
 public:
  static constexpr int kFormatVersion = 1;

  ConditionalParadigmModel() = default;

  const TrainOptions& options() const noexcept { return options_; }
  double lambda() const noexcept { return lambda_; }
  const Alphabet& alphabet() const noexcept { return alphabet_; }
  const std::vector<std::string>& notes() const noexcept { return notes_; }
  const std::map<std::pair<SlotId, SlotId>, EditRuleTable>& rule_tables()
      const noexcept {
    return rule_tables_;
  }
  const std::map<SlotId, CharNGram>& char_models() const noexcept {
    return char_models_;
  }

  /// Outcomes per character position: alphabet, unknown symbol, end.
  std::size_t vocabulary() const noexcept { return alphabet_.size() + 2; }

  /// Maps characters outside the alphabet onto the unknown symbol.
  std::u32string map_symbols(std::string_view form) const {
    auto s = utf8::decode(form);
    for (auto& c : s) {
      if (!alphabet_.contains(c)) c = Alphabet::kUnknown;
    }
    return s;
  }

  std::size_t unknown_symbols(std::string_view form) const {
    const auto s = map_symbols(form);
    return static_cast<std::size_t>(
        std::count(s.begin(), s.end(), Alphabet::kUnknown));
  }

  const CharNGram& char_model(std::string_view slot) const {
    const auto it = char_models_.find(std::string(slot));
    return it == char_models_.end() ? fallback_ : it->second;
  }

  double char_log2prob(std::string_view tgt_slot,
                       std::string_view tgt_form) const {
    return char_model(tgt_slot).log2prob(map_symbols(tgt_form), vocabulary());
  }

  const EditRuleTable* rule_table(std::string_view src_slot,
                                  std::string_view tgt_slot) const {
    const auto it = rule_tables_.find({std::string(src_slot), std::string(tgt_slot)});
    return it == rule_tables_.end() ? nullptr : &it->second;
  }

  /// q_rules(tgt | src) or nullopt when no rule for the slot pair applies.
  std::optional<double> rule_prob(const SourceView& src,
                                  std::string_view tgt_slot,
                                  std::string_view tgt_form) const {
    const auto* table = rule_table(src.slot, tgt_slot);
    if (!table) return std::nullopt;
    return table->prob(utf8::decode(src.form), utf8::decode(tgt_form),
                       options_.alpha);
  }

  /// log2 q(tgt_form | src) in bits. Finite for every input.
  double logprob(const Conditioning& src, std::string_view tgt_slot,
                 std::string_view tgt_form) const {
    return mix(src ? rule_prob(*src, tgt_slot, tgt_form) : std::nullopt,
               char_log2prob(tgt_slot, tgt_form), lambda_);
  }

  /// (1 - lambda) q_rules + lambda q_char, computed without underflow;
  /// falls back to q_char alone when no rule applies.
  static double mix(std::optional<double> rule_p, double char_lp,
                    double lambda) {
    if (!rule_p) return char_lp;
    if (*rule_p > 0) {
      return std::log2((1 - lambda) * *rule_p + lambda * std::exp2(char_lp));
    }
    return std::log2(lambda) + char_lp;
  }

  friend ConditionalParadigmModel train(const std::vector<PairRecord>&,
                                        const TrainOptions&,
                                        const std::vector<PairRecord>&);
  friend nlohmann::json model_to_json(const ConditionalParadigmModel&);
  friend ConditionalParadigmModel model_from_json(const nlohmann::json&);

 private:
  TrainOptions options_;
  double lambda_ = 0.05;
  Alphabet alphabet_;
  std::map<std::pair<SlotId, SlotId>, EditRuleTable> rule_tables_;
  std::map<SlotId, CharNGram> char_models_;
  CharNGram fallback_;
  std::vector<std::string> notes_;
};

/// Maximum-likelihood counts for the rule tables and character models;
/// the interpolation weight is the grid value with the lowest dev
/// cross-entropy.
inline ConditionalParadigmModel train(const std::vector<PairRecord>& pairs,
                                      const TrainOptions& options,
                                      const std::vector<PairRecord>& dev_pairs) {
  if (pairs.empty()) throw DataError("no training pairs");
  ConditionalParadigmModel m;
  m.options_ = options;
  m.fallback_ = CharNGram(options.order, options.alpha);
  for (const auto& p : pairs) {
    m.alphabet_.add(p.tgt);
    m.alphabet_.add(p.src);
  }
  for (const auto& p : pairs) {
    const auto tgt = m.map_symbols(p.tgt);
    auto [it, _] = m.char_models_.try_emplace(p.tgt_slot, options.order,
                                              options.alpha);
    it->second.add(tgt);
    m.fallback_.add(tgt);
    if (!p.is_root()) {
      m.rule_tables_[{p.src_slot, p.tgt_slot}].add(
          extract_rule(utf8::decode(p.src), utf8::decode(p.tgt)));
    }
  }

  if (dev_pairs.empty() || options.lambda_grid.empty()) {
    m.lambda_ = options.default_lambda;
    m.notes_.push_back("no dev pairs; lambda defaults to " +
                       std::to_string(options.default_lambda));
    return m;
  }
  // Both mixture components are independent of lambda, so score them once.
  std::vector<std::pair<std::optional<double>, double>> parts;
  parts.reserve(dev_pairs.size());
  for (const auto& p : dev_pairs) {
    const auto src = p.source();
    parts.emplace_back(src ? m.rule_prob(*src, p.tgt_slot, p.tgt) : std::nullopt,
                       m.char_log2prob(p.tgt_slot, p.tgt));
  }
  double best = std::numeric_limits<double>::infinity();
  for (double lambda : options.lambda_grid) {
    if (!(lambda > 0 && lambda < 1)) {
      throw Error("lambda grid values must lie in (0, 1)");
    }
    double ce = 0;
    for (const auto& [rp, clp] : parts) {
      ce -= ConditionalParadigmModel::mix(rp, clp, lambda);
    }
    ce /= static_cast<double>(parts.size());
    if (ce < best) {
      best = ce;
      m.lambda_ = lambda;
    }
  }
  return m;
}

/// Sum of log2 q(m_i | m_pa(i)) over the filled slots of `paradigm`. A
/// slot whose parent is the root or is unfilled is conditioned on the empty
/// string.
template <ConditionalScorer Scorer>
double joint_logprob(const Scorer& model, const SlotInventory& inventory,
                     const Arborescence& tree, const Paradigm& paradigm) {
  if (tree.size() != inventory.size()) {
    throw Error("tree has " + std::to_string(tree.size()) +
                " slots, inventory has " + std::to_string(inventory.size()));
  }
  double total = 0;
  for (std::size_t i = 0; i < inventory.size(); ++i) {
    const std::string* form = paradigm.find(inventory[i]);
    if (!form) continue;
    const std::size_t pa = tree.parent[i];
    const std::string* pa_form =
        pa == Arborescence::kNone ? nullptr : paradigm.find(inventory[pa]);
    const Conditioning src =
        pa_form ? Conditioning(SourceView{*pa_form, inventory[pa]})
                : std::nullopt;
    total += model.logprob(src, inventory[i], *form);
  }
  return total;
}

// Serialization ---------------------------------------------------------------

namespace detail {

inline std::vector<std::uint32_t> to_codes(std::u32string_view s) {
  return {s.begin(), s.end()};
}

inline std::u32string from_codes(const std::vector<std::uint32_t>& v) {
  return {v.begin(), v.end()};
}

inline nlohmann::json ngram_to_json(const CharNGram& g) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [hist, row] : g.rows()) {
    nlohmann::json next = nlohmann::json::array();
    for (const auto& [sym, c] : row.next) {
      next.push_back({static_cast<std::uint32_t>(sym), c});
    }
    rows.push_back({to_codes(hist), next});
  }
  return {{"order", g.order()}, {"alpha", g.alpha()}, {"rows", rows}};
}

inline CharNGram ngram_from_json(const nlohmann::json& j) {
  CharNGram g(j.at("order").get<int>(), j.at("alpha").get<double>());
  for (const auto& r : j.at("rows")) {
    CharNGram::Row row;
    for (const auto& e : r.at(1)) {
      const double c = e.at(1).get<double>();
      row.next[static_cast<char32_t>(e.at(0).get<std::uint32_t>())] = c;
      row.total += c;
    }
    g.set_row(from_codes(r.at(0).get<std::vector<std::uint32_t>>()),
              std::move(row));
  }
  return g;
}

}  // namespace detail

inline nlohmann::json model_to_json(const ConditionalParadigmModel& m) {
  nlohmann::json tables = nlohmann::json::array();
  for (const auto& [key, table] : m.rule_tables_) {
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& r : table.rules()) {
      rules.push_back(
          {detail::to_codes(r.src_suffix), detail::to_codes(r.tgt_suffix), r.count});
    }
    tables.push_back(
        {{"src_slot", key.first}, {"tgt_slot", key.second}, {"rules", rules}});
  }
  nlohmann::json chars = nlohmann::json::object();
  for (const auto& [slot, g] : m.char_models_) chars[slot] = detail::ngram_to_json(g);
  std::vector<std::uint32_t> alphabet(m.alphabet_.symbols.begin(),
                                      m.alphabet_.symbols.end());
  return {{"format", "morphcx-model"},
          {"version", ConditionalParadigmModel::kFormatVersion},
          {"order", m.options_.order},
          {"alpha", m.options_.alpha},
          {"lambda_grid", m.options_.lambda_grid},
          {"default_lambda", m.options_.default_lambda},
          {"lambda", m.lambda_},
          {"alphabet", alphabet},
          {"rule_tables", tables},
          {"char_models", chars},
          {"fallback", detail::ngram_to_json(m.fallback_)},
          {"notes", m.notes_}};
}

inline ConditionalParadigmModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "morphcx-model") {
    throw ParseError("not a morphcx model file");
  }
  if (j.at("version").get<int>() != ConditionalParadigmModel::kFormatVersion) {
    throw ParseError("unsupported model version " + j.at("version").dump());
  }
  ConditionalParadigmModel m;
  j.at("order").get_to(m.options_.order);
  j.at("alpha").get_to(m.options_.alpha);
  j.at("lambda_grid").get_to(m.options_.lambda_grid);
  j.at("default_lambda").get_to(m.options_.default_lambda);
  j.at("lambda").get_to(m.lambda_);
  for (auto c : j.at("alphabet").get<std::vector<std::uint32_t>>()) {
    m.alphabet_.symbols.insert(static_cast<char32_t>(c));
  }
  for (const auto& t : j.at("rule_tables")) {
    auto& table = m.rule_tables_[{t.at("src_slot").get<std::string>(),
                                  t.at("tgt_slot").get<std::string>()}];
    for (const auto& r : t.at("rules")) {
      table.add({detail::from_codes(r.at(0).get<std::vector<std::uint32_t>>()),
                 detail::from_codes(r.at(1).get<std::vector<std::uint32_t>>()),
                 r.at(2).get<double>()});
    }
  }
  for (const auto& [slot, g] : j.at("char_models").items()) {
    m.char_models_.emplace(slot, detail::ngram_from_json(g));
  }
  m.fallback_ = detail::ngram_from_json(j.at("fallback"));
  j.at("notes").get_to(m.notes_);
  return m;
}

// Imported scores -------------------------------------------------------------

/// log2-probabilities computed elsewhere (e.g. by a neural reinflection
/// model), keyed by (src, src_slot, tgt_slot, tgt). Root rows use an empty
/// src and src_slot "ROOT".
class ScoreTable {
 public:
  void insert(std::string_view src, std::string_view src_slot,
              std::string_view tgt_slot, std::string_view tgt, double lp) {
    if (!(lp <= 0) || !std::isfinite(lp)) {
      throw ParseError("log2prob must be finite and <= 0");
    }
    const auto [it, fresh] = scores_.emplace(key(src, src_slot, tgt_slot, tgt), lp);
    if (!fresh && it->second != lp) {
      throw ParseError("conflicting scores for " + describe(src, src_slot, tgt_slot, tgt));
    }
  }

  std::size_t size() const noexcept { return scores_.size(); }

  double lookup(std::string_view src, std::string_view src_slot,
                std::string_view tgt_slot, std::string_view tgt) const {
    const auto it = scores_.find(key(src, src_slot, tgt_slot, tgt));
    if (it == scores_.end()) {
      throw LookupError("no imported score for " +
                        describe(src, src_slot, tgt_slot, tgt));
    }
    return it->second;
  }

  double logprob(const Conditioning& src, std::string_view tgt_slot,
                 std::string_view tgt_form) const {
    if (!src) return lookup("", kRootSlot, tgt_slot, tgt_form);
    return lookup(src->form, src->slot, tgt_slot, tgt_form);
  }

 private:
  static std::string key(std::string_view a, std::string_view b,
                         std::string_view c, std::string_view d) {
    std::string k;
    k.reserve(a.size() + b.size() + c.size() + d.size() + 3);
    k.append(a).push_back('\t');
    k.append(b).push_back('\t');
    k.append(c).push_back('\t');
    k.append(d);
    return k;
  }

  static std::string describe(std::string_view a, std::string_view b,
                              std::string_view c, std::string_view d) {
    return "(src='" + std::string(a) + "', src_slot='" + std::string(b) +
           "', tgt_slot='" + std::string(c) + "', tgt='" + std::string(d) + "')";
  }

  std::map<std::string, double> scores_;
};

/// Reads src<TAB>src_slot<TAB>tgt_slot<TAB>tgt<TAB>log2prob rows.
inline ScoreTable load_scores(std::istream& in) {
  ScoreTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (detail::trim(view).empty() || view.front() == '#') continue;
    const auto f = detail::split(view, '\t');
    if (f.size() != 5) {
      throw ParseError("expected 5 tab-separated fields", lineno);
    }
    double lp = 0;
    try {
      std::size_t used = 0;
      const std::string num(detail::trim(f[4]));
      lp = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument(num);
    } catch (const std::exception&) {
      throw ParseError("bad log2prob '" + std::string(f[4]) + "'", lineno);
    }
    try {
      table.insert(f[0], f[1], f[2], f[3], lp);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return table;
}

}  // namespace morphcx
