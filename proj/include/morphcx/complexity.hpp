#pragma once

// Enumerative complexity (paradigm size) and integrative complexity
// (held-out cross-entropy of the tree-factored model), plus a synthetic
// inflection-class generator with analytically known class entropy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "morphcx/arborescence.hpp"
#include "morphcx/corpus.hpp"
#include "morphcx/error.hpp"
#include "morphcx/parallel.hpp"
#include "morphcx/rng.hpp"
#include "morphcx/strmodel.hpp"
#include "morphcx/utf8.hpp"

namespace morphcx {

/// Largest number of filled slots in any paradigm.
inline std::size_t e_complexity(const std::vector<Paradigm>& paradigms) {
  if (paradigms.empty()) throw DataError("e-complexity of an empty paradigm set");
  std::size_t best = 0;
  for (const auto& p : paradigms) best = std::max(best, p.size());
  return best;
}

struct IComplexity {
  /// -(1/d) sum of joint log2 q over test paradigms.
  double total_bits = 0;
  /// total_bits / n for full paradigms; bits per scored form otherwise.
  double per_form_bits = 0;
  std::size_t d = 0;
  std::size_t scored_forms = 0;
};

template <ConditionalScorer Scorer>
IComplexity i_complexity(const Scorer& model, const SlotInventory& inventory,
                         const Arborescence& tree,
                         const std::vector<Paradigm>& test,
                         std::size_t threads = 1) {
  if (test.empty()) throw DataError("no test paradigms");
  std::vector<double> bits(test.size());
  parallel_for(test.size(), threads, [&](std::size_t k) {
    bits[k] = -joint_logprob(model, inventory, tree, test[k]);
  });
  IComplexity out;
  out.d = test.size();
  double sum = 0;
  for (std::size_t k = 0; k < test.size(); ++k) {
    sum += bits[k];
    for (const auto& [slot, _] : test[k].entries) {
      if (inventory.find(slot)) ++out.scored_forms;
    }
  }
  out.total_bits = sum / static_cast<double>(out.d);
  const std::size_t n = inventory.size();
  if (out.scored_forms == out.d * n) {
    out.per_form_bits = out.total_bits / static_cast<double>(n);
  } else {
    out.per_form_bits = out.scored_forms ? sum / static_cast<double>(out.scored_forms) : 0;
  }
  return out;
}

/// One (e-complexity, i-complexity) measurement for a language and POS.
struct ComplexityPoint {
  std::string language;
  std::string pos;
  std::string regime;
  std::size_t e_complexity = 0;
  double i_total_bits = 0;
  double i_per_form_bits = 0;
  std::size_t d = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::string_view kPointCsvHeader =
    "language,pos,regime,e_complexity,i_total_bits,i_per_form_bits,d,seed";

inline std::string to_csv_row(const ComplexityPoint& p) {
  return fmt::format("{},{},{},{},{},{},{},{}", p.language, p.pos, p.regime,
                     p.e_complexity, p.i_total_bits, p.i_per_form_bits, p.d,
                     p.seed);
}

// Synthetic inflection systems -----------------------------------------------

struct SynthSpec {
  std::size_t n = 4;
  std::vector<double> class_probs{1.0};
  /// suffixes[c][s]: exponent of class c in slot s.
  std::vector<std::vector<std::string>> suffixes;
  std::string stem_alphabet = "ptkbdgmnaeiou";
  std::size_t stem_min = 3;
  std::size_t stem_max = 6;
  std::string pos = "N";
  std::uint64_t seed = 0;
};

/// Paradigms are stem + class suffix per slot. Stems and classes are drawn
/// from separate streams, so two systems with the same seed share stems.
class SynthSystem {
 public:
  explicit SynthSystem(SynthSpec spec) : spec_(std::move(spec)) {
    if (spec_.n == 0) throw DataError("synthetic system needs n >= 1");
    if (spec_.class_probs.empty()) throw DataError("no inflection classes");
    double total = 0;
    for (double p : spec_.class_probs) {
      if (!(p >= 0) || !std::isfinite(p)) throw DataError("class probability out of range");
      total += p;
    }
    if (std::abs(total - 1) > 1e-9) {
      throw DataError(fmt::format("class probabilities sum to {}, not 1", total));
    }
    if (spec_.suffixes.size() != spec_.class_probs.size()) {
      throw DataError("suffix table needs one row per class");
    }
    for (const auto& row : spec_.suffixes) {
      if (row.size() != spec_.n) throw DataError("suffix row length differs from n");
    }
    alphabet_ = utf8::decode(spec_.stem_alphabet);
    if (alphabet_.empty()) throw DataError("empty stem alphabet");
    if (spec_.stem_min > spec_.stem_max) throw DataError("stem_min > stem_max");
    for (std::size_t s = 0; s < spec_.n; ++s) {
      slots_.push_back(fmt::format("{};S{:02}", spec_.pos, s + 1));
    }
  }

  const SynthSpec& spec() const noexcept { return spec_; }
  const std::vector<SlotId>& slots() const noexcept { return slots_; }

  /// -sum p_c log2 p_c
  double class_entropy() const {
    double h = 0;
    for (double p : spec_.class_probs) {
      if (p > 0) h -= p * std::log2(p);
    }
    return h;
  }

  std::vector<Paradigm> sample(std::size_t count) const {
    Rng stems = make_rng(spec_.seed, 1);
    Rng classes = make_rng(spec_.seed, 2);
    std::vector<Paradigm> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t len =
          spec_.stem_min + uniform_below(stems, spec_.stem_max - spec_.stem_min + 1);
      std::u32string stem;
      for (std::size_t c = 0; c < len; ++c) {
        stem.push_back(alphabet_[uniform_below(stems, alphabet_.size())]);
      }
      const std::size_t cls = draw_class(classes);
      Paradigm p{fmt::format("L{:06}", k), {}};
      const std::string base = utf8::encode(stem);
      for (std::size_t s = 0; s < spec_.n; ++s) {
        p.entries[slots_[s]] = base + spec_.suffixes[cls][s];
      }
      out.push_back(std::move(p));
    }
    return out;
  }

 private:
  std::size_t draw_class(Rng& rng) const {
    const double u = uniform_unit(rng);
    double acc = 0;
    for (std::size_t c = 0; c < spec_.class_probs.size(); ++c) {
      acc += spec_.class_probs[c];
      if (u < acc) return c;
    }
    return spec_.class_probs.size() - 1;
  }

  SynthSpec spec_;
  std::u32string alphabet_;
  std::vector<SlotId> slots_;
};

}  // namespace morphcx
