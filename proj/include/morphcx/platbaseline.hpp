#pragma once

// Exponent-plat baseline: pairwise conditional exponent distributions,
// conditional entropies H(i|j), and their average over ordered slot pairs.

#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "morphcx/corpus.hpp"
#include "morphcx/error.hpp"
#include "morphcx/structure.hpp"

namespace morphcx {

/// Inflection classes x slots table of exponents ("" is the null exponent).
struct Plat {
  std::vector<std::string> classes;
  std::vector<double> weights;
  std::vector<SlotId> slots;
  std::vector<std::vector<std::string>> exponents;  // [class][slot]

  std::size_t slot_count() const noexcept { return slots.size(); }
  std::size_t class_count() const noexcept { return classes.size(); }

  std::size_t slot_index(std::string_view slot) const {
    for (std::size_t s = 0; s < slots.size(); ++s) {
      if (slots[s] == slot) return s;
    }
    throw LookupError("slot not in plat: " + std::string(slot));
  }

  void validate() const {
    if (classes.empty() || slots.empty()) throw DataError("plat needs classes and slots");
    if (weights.size() != classes.size() || exponents.size() != classes.size()) {
      throw DataError("plat rows inconsistent with class list");
    }
    double total = 0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      if (exponents[c].size() != slots.size()) {
        throw DataError("class " + classes[c] + " does not fill every slot");
      }
      if (!(weights[c] >= 0)) throw DataError("negative class weight");
      total += weights[c];
    }
    if (std::abs(total - 1) > 1e-9) throw DataError("class weights must sum to 1");
  }
};

namespace detail {

inline std::string plat_cell(std::string_view cell) {
  cell = trim(cell);
  if (cell.size() >= 1 && cell.front() == '-') cell.remove_prefix(1);
  if (cell == "∅") return {};
  return std::string(cell);
}

}  // namespace detail

/// TSV: header "class[<TAB>weight]<TAB>slot...", then one row per class.
/// Cells may carry a leading "-"; "∅" and "-" denote the null exponent.
/// Without a weight column, classes are equiprobable.
inline Plat parse_plat(std::istream& in) {
  Plat plat;
  std::string line;
  std::size_t lineno = 0;
  bool header = true;
  bool has_weights = false;
  double weight_sum = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (detail::trim(view).empty() || view.front() == '#') continue;
    const auto f = detail::split(view, '\t');
    if (header) {
      if (f.size() < 2) throw ParseError("plat header needs at least one slot", lineno);
      has_weights = detail::trim(f[1]) == "weight";
      for (std::size_t k = has_weights ? 2 : 1; k < f.size(); ++k) {
        plat.slots.emplace_back(detail::trim(f[k]));
      }
      if (plat.slots.empty()) throw ParseError("plat header needs at least one slot", lineno);
      header = false;
      continue;
    }
    const std::size_t offset = has_weights ? 2 : 1;
    if (f.size() != offset + plat.slots.size()) {
      throw ParseError("expected " + std::to_string(offset + plat.slots.size()) +
                           " cells, found " + std::to_string(f.size()),
                       lineno);
    }
    plat.classes.emplace_back(detail::trim(f[0]));
    double w = 1;
    if (has_weights) {
      try {
        w = std::stod(std::string(detail::trim(f[1])));
      } catch (const std::exception&) {
        throw ParseError("bad class weight", lineno);
      }
      if (!(w >= 0)) throw ParseError("negative class weight", lineno);
    }
    plat.weights.push_back(w);
    weight_sum += w;
    std::vector<std::string> row;
    for (std::size_t k = offset; k < f.size(); ++k) row.push_back(detail::plat_cell(f[k]));
    plat.exponents.push_back(std::move(row));
  }
  if (plat.classes.empty()) throw ParseError("plat has no class rows");
  if (!(weight_sum > 0)) throw ParseError("class weights sum to zero");
  for (auto& w : plat.weights) w /= weight_sum;
  return plat;
}

using CondDist = std::map<std::string, double>;

/// r(m_i | m_j = exponent_j): slot-i exponents of the classes whose slot-j
/// exponent is exponent_j, weighted by class weight and renormalized.
inline CondDist cond_dist(const Plat& plat, std::size_t slot_i, std::size_t slot_j,
                          std::string_view exponent_j) {
  CondDist out;
  double mass = 0;
  for (std::size_t c = 0; c < plat.class_count(); ++c) {
    if (plat.exponents[c].at(slot_j) != exponent_j) continue;
    out[plat.exponents[c].at(slot_i)] += plat.weights[c];
    mass += plat.weights[c];
  }
  if (out.empty()) {
    throw LookupError("exponent '" + std::string(exponent_j) + "' does not occur in slot " +
                      plat.slots.at(slot_j));
  }
  if (mass > 0) {
    for (auto& [_, p] : out) p /= mass;
  }
  return out;
}

inline double entropy_bits(const CondDist& d) {
  double h = 0;
  for (const auto& [_, p] : d) {
    if (p > 0) h -= p * std::log2(p);
  }
  return h;
}

/// Marginal distribution of the exponents in one column.
inline CondDist column_marginal(const Plat& plat, std::size_t slot) {
  CondDist out;
  for (std::size_t c = 0; c < plat.class_count(); ++c) {
    out[plat.exponents[c].at(slot)] += plat.weights[c];
  }
  return out;
}

/// H(i | j) = sum over exponents e of column j of P(e) H(r(. | e)).
inline double cond_entropy(const Plat& plat, std::size_t slot_i, std::size_t slot_j) {
  if (slot_i == slot_j) throw DataError("conditional entropy of a slot given itself");
  double h = 0;
  for (const auto& [e, p] : column_marginal(plat, slot_j)) {
    if (p > 0) h += p * entropy_bits(cond_dist(plat, slot_i, slot_j, e));
  }
  return h;
}

/// Mean of H(i | j) over all n^2 - n ordered pairs.
inline double avg_cond_entropy(const Plat& plat) {
  const std::size_t n = plat.slot_count();
  if (n < 2) throw DataError("average conditional entropy needs at least 2 slots");
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) sum += cond_entropy(plat, i, j);
    }
  }
  return sum / static_cast<double>(n * n - n);
}

/// Entropy of the class variable.
inline double class_entropy(const Plat& plat) {
  double h = 0;
  for (double w : plat.weights) {
    if (w > 0) h -= w * std::log2(w);
  }
  return h;
}

/// Entropy of the full exponent vector (classes with identical rows merge).
inline double joint_exponent_entropy(const Plat& plat) {
  std::map<std::vector<std::string>, double> rows;
  for (std::size_t c = 0; c < plat.class_count(); ++c) rows[plat.exponents[c]] += plat.weights[c];
  double h = 0;
  for (const auto& [_, p] : rows) {
    if (p > 0) h -= p * std::log2(p);
  }
  return h;
}

struct TreeConditional {
  Arborescence tree;
  /// Sum of H(i | pa(i)) over non-root slots of the best tree.
  double bits = 0;
};

/// Arborescence minimizing the summed conditional entropies, i.e. each slot
/// is charged only for its single best-placed predictor.
inline TreeConditional best_tree_conditional(const Plat& plat) {
  const std::size_t n = plat.slot_count();
  WeightMatrix w(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) w.edge(i, j) = -cond_entropy(plat, i, j);
    }
  }
  TreeConditional out;
  out.tree = max_arborescence(w);
  out.bits = -tree_score(out.tree, w);
  return out;
}

/// Probability the plat assigns to form_i given form_j: form_j is split into
/// stem + exponent for every column-j exponent it ends with (weighted by the
/// column marginal), and the stem is re-suffixed. Forms outside that finite
/// set get probability 0.
inline double plat_form_prob(const Plat& plat, std::size_t slot_i, std::size_t slot_j,
                             std::string_view form_j, std::string_view form_i) {
  const auto marginal = column_marginal(plat, slot_j);
  double mass = 0;
  double hit = 0;
  for (const auto& [e, p] : marginal) {
    if (form_j.size() < e.size() || form_j.substr(form_j.size() - e.size()) != e) continue;
    mass += p;
    const auto stem = form_j.substr(0, form_j.size() - e.size());
    for (const auto& [ei, q] : cond_dist(plat, slot_i, slot_j, e)) {
      if (form_i.size() == stem.size() + ei.size() &&
          form_i.substr(0, stem.size()) == stem && form_i.substr(stem.size()) == ei) {
        hit += p * q;
      }
    }
  }
  return mass > 0 ? hit / mass : 0.0;
}

}  // namespace morphcx
