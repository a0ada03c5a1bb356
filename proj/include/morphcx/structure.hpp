#pragma once

// Structure learning for the tree-factored paradigm model: dev-set weights
// for every directed slot pair and root, and the maximum-weight spanning
// arborescence with exactly one root (Chu-Liu/Edmonds once per root).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "morphcx/arborescence.hpp"
#include "morphcx/corpus.hpp"
#include "morphcx/error.hpp"
#include "morphcx/parallel.hpp"
#include "morphcx/strmodel.hpp"

namespace morphcx {

/// Mean dev log2-probabilities. edge(i, j) is the weight of the edge j -> i
/// (predicting slot i from slot j); root(i) predicts i from the empty string.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  explicit WeightMatrix(std::size_t n)
      : n_(n), edge_(n * n, 0.0), root_(n, 0.0),
        edge_count_(n * n, 0), root_count_(n, 0) {}

  std::size_t size() const noexcept { return n_; }

  double& edge(std::size_t i, std::size_t j) { return edge_.at(i * n_ + j); }
  double edge(std::size_t i, std::size_t j) const { return edge_.at(i * n_ + j); }
  double& root(std::size_t i) { return root_.at(i); }
  double root(std::size_t i) const { return root_.at(i); }

  std::size_t& edge_count(std::size_t i, std::size_t j) {
    return edge_count_.at(i * n_ + j);
  }
  std::size_t edge_count(std::size_t i, std::size_t j) const {
    return edge_count_.at(i * n_ + j);
  }
  std::size_t& root_count(std::size_t i) { return root_count_.at(i); }
  std::size_t root_count(std::size_t i) const { return root_count_.at(i); }

  /// Cells that had no dev support and were filled in.
  std::vector<std::string> flags;

  friend bool operator==(const WeightMatrix&, const WeightMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> edge_;
  std::vector<double> root_;
  std::vector<std::size_t> edge_count_;
  std::vector<std::size_t> root_count_;
};

/// Averages log2 q(m_i | m_j) over dev paradigms where both slots are filled
/// and log2 q(m_i | empty) over paradigms where slot i is filled. Cells with
/// no support take the slot's root weight; a root with no support takes the
/// lowest supported root weight. Rows are computed in parallel; results do
/// not depend on `threads`.
template <ConditionalScorer Scorer>
WeightMatrix compute_weights(const Scorer& model, const SlotInventory& inventory,
                             const std::vector<Paradigm>& dev,
                             std::size_t threads = 1) {
  const std::size_t n = inventory.size();
  if (dev.empty()) throw DataError("no dev paradigms for structure learning");
  WeightMatrix w(n);
  parallel_for(n, threads, [&](std::size_t i) {
    double root_sum = 0;
    std::vector<double> sums(n, 0.0);
    for (const auto& p : dev) {
      const std::string* tgt = p.find(inventory[i]);
      if (!tgt) continue;
      root_sum += model.logprob(std::nullopt, inventory[i], *tgt);
      ++w.root_count(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const std::string* src = p.find(inventory[j]);
        if (!src) continue;
        sums[j] += model.logprob(SourceView{*src, inventory[j]}, inventory[i], *tgt);
        ++w.edge_count(i, j);
      }
    }
    if (w.root_count(i)) w.root(i) = root_sum / static_cast<double>(w.root_count(i));
    for (std::size_t j = 0; j < n; ++j) {
      if (w.edge_count(i, j)) {
        w.edge(i, j) = sums[j] / static_cast<double>(w.edge_count(i, j));
      }
    }
  });

  double floor = 0;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (w.root_count(i)) {
      floor = any ? std::min(floor, w.root(i)) : w.root(i);
      any = true;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!w.root_count(i)) {
      w.root(i) = floor;
      w.flags.push_back("slot " + inventory[i] +
                        " never filled in dev; root weight set to " +
                        std::to_string(floor));
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && !w.edge_count(i, j)) {
        w.edge(i, j) = w.root(i);
        w.flags.push_back("edge " + inventory[j] + " -> " + inventory[i] +
                          " unsupported in dev; using root weight");
      }
    }
  }
  return w;
}

/// root(r) + sum of edge(i, parent(i)).
inline double tree_score(const Arborescence& tree, const WeightMatrix& w) {
  if (tree.size() != w.size()) {
    throw Error("tree has " + std::to_string(tree.size()) +
                " vertices, weight matrix has " + std::to_string(w.size()));
  }
  double s = w.root(tree.root);
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (i != tree.root) s += w.edge(i, tree.parent[i]);
  }
  return s;
}

namespace detail {

struct ArcRef {
  std::size_t from;
  std::size_t to;
  double weight;
  std::size_t origin;  // index into the caller's arc list
};

inline constexpr std::size_t kNpos = std::numeric_limits<std::size_t>::max();

/// Chu-Liu/Edmonds maximum branching rooted at `root` on n vertices.
/// Returns indices into `arcs`, one incoming arc per non-root vertex.
inline std::vector<std::size_t> edmonds(std::size_t n, std::size_t root,
                                        const std::vector<ArcRef>& arcs) {
  std::vector<std::size_t> in(n, kNpos);
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    const auto& a = arcs[k];
    if (a.to == root || a.from == a.to) continue;
    const std::size_t cur = in[a.to];
    if (cur == kNpos || a.weight > arcs[cur].weight ||
        (a.weight == arcs[cur].weight && a.from < arcs[cur].from)) {
      in[a.to] = k;
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (v != root && in[v] == kNpos) throw Error("vertex unreachable from root");
  }

  std::vector<std::size_t> comp(n, kNpos);
  std::vector<std::size_t> mark(n, kNpos);
  std::size_t cycles = 0;
  for (std::size_t start = 0; start < n; ++start) {
    std::size_t v = start;
    while (v != root && mark[v] == kNpos && comp[v] == kNpos) {
      mark[v] = start;
      v = arcs[in[v]].from;
    }
    if (v != root && mark[v] == start && comp[v] == kNpos) {
      std::size_t u = v;
      do {
        comp[u] = cycles;
        u = arcs[in[u]].from;
      } while (u != v);
      ++cycles;
    }
  }

  std::vector<std::size_t> chosen = in;
  if (cycles == 0) {
    chosen.erase(chosen.begin() + static_cast<std::ptrdiff_t>(root));
    return chosen;
  }

  std::vector<bool> on_cycle(n);
  for (std::size_t v = 0; v < n; ++v) on_cycle[v] = comp[v] != kNpos;
  std::size_t next = cycles;
  for (auto& c : comp) {
    if (c == kNpos) c = next++;
  }
  std::vector<ArcRef> contracted;
  contracted.reserve(arcs.size());
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    const auto& a = arcs[k];
    const std::size_t cu = comp[a.from];
    const std::size_t cv = comp[a.to];
    if (cu == cv || a.to == root) continue;
    const double w = on_cycle[a.to] ? a.weight - arcs[in[a.to]].weight : a.weight;
    contracted.push_back({cu, cv, w, k});
  }
  for (std::size_t s : edmonds(next, comp[root], contracted)) {
    const std::size_t k = contracted[s].origin;
    chosen[arcs[k].to] = k;
  }
  chosen.erase(chosen.begin() + static_cast<std::ptrdiff_t>(root));
  return chosen;
}

}  // namespace detail

/// Maximum-weight arborescence of the complete digraph with the root fixed.
inline Arborescence max_arborescence_rooted(const WeightMatrix& w,
                                            std::size_t root) {
  const std::size_t n = w.size();
  std::vector<detail::ArcRef> arcs;
  arcs.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == root) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) arcs.push_back({j, i, w.edge(i, j), arcs.size()});
    }
  }
  Arborescence tree{root, std::vector<std::size_t>(n, Arborescence::kNone)};
  for (std::size_t k : detail::edmonds(n, root, arcs)) {
    tree.parent[arcs[k].to] = arcs[k].from;
  }
  return tree;
}

/// Best single-root spanning arborescence: one Edmonds run per candidate
/// root, keeping the lowest root index among equal scores.
inline Arborescence max_arborescence(const WeightMatrix& w,
                                     std::size_t threads = 1) {
  const std::size_t n = w.size();
  if (n == 0) throw DataError("empty weight matrix");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(w.root(i))) throw Error("non-finite root weight");
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && !std::isfinite(w.edge(i, j))) throw Error("non-finite edge weight");
    }
  }
  std::vector<Arborescence> trees(n);
  std::vector<double> scores(n);
  parallel_for(n, threads, [&](std::size_t r) {
    trees[r] = max_arborescence_rooted(w, r);
    scores[r] = tree_score(trees[r], w);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < n; ++r) {
    if (scores[r] > scores[best]) best = r;
  }
  return trees[best];
}

// Serialization ---------------------------------------------------------------

inline nlohmann::json weights_to_json(const WeightMatrix& w,
                                      const SlotInventory& inv) {
  const std::size_t n = w.size();
  nlohmann::json edge = nlohmann::json::array();
  nlohmann::json counts = nlohmann::json::array();
  for (std::size_t i = 0; i < n; ++i) {
    nlohmann::json row = nlohmann::json::array();
    nlohmann::json crow = nlohmann::json::array();
    for (std::size_t j = 0; j < n; ++j) {
      row.push_back(i == j ? nlohmann::json(nullptr) : nlohmann::json(w.edge(i, j)));
      crow.push_back(w.edge_count(i, j));
    }
    edge.push_back(row);
    counts.push_back(crow);
  }
  std::vector<double> root(n);
  std::vector<std::size_t> root_count(n);
  for (std::size_t i = 0; i < n; ++i) {
    root[i] = w.root(i);
    root_count[i] = w.root_count(i);
  }
  return {{"slots", inv.slots()}, {"root", root}, {"edge", edge},
          {"root_count", root_count}, {"edge_count", counts},
          {"flags", w.flags}};
}

inline std::pair<WeightMatrix, SlotInventory> weights_from_json(
    const nlohmann::json& j) {
  SlotInventory inv(j.at("slots").get<std::vector<SlotId>>());
  const std::size_t n = inv.size();
  WeightMatrix w(n);
  const auto& edge = j.at("edge");
  const auto& root = j.at("root");
  if (edge.size() != n || root.size() != n) throw ParseError("weight matrix shape mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    w.root(i) = root.at(i).get<double>();
    if (j.contains("root_count")) w.root_count(i) = j["root_count"].at(i).get<std::size_t>();
    for (std::size_t k = 0; k < n; ++k) {
      if (i != k) w.edge(i, k) = edge.at(i).at(k).get<double>();
      if (j.contains("edge_count")) w.edge_count(i, k) = j["edge_count"].at(i).at(k).get<std::size_t>();
    }
  }
  if (j.contains("flags")) j.at("flags").get_to(w.flags);
  return {std::move(w), std::move(inv)};
}

inline nlohmann::json tree_to_json(const Arborescence& t, const SlotInventory& inv,
                                   const WeightMatrix* w = nullptr) {
  nlohmann::json parent = nlohmann::json::object();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i != t.root) parent[inv[i]] = inv[t.parent[i]];
  }
  nlohmann::json j = {{"slots", inv.slots()}, {"root", inv[t.root]}, {"parent", parent}};
  if (w) j["score"] = tree_score(t, *w);
  return j;
}

inline std::pair<Arborescence, SlotInventory> tree_from_json(const nlohmann::json& j) {
  SlotInventory inv(j.at("slots").get<std::vector<SlotId>>());
  Arborescence t{inv.index_of(j.at("root").get<std::string>()),
                 std::vector<std::size_t>(inv.size(), Arborescence::kNone)};
  for (const auto& [child, pa] : j.at("parent").items()) {
    t.parent[inv.index_of(child)] = inv.index_of(pa.get<std::string>());
  }
  if (!t.valid()) throw ParseError("tree file does not describe a spanning arborescence");
  return {std::move(t), std::move(inv)};
}

/// Graphviz rendering; edges point from conditioning slot to predicted slot.
inline std::string tree_to_dot(const Arborescence& t, const SlotInventory& inv,
                               const WeightMatrix* w = nullptr) {
  std::ostringstream os;
  os.precision(4);
  os << "digraph paradigm {\n  \"(empty)\" [shape=point];\n";
  os << "  \"(empty)\" -> \"" << inv[t.root] << "\"";
  if (w) os << " [label=\"" << w->root(t.root) << "\"]";
  os << ";\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i == t.root) continue;
    os << "  \"" << inv[t.parent[i]] << "\" -> \"" << inv[i] << "\"";
    if (w) os << " [label=\"" << w->edge(i, t.parent[i]) << "\"]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace morphcx
