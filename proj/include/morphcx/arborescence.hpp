#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace morphcx {

/// A spanning tree over slot indices with edges directed away from `root`.
struct Arborescence {
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::size_t root = 0;
  /// parent[i] is the slot that i is predicted from; parent[root] == kNone.
  std::vector<std::size_t> parent;

  std::size_t size() const noexcept { return parent.size(); }

  /// Exactly one root, every vertex reaches the root by following parents.
  bool valid() const {
    const std::size_t n = parent.size();
    if (n == 0 || root >= n || parent[root] != kNone) return false;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != root && (parent[i] >= n || parent[i] == i)) return false;
    }
    // 0 = unvisited, 1 = on current path, 2 = known to reach root
    std::vector<char> state(n, 0);
    state[root] = 2;
    for (std::size_t start = 0; start < n; ++start) {
      std::vector<std::size_t> path;
      std::size_t v = start;
      while (state[v] == 0) {
        state[v] = 1;
        path.push_back(v);
        v = parent[v];
      }
      if (state[v] == 1) return false;
      for (auto u : path) state[u] = 2;
    }
    return true;
  }

  static Arborescence star(std::size_t n, std::size_t center) {
    Arborescence t{center, std::vector<std::size_t>(n, center)};
    t.parent[center] = kNone;
    return t;
  }

  /// 0 -> 1 -> ... -> n-1
  static Arborescence chain(std::size_t n) {
    Arborescence t{0, std::vector<std::size_t>(n, kNone)};
    for (std::size_t i = 1; i < n; ++i) t.parent[i] = i - 1;
    return t;
  }

  friend bool operator==(const Arborescence&, const Arborescence&) = default;
};

}  // namespace morphcx
