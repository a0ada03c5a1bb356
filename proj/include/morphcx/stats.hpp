#pragma once

// Pareto step curve over (e-complexity, i-complexity) points, the area
// under it, and a Monte Carlo permutation test of how empty the upper-right
// corner is.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "morphcx/error.hpp"
#include "morphcx/parallel.hpp"
#include "morphcx/rng.hpp"

namespace morphcx {

struct Point {
  double x = 0;
  double y = 0;

  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point&, const Point&) = default;
};

/// f(x) = max { y_i : x_i >= x } on (0, max x_i], stored as the right end of
/// each constant run: f = steps[k].y on (steps[k-1].x, steps[k].x].
struct ParetoCurve {
  std::vector<Point> steps;

  std::optional<double> operator()(double x) const {
    if (steps.empty() || x > steps.back().x) return std::nullopt;
    const auto it = std::lower_bound(
        steps.begin(), steps.end(), x,
        [](const Point& p, double v) { return p.x < v; });
    return it->y;
  }

  friend bool operator==(const ParetoCurve&, const ParetoCurve&) = default;
};

inline ParetoCurve pareto_curve(std::span<const Point> points) {
  if (points.empty()) throw DataError("Pareto curve of an empty point set");
  std::vector<Point> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end());
  // f at each distinct x, right to left.
  std::vector<Point> at_x;
  double running = sorted.back().y;
  for (std::size_t k = sorted.size(); k-- > 0;) {
    running = std::max(running, sorted[k].y);
    if (k > 0 && sorted[k - 1].x == sorted[k].x) continue;
    at_x.push_back({sorted[k].x, running});
  }
  std::reverse(at_x.begin(), at_x.end());
  ParetoCurve curve;
  for (std::size_t k = 0; k < at_x.size(); ++k) {
    // A run of equal values is represented by its right end only.
    if (k + 1 < at_x.size() && at_x[k + 1].y == at_x[k].y) continue;
    curve.steps.push_back(at_x[k]);
  }
  return curve;
}

/// Integral of f over (0, max x].
inline double pareto_area(const ParetoCurve& curve) {
  double area = 0;
  double left = 0;
  for (const auto& s : curve.steps) {
    area += (s.x - left) * s.y;
    left = s.x;
  }
  return area;
}

namespace detail {

/// Area for xs sorted ascending with ys aligned to them.
inline double step_area(std::span<const double> xs, std::span<const double> ys) {
  double area = 0;
  double running = ys.back();
  for (std::size_t k = xs.size(); k-- > 0;) {
    running = std::max(running, ys[k]);
    const double left = k > 0 ? xs[k - 1] : 0.0;
    area += (xs[k] - left) * running;
  }
  return area;
}

}  // namespace detail

struct PermTestResult {
  double observed_area = 0;
  std::size_t n_perm = 0;
  std::size_t count_leq = 0;
  /// (count_leq + 1) / (n_perm + 1)
  double p_value = 1;
  std::uint64_t seed = 0;
};

/// Shuffles the y values over the fixed x values n_perm times and counts
/// shuffles whose Pareto area is <= the observed one. Replica r draws from
/// stream (seed, r + 1), so the result does not depend on `threads`.
inline PermTestResult perm_test(std::span<const Point> points, std::size_t n_perm,
                                std::uint64_t seed, std::size_t threads = 1) {
  if (points.size() < 3) throw DataError("permutation test needs at least 3 points");
  if (n_perm < 1) throw DataError("permutation test needs n_perm >= 1");
  std::vector<Point> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> xs(sorted.size());
  std::vector<double> ys(sorted.size());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    xs[k] = sorted[k].x;
    ys[k] = sorted[k].y;
  }
  PermTestResult result;
  result.observed_area = detail::step_area(xs, ys);
  result.n_perm = n_perm;
  result.seed = seed;

  std::vector<char> leq(n_perm, 0);
  parallel_for(n_perm, threads, [&](std::size_t r) {
    Rng rng = make_rng(seed, r + 1);
    std::vector<double> perm = ys;
    shuffle(std::span<double>(perm), rng);
    leq[r] = detail::step_area(xs, perm) <= result.observed_area;
  });
  result.count_leq = static_cast<std::size_t>(std::count(leq.begin(), leq.end(), 1));
  result.p_value = static_cast<double>(result.count_leq + 1) /
                   static_cast<double>(n_perm + 1);
  return result;
}

}  // namespace morphcx
