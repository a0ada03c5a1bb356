#pragma once

// Points CSV input and SVG scatter plots with the Pareto step curve.

#include <algorithm>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "morphcx/corpus.hpp"
#include "morphcx/error.hpp"
#include "morphcx/stats.hpp"

namespace morphcx {

struct LabeledPoint {
  std::string language;
  std::string pos;
  double x = 0;
  double y = 0;
};

/// Accepts either the Table 2 layout (language,pos,paradigm_size,
/// i_complexity,scheme) or measured points (language,pos,...,e_complexity,
/// ...,i_per_form_bits,...). Lines starting with '#' are ignored.
inline std::vector<LabeledPoint> read_points_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> col;
  std::vector<LabeledPoint> out;
  std::size_t x_col = 0;
  std::size_t y_col = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (detail::trim(view).empty() || view.front() == '#') continue;
    const auto f = detail::split(view, ',');
    if (col.empty()) {
      for (std::size_t k = 0; k < f.size(); ++k) col[std::string(detail::trim(f[k]))] = k;
      if (!col.count("language") || !col.count("pos")) {
        throw ParseError("points CSV needs language and pos columns", lineno);
      }
      if (col.count("paradigm_size") && col.count("i_complexity")) {
        x_col = col["paradigm_size"];
        y_col = col["i_complexity"];
      } else if (col.count("e_complexity") && col.count("i_per_form_bits")) {
        x_col = col["e_complexity"];
        y_col = col["i_per_form_bits"];
      } else {
        throw ParseError("unrecognized points CSV header", lineno);
      }
      continue;
    }
    if (f.size() != col.size()) throw ParseError("wrong number of CSV fields", lineno);
    LabeledPoint p;
    p.language = std::string(detail::trim(f[col["language"]]));
    p.pos = std::string(detail::trim(f[col["pos"]]));
    try {
      p.x = std::stod(std::string(f[x_col]));
      p.y = std::stod(std::string(f[y_col]));
    } catch (const std::exception&) {
      throw ParseError("non-numeric coordinate", lineno);
    }
    if (!(p.x > 0) || !(p.y >= 0)) throw ParseError("coordinates must satisfy x > 0, y >= 0", lineno);
    out.push_back(std::move(p));
  }
  return out;
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace detail

/// Scatter of the points, the Pareto step curve as a single <path>, and the
/// area under it as a shaded <polygon>.
inline std::string pareto_svg(const std::vector<LabeledPoint>& points,
                              const ParetoCurve& curve, std::string_view title,
                              std::string_view comment = {}) {
  constexpr double W = 640, H = 420, L = 60, R = 20, T = 40, B = 50;
  double max_x = 0, max_y = 0;
  for (const auto& p : points) {
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  max_x = max_x > 0 ? max_x * 1.05 : 1;
  max_y = max_y > 0 ? max_y * 1.10 : 1;
  const auto sx = [&](double x) { return L + x / max_x * (W - L - R); };
  const auto sy = [&](double y) { return H - B - y / max_y * (H - T - B); };

  std::string curve_d = fmt::format("M {:.2f} {:.2f}", sx(0), sy(curve.steps.front().y));
  std::string area = fmt::format("{:.2f},{:.2f}", sx(0), sy(0));
  double prev_y = curve.steps.front().y;
  for (const auto& s : curve.steps) {
    if (s.y != prev_y) curve_d += fmt::format(" V {:.2f}", sy(s.y));
    curve_d += fmt::format(" H {:.2f}", sx(s.x));
    prev_y = s.y;
  }
  double left = 0;
  for (const auto& s : curve.steps) {
    area += fmt::format(" {:.2f},{:.2f} {:.2f},{:.2f}", sx(left), sy(s.y), sx(s.x), sy(s.y));
    left = s.x;
  }
  area += fmt::format(" {:.2f},{:.2f}", sx(left), sy(0));

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!comment.empty()) svg += fmt::format("<!-- {} -->\n", detail::xml_escape(comment));
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\">\n",
      W, H, W, H);
  svg += fmt::format("  <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
                     W / 2, detail::xml_escape(title));
  svg += fmt::format("  <polygon points=\"{}\" fill=\"#8e44ad\" fill-opacity=\"0.2\" stroke=\"none\"/>\n", area);
  svg += fmt::format("  <path d=\"{}\" fill=\"none\" stroke=\"#8e44ad\" stroke-width=\"2\"/>\n", curve_d);
  svg += fmt::format(
      "  <line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"black\"/>\n",
      sx(0), sy(0), sx(max_x));
  svg += fmt::format(
      "  <line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n",
      sx(0), sy(0), sy(max_y));
  for (int k = 0; k <= 5; ++k) {
    const double xv = max_x * k / 5, yv = max_y * k / 5;
    svg += fmt::format(
        "  <text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" font-size=\"11\">{:.0f}</text>\n",
        sx(xv), sy(0) + 16, xv);
    svg += fmt::format(
        "  <text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\" font-size=\"11\">{:.2f}</text>\n",
        sx(0) - 6, sy(yv) + 4, yv);
  }
  svg += fmt::format(
      "  <text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" font-size=\"13\">e-complexity</text>\n",
      (L + W - R) / 2, H - 12);
  svg += fmt::format(
      "  <text x=\"16\" y=\"{:.2f}\" text-anchor=\"middle\" font-size=\"13\" "
      "transform=\"rotate(-90 16 {:.2f})\">i-complexity</text>\n",
      (T + H - B) / 2, (T + H - B) / 2);
  for (const auto& p : points) {
    svg += fmt::format(
        "  <circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"#27ae60\"><title>{}</title></circle>\n",
        sx(p.x), sy(p.y), detail::xml_escape(p.language));
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace morphcx
