#pragma once

// Static SVG rendering of stimuli: 400x400 plot area on white, two black
// axes with 13 unlabeled ticks each, black glyphs in a 6x6 px window.
// Glyph geometry is emitted once per shape in <defs> (centered on the
// origin) and instanced with <use>, so every glyph's painted box can be read
// straight from its definition.

#include <algorithm>
#include <cstdio>
#include <map>
#include <span>
#include <string>

#include "shapepal/catalog.hpp"
#include "shapepal/error.hpp"
#include "shapepal/stimulus.hpp"

namespace shapepal {

inline constexpr int kTicksPerAxis = 13;
inline constexpr double kTickLengthPx = 5.0;

namespace detail {

inline std::string fmt_num(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

inline std::string glyph_id(std::string_view shape_id) { return "glyph-" + std::string(shape_id); }

/// Glyph definition in px, centered on (0, 0).
inline std::string glyph_def(const ShapeDef& shape, double window_px) {
  const double size = window_px * shape.scale;
  const Geometry& g = shape.geometry;
  auto X = [&](double u) { return fmt_num((u - 0.5) * size); };
  std::string out = "<g id=\"" + glyph_id(shape.id) + "\" data-shape-type=\"" + std::string(to_string(shape.type)) + "\"";
  if (g.fill) {
    out += " fill=\"black\" stroke=\"none\">";
  } else {
    out += " fill=\"none\" stroke=\"black\" stroke-width=\"" + fmt_num(g.stroke_width * size) +
           "\" stroke-linecap=\"butt\" stroke-linejoin=\"miter\" stroke-miterlimit=\"1\">";
  }
  for (const auto& el : g.elements) {
    if (el.kind == GeometryElement::Kind::Circle) {
      out += "<circle cx=\"" + X(el.center.x) + "\" cy=\"" + X(el.center.y) + "\" r=\"" +
             fmt_num(el.radius * size) + "\"/>";
      continue;
    }
    out += "<path d=\"";
    for (std::size_t i = 0; i < el.points.size(); ++i) {
      out += (i == 0 ? "M" : " L") + X(el.points[i].x) + " " + X(el.points[i].y);
    }
    if (el.kind == GeometryElement::Kind::Polygon) out += " Z";
    out += "\"/>";
  }
  out += "</g>";
  return out;
}

}  // namespace detail

/// Renders a stimulus. `assignment[c]` is the shape drawn for category c.
inline std::string render_svg(const Stimulus& stimulus, std::span<const std::string> assignment, const Catalog& catalog) {
  if (assignment.size() != stimulus.categories.size()) {
    throw ContractError("assignment covers " + std::to_string(assignment.size()) + " of " +
                        std::to_string(stimulus.categories.size()) + " categories");
  }
  const double plot = stimulus.params.plot_size_px;
  const double window = stimulus.params.glyph_extent_px;
  std::map<std::string, const ShapeDef*> used;
  for (const auto& id : assignment) used.emplace(id, &catalog.at(id));

  const std::string size = detail::fmt_num(plot);
  std::string svg;
  svg.reserve(16384);
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" width=\"" + size +
         "\" height=\"" + size + "\" viewBox=\"0 0 " + size + " " + size + "\">\n";
  svg += "<defs>";
  for (const auto& [id, shape] : used) svg += detail::glyph_def(*shape, window);
  svg += "</defs>\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + size + "\" height=\"" + size + "\" fill=\"white\"/>\n";

  // Axes along the left and bottom edges; ticks point into the plot.
  svg += "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">";
  svg += "<line class=\"axis axis-x\" x1=\"0\" y1=\"" + detail::fmt_num(plot - 0.5) + "\" x2=\"" + size + "\" y2=\"" +
         detail::fmt_num(plot - 0.5) + "\"/>";
  svg += "<line class=\"axis axis-y\" x1=\"0.5\" y1=\"0\" x2=\"0.5\" y2=\"" + size + "\"/>";
  for (int i = 0; i < kTicksPerAxis; ++i) {
    const double t = plot * i / (kTicksPerAxis - 1);
    const std::string pos = detail::fmt_num(std::clamp(t, 0.5, plot - 0.5));
    svg += "<line class=\"tick tick-x\" x1=\"" + pos + "\" y1=\"" + detail::fmt_num(plot) + "\" x2=\"" + pos +
           "\" y2=\"" + detail::fmt_num(plot - kTickLengthPx) + "\"/>";
    const std::string ypos = detail::fmt_num(std::clamp(plot - t, 0.5, plot - 0.5));
    svg += "<line class=\"tick tick-y\" x1=\"0\" y1=\"" + ypos + "\" x2=\"" + detail::fmt_num(kTickLengthPx) +
           "\" y2=\"" + ypos + "\"/>";
  }
  svg += "</g>\n";

  for (std::size_t c = 0; c < stimulus.categories.size(); ++c) {
    svg += "<g class=\"category\" data-category=\"" + std::to_string(c) + "\" data-shape=\"" + assignment[c] + "\">";
    const std::string ref = "#" + detail::glyph_id(assignment[c]);
    for (const auto& p : stimulus.categories[c]) {
      svg += "<use href=\"" + ref + "\" xlink:href=\"" + ref + "\" x=\"" + detail::fmt_num(p.x * plot, 3) + "\" y=\"" +
             detail::fmt_num(plot - p.y * plot, 3) + "\"/>";
    }
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

inline std::string render_svg(const Stimulus& stimulus, const Catalog& catalog) {
  return render_svg(stimulus, stimulus.assignment, catalog);
}

}  // namespace shapepal
