#pragma once

// Shape catalog: the glyph pool, its filled/unfilled/open taxonomy, the
// normalized geometry for each glyph and the designer palettes.
//
// Geometry lives in a unit box with SVG orientation (y grows downward).
// Stroked outlines are inset by half the stroke width so the painted glyph
// never leaves the box.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "shapepal/error.hpp"

namespace shapepal {

inline constexpr int kMinCategories = 2;
inline constexpr int kMaxCategories = 10;
inline constexpr std::size_t kStudyCatalogSize = 39;

enum class ShapeType { Filled, Unfilled, Open };

inline std::string_view to_string(ShapeType t) {
  switch (t) {
    case ShapeType::Filled: return "filled";
    case ShapeType::Unfilled: return "unfilled";
    case ShapeType::Open: return "open";
  }
  return "?";
}

inline ShapeType parse_shape_type(std::string_view s) {
  if (s == "filled") return ShapeType::Filled;
  if (s == "unfilled") return ShapeType::Unfilled;
  if (s == "open") return ShapeType::Open;
  throw ParseError("unknown shape type '" + std::string(s) + "'");
}

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct GeometryElement {
  enum class Kind { Polygon, Polyline, Circle };
  Kind kind = Kind::Polygon;
  std::vector<Point> points;  // Polygon / Polyline
  Point center;               // Circle
  double radius = 0.0;        // Circle
  friend bool operator==(const GeometryElement&, const GeometryElement&) = default;
};

struct Geometry {
  bool fill = true;
  double stroke_width = 0.0;  // unit-box units
  std::vector<GeometryElement> elements;
  friend bool operator==(const Geometry&, const Geometry&) = default;
};

struct ShapeDef {
  std::string id;
  std::string name;
  ShapeType type = ShapeType::Filled;
  double scale = 1.0;  // fraction of the glyph window the unit box occupies
  bool experiment_subset = false;
  std::vector<std::string> sources;
  std::string note;
  Geometry geometry;
};

struct NamedPalette {
  std::string name;
  std::vector<std::string> shapes;
};

/// Axis-aligned extent of a geometry in unit-box coordinates, including
/// half the stroke width.
struct Extent {
  double min_x, min_y, max_x, max_y;
};

inline Extent painted_extent(const Geometry& g) {
  Extent e{1e300, 1e300, -1e300, -1e300};
  auto grow = [&](double x0, double y0, double x1, double y1) {
    e.min_x = std::min(e.min_x, x0);
    e.min_y = std::min(e.min_y, y0);
    e.max_x = std::max(e.max_x, x1);
    e.max_y = std::max(e.max_y, y1);
  };
  for (const auto& el : g.elements) {
    if (el.kind == GeometryElement::Kind::Circle) {
      grow(el.center.x - el.radius, el.center.y - el.radius, el.center.x + el.radius,
           el.center.y + el.radius);
    } else {
      for (const auto& p : el.points) grow(p.x, p.y, p.x, p.y);
    }
  }
  const double half = g.fill ? 0.0 : g.stroke_width / 2.0;
  return {e.min_x - half, e.min_y - half, e.max_x + half, e.max_y + half};
}

/// Which study-layout checks load_catalog enforces. Test fixtures with a
/// handful of shapes use `relaxed()`.
struct CatalogRules {
  bool require_study_layout = true;

  static CatalogRules strict() { return {}; }
  static CatalogRules relaxed() { return {false}; }
};

class Catalog {
 public:
  Catalog() = default;

  /// Validates every invariant and builds the id index.
  static Catalog build(std::vector<ShapeDef> shapes, std::vector<NamedPalette> palettes,
                       CatalogRules rules = CatalogRules::strict()) {
    Catalog c;
    c.shapes_ = std::move(shapes);
    c.palettes_ = std::move(palettes);
    for (std::size_t i = 0; i < c.shapes_.size(); ++i) {
      const auto& s = c.shapes_[i];
      if (s.id.empty()) throw ValidationError("shape at position " + std::to_string(i) + " has an empty id");
      if (!c.index_.emplace(s.id, i).second) throw ValidationError("duplicate shape id '" + s.id + "'");
      validate_shape(s);
    }
    for (const auto& p : c.palettes_) {
      std::set<std::string> seen;
      for (const auto& id : p.shapes) {
        const ShapeDef* s = c.find(id);
        if (s == nullptr) throw ValidationError("palette " + p.name + " references unknown shape '" + id + "'");
        if (!seen.insert(id).second) throw ValidationError("palette " + p.name + " repeats shape '" + id + "'");
        if (std::find(s->sources.begin(), s->sources.end(), p.name) == s->sources.end()) {
          throw ValidationError("shape '" + id + "' is in palette " + p.name + " but does not list it as a source");
        }
      }
    }
    if (rules.require_study_layout) c.check_study_layout();
    return c;
  }

  std::span<const ShapeDef> shapes() const { return shapes_; }
  std::span<const NamedPalette> designer_palettes() const { return palettes_; }
  std::size_t size() const { return shapes_.size(); }

  const ShapeDef* find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &shapes_[it->second];
  }

  const ShapeDef& at(std::string_view id) const {
    const ShapeDef* s = find(id);
    if (s == nullptr) throw DomainError("unknown shape id '" + std::string(id) + "'");
    return *s;
  }

  bool contains(std::string_view id) const { return find(id) != nullptr; }

  std::optional<std::size_t> index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(shapes_.size());
    for (const auto& s : shapes_) out.push_back(s.id);
    return out;
  }

  const NamedPalette& designer_palette(std::string_view name) const {
    for (const auto& p : palettes_) {
      if (p.name == name) return p;
    }
    throw DomainError("unknown designer palette '" + std::string(name) + "'");
  }

  /// Shapes flagged for the type-taxonomy experiment (no rotational duplicates).
  std::vector<ShapeDef> experiment_subset() const {
    std::vector<ShapeDef> out;
    for (const auto& s : shapes_) {
      if (s.experiment_subset) out.push_back(s);
    }
    return out;
  }

 private:
  static void validate_shape(const ShapeDef& s) {
    if (!(s.scale > 0.0 && s.scale <= 1.0)) {
      throw ValidationError("shape '" + s.id + "' has scale outside (0, 1]");
    }
    const Geometry& g = s.geometry;
    if (g.elements.empty()) throw ValidationError("shape '" + s.id + "' has no geometry");
    if (g.stroke_width < 0.0 || (!g.fill && g.stroke_width <= 0.0)) {
      throw ValidationError("shape '" + s.id + "' has an invalid stroke width");
    }
    for (const auto& el : g.elements) {
      using K = GeometryElement::Kind;
      if (el.kind == K::Polygon && el.points.size() < 3) {
        throw ValidationError("shape '" + s.id + "' has a polygon with fewer than 3 points");
      }
      if (el.kind == K::Polyline && el.points.size() < 2) {
        throw ValidationError("shape '" + s.id + "' has a polyline with fewer than 2 points");
      }
      if (el.kind == K::Circle && !(el.radius > 0.0)) {
        throw ValidationError("shape '" + s.id + "' has a non-positive circle radius");
      }
    }
    const Extent e = painted_extent(g);
    constexpr double eps = 1e-9;
    if (e.min_x < -eps || e.min_y < -eps || e.max_x > 1.0 + eps || e.max_y > 1.0 + eps) {
      throw ValidationError("shape '" + s.id + "' geometry leaves the unit box");
    }
  }

  void check_study_layout() const {
    if (shapes_.size() != kStudyCatalogSize) {
      throw ValidationError("catalog has " + std::to_string(shapes_.size()) + " shapes, expected 39");
    }
    std::map<ShapeType, int> subset;
    for (const auto& s : shapes_) {
      if (s.experiment_subset) ++subset[s.type];
    }
    if (subset[ShapeType::Filled] != 10 || subset[ShapeType::Unfilled] != 10 ||
        subset[ShapeType::Open] != 7) {
      throw ValidationError("experiment subset must hold 10 filled, 10 unfilled and 7 open shapes");
    }
    const std::map<std::string, std::size_t> expected = {
        {"Tableau", 10}, {"Matlab", 10}, {"R", 10}, {"Excel", 9}, {"D3", 7}};
    for (const auto& [name, size] : expected) {
      const auto& p = designer_palette(name);
      if (p.shapes.size() != size) {
        throw ValidationError("designer palette " + name + " has " + std::to_string(p.shapes.size()) +
                              " shapes, expected " + std::to_string(size));
      }
    }
  }

  std::vector<ShapeDef> shapes_;
  std::vector<NamedPalette> palettes_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Ordered distinct shape ids bound to a category count.
struct Palette {
  std::vector<std::string> shape_ids;
  int n = 0;

  friend bool operator==(const Palette&, const Palette&) = default;
};

inline void check_category_count(int n) {
  if (n < kMinCategories || n > kMaxCategories) {
    throw DomainError("category count " + std::to_string(n) + " outside [2, 10]");
  }
}

/// Throws unless ids are distinct; also checks catalog membership when given.
inline void check_distinct_ids(std::span<const std::string> ids, const Catalog* catalog = nullptr) {
  std::set<std::string_view> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) throw DomainError("duplicate shape id '" + id + "'");
    if (catalog != nullptr && !catalog->contains(id)) {
      throw DomainError("unknown shape id '" + id + "'");
    }
  }
}

inline std::vector<ShapeDef> shapes_by_type(std::span<const ShapeDef> shapes, ShapeType t) {
  std::vector<ShapeDef> out;
  for (const auto& s : shapes) {
    if (s.type == t) out.push_back(s);
  }
  return out;
}

inline std::vector<ShapeDef> shapes_by_type(const Catalog& catalog, ShapeType t) {
  return shapes_by_type(catalog.shapes(), t);
}

// ---------------------------------------------------------------------------
// Catalog file (JSON)

namespace detail {

inline Point point_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("point must be a [x, y] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline nlohmann::ordered_json geometry_to_json(const Geometry& g) {
  nlohmann::ordered_json out;
  out["fill"] = g.fill;
  out["stroke_width"] = g.stroke_width;
  auto elements = nlohmann::ordered_json::array();
  for (const auto& el : g.elements) {
    nlohmann::ordered_json e;
    switch (el.kind) {
      case GeometryElement::Kind::Circle:
        e["kind"] = "circle";
        e["center"] = {el.center.x, el.center.y};
        e["radius"] = el.radius;
        break;
      case GeometryElement::Kind::Polygon:
      case GeometryElement::Kind::Polyline: {
        e["kind"] = el.kind == GeometryElement::Kind::Polygon ? "polygon" : "polyline";
        auto pts = nlohmann::ordered_json::array();
        for (const auto& p : el.points) pts.push_back({p.x, p.y});
        e["points"] = pts;
        break;
      }
    }
    elements.push_back(e);
  }
  out["elements"] = elements;
  return out;
}

inline Geometry geometry_from_json(const nlohmann::json& j) {
  Geometry g;
  g.fill = j.at("fill").get<bool>();
  g.stroke_width = j.at("stroke_width").get<double>();
  for (const auto& e : j.at("elements")) {
    GeometryElement el;
    const auto kind = e.at("kind").get<std::string>();
    if (kind == "circle") {
      el.kind = GeometryElement::Kind::Circle;
      el.center = point_from_json(e.at("center"));
      el.radius = e.at("radius").get<double>();
    } else if (kind == "polygon" || kind == "polyline") {
      el.kind = kind == "polygon" ? GeometryElement::Kind::Polygon : GeometryElement::Kind::Polyline;
      for (const auto& p : e.at("points")) el.points.push_back(point_from_json(p));
    } else {
      throw ParseError("unknown geometry element kind '" + kind + "'");
    }
    g.elements.push_back(std::move(el));
  }
  return g;
}

}  // namespace detail

inline Catalog parse_catalog(std::string_view text, CatalogRules rules = CatalogRules::strict()) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("catalog is not valid JSON: ") + e.what());
  }
  std::vector<ShapeDef> shapes;
  std::vector<NamedPalette> palettes;
  try {
    if (doc.value("format", "") != "shapepal-catalog") throw ParseError("not a shapepal catalog file");
    if (doc.value("version", 0) != 1) throw ParseError("unsupported catalog version");
    for (const auto& s : doc.at("shapes")) {
      ShapeDef def;
      def.id = s.at("id").get<std::string>();
      def.name = s.value("name", def.id);
      def.type = parse_shape_type(s.at("type").get<std::string>());
      def.scale = s.value("scale", 1.0);
      def.experiment_subset = s.value("experiment_subset", false);
      def.sources = s.value("sources", std::vector<std::string>{});
      def.note = s.value("note", "");
      def.geometry = detail::geometry_from_json(s.at("geometry"));
      shapes.push_back(std::move(def));
    }
    for (const auto& p : doc.at("palettes")) {
      palettes.push_back({p.at("name").get<std::string>(), p.at("shapes").get<std::vector<std::string>>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed catalog: ") + e.what());
  }
  return Catalog::build(std::move(shapes), std::move(palettes), rules);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
}

inline Catalog load_catalog(const std::string& path, CatalogRules rules = CatalogRules::strict()) {
  return parse_catalog(read_text_file(path), rules);
}

inline nlohmann::ordered_json catalog_to_json(const Catalog& catalog) {
  nlohmann::ordered_json doc;
  doc["format"] = "shapepal-catalog";
  doc["version"] = 1;
  auto shapes = nlohmann::ordered_json::array();
  for (const auto& s : catalog.shapes()) {
    nlohmann::ordered_json j;
    j["id"] = s.id;
    j["name"] = s.name;
    j["type"] = to_string(s.type);
    j["scale"] = s.scale;
    j["experiment_subset"] = s.experiment_subset;
    j["sources"] = s.sources;
    if (!s.note.empty()) j["note"] = s.note;
    j["geometry"] = detail::geometry_to_json(s.geometry);
    shapes.push_back(j);
  }
  doc["shapes"] = shapes;
  auto palettes = nlohmann::ordered_json::array();
  for (const auto& p : catalog.designer_palettes()) {
    nlohmann::ordered_json j;
    j["name"] = p.name;
    j["shapes"] = p.shapes;
    palettes.push_back(j);
  }
  doc["palettes"] = palettes;
  return doc;
}

inline std::string serialize_catalog(const Catalog& catalog) {
  return catalog_to_json(catalog).dump(2) + "\n";
}

}  // namespace shapepal
