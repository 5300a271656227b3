#pragma once

// Transport-independent request handlers for the HTTP service and the CLI.
// Every handler takes a parsed JSON body and returns a JSON response with
// the request echoed back and the engine version. The engine state is
// immutable after construction, so handlers may run concurrently.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "shapepal/catalog.hpp"
#include "shapepal/error.hpp"
#include "shapepal/pairwise.hpp"
#include "shapepal/palette_engine.hpp"
#include "shapepal/stimulus.hpp"
#include "shapepal/svg.hpp"
#include "shapepal/version.hpp"

namespace shapepal {

struct ServiceConfig {
  std::string catalog_path;
  std::string matrices_path;
  bool relaxed_catalog = false;  // accept catalogs without the study layout
  long default_budget_ms = kDefaultBudgetMs;
  std::string host = "127.0.0.1";
  int port = 8080;
  int threads = 8;
};

/// Reads {catalog, matrices, relaxed_catalog, default_budget_ms, host,
/// port, threads}; relative paths resolve against the config file's
/// directory.
inline ServiceConfig parse_service_config(std::string_view text, const std::string& base_dir = "") {
  ServiceConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    auto resolve = [&](const std::string& p) {
      if (p.empty() || p.front() == '/' || base_dir.empty()) return p;
      return base_dir + "/" + p;
    };
    c.catalog_path = resolve(j.at("catalog").get<std::string>());
    c.matrices_path = resolve(j.at("matrices").get<std::string>());
    c.relaxed_catalog = j.value("relaxed_catalog", false);
    c.default_budget_ms = j.value("default_budget_ms", kDefaultBudgetMs);
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed service config: ") + e.what());
  }
  if (c.default_budget_ms <= 0) throw ValidationError("default_budget_ms must be positive");
  return c;
}

inline ServiceConfig load_service_config(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return parse_service_config(read_text_file(path), slash == std::string::npos ? "" : path.substr(0, slash));
}

struct Engine {
  Catalog catalog;
  ModelMatrices matrices;
  long default_budget_ms = kDefaultBudgetMs;

  static Engine load(const ServiceConfig& c) {
    Engine e;
    e.catalog = load_catalog(c.catalog_path, c.relaxed_catalog ? CatalogRules::relaxed() : CatalogRules::strict());
    e.matrices = import_matrices(read_text_file(c.matrices_path));
    for (const auto& id : e.catalog.ids()) {
      if (!e.matrices.knows(id)) throw ValidationError("matrices do not cover catalog shape '" + id + "'");
    }
    e.default_budget_ms = c.default_budget_ms;
    return e;
  }
};

/// Bad request body; `field` names the offending member.
class FieldError : public Error {
 public:
  FieldError(std::string field, const std::string& message)
      : Error(ErrorKind::Validation, field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ServiceResponse {
  int status = 200;
  nlohmann::ordered_json body;
};

namespace detail {

template <typename T>
T required(const nlohmann::json& body, const char* field) {
  if (!body.is_object() || !body.contains(field)) throw FieldError(field, "required");
  try {
    return body.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FieldError(field, "has the wrong type");
  }
}

template <typename T>
T optional_field(const nlohmann::json& body, const char* field, T fallback) {
  if (!body.is_object() || !body.contains(field) || body.at(field).is_null()) return fallback;
  try {
    return body.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FieldError(field, "has the wrong type");
  }
}

inline int category_count(const nlohmann::json& body) {
  const int n = required<int>(body, "n");
  if (n < kMinCategories || n > kMaxCategories) throw FieldError("n", "must be within [2, 10]");
  return n;
}

inline std::vector<std::string> shape_list(const Engine& e, const nlohmann::json& body, const char* field,
                                           bool required_field = true) {
  auto ids = required_field ? required<std::vector<std::string>>(body, field)
                            : optional_field<std::vector<std::string>>(body, field, {});
  for (const auto& id : ids) {
    if (!e.catalog.contains(id)) throw FieldError(field, "unknown shape id '" + id + "'");
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      if (ids[i] == ids[j]) throw FieldError(field, "duplicate shape id '" + ids[i] + "'");
    }
  }
  return ids;
}

/// budget_iterations selects the deterministic mode; otherwise budget_ms.
inline Budget budget_of(const Engine& e, const nlohmann::json& body) {
  const long iterations = optional_field<long>(body, "budget_iterations", 0);
  if (iterations < 0) throw FieldError("budget_iterations", "must be positive");
  if (iterations > 0) return Budget::iterations(iterations);
  const long ms = optional_field<long>(body, "budget_ms", e.default_budget_ms);
  if (ms <= 0) throw FieldError("budget_ms", "must be positive");
  return Budget::millis(ms);
}

inline nlohmann::ordered_json previews(const Engine& e, const Palette& palette, std::uint64_t seed) {
  nlohmann::ordered_json out;
  const Palette p{palette.shape_ids, static_cast<int>(palette.shape_ids.size())};
  const auto mean = gen_mean_stimulus(p, StimulusParams::mean_task(p.n), derive_seed(seed, 1));
  const auto corr = gen_correlation_stimulus(p, StimulusParams::correlation_task(p.n), derive_seed(seed, 2));
  out["mean"] = render_svg(mean, e.catalog);
  out["correlation"] = render_svg(corr, e.catalog);
  return out;
}

inline nlohmann::ordered_json envelope(const nlohmann::json& request) {
  nlohmann::ordered_json out;
  out["engine"] = {{"name", kEngineName}, {"version", kVersion}};
  out["request"] = request;
  return out;
}

}  // namespace detail

inline nlohmann::ordered_json handle_catalog(const Engine& e) {
  auto out = detail::envelope(nlohmann::json::object());
  auto cat = catalog_to_json(e.catalog);
  out["shapes"] = cat["shapes"];
  out["palettes"] = cat["palettes"];
  return out;
}

inline nlohmann::ordered_json handle_score(const Engine& e, const nlohmann::json& body) {
  const int n = detail::category_count(body);
  const auto shapes = detail::shape_list(e, body, "shapes");
  if (shapes.size() != static_cast<std::size_t>(n)) throw FieldError("shapes", "must hold exactly n ids");
  auto out = detail::envelope(body);
  out["palette"] = palette_score_to_json(score_palette(e.matrices, {shapes, n}, n));
  return out;
}

inline nlohmann::ordered_json handle_recommend(const Engine& e, const nlohmann::json& body) {
  SearchRequest req;
  req.n = detail::category_count(body);
  req.seeds = detail::shape_list(e, body, "seeds", false);
  req.budget = detail::budget_of(e, body);
  req.rng_seed = detail::optional_field<std::uint64_t>(body, "rng_seed", 0);
  const auto result = search(e.matrices, e.catalog, req);
  auto out = detail::envelope(body);
  out["palette"] = palette_score_to_json(result.best);
  out["evaluated"] = result.evaluated;
  out["exhausted"] = result.exhausted;
  out["previews"] = detail::previews(e, result.best.palette, req.rng_seed);
  return out;
}

inline nlohmann::ordered_json handle_swap(const Engine& e, const nlohmann::json& body) {
  const int n = detail::category_count(body);
  const auto shapes = detail::shape_list(e, body, "shapes");
  if (shapes.size() != static_cast<std::size_t>(n)) throw FieldError("shapes", "must hold exactly n ids");
  const auto rejected = detail::optional_field<std::vector<std::string>>(body, "rejected", {});
  const auto seed = detail::optional_field<std::uint64_t>(body, "rng_seed", 0);
  const auto result = swap(e.matrices, e.catalog, {shapes, n}, rejected, n, detail::budget_of(e, body), seed);
  auto out = detail::envelope(body);
  out["palette"] = palette_score_to_json(result.best);
  out["evaluated"] = result.evaluated;
  out["exhausted"] = result.exhausted;
  out["previews"] = detail::previews(e, result.best.palette, seed);
  return out;
}

inline nlohmann::ordered_json handle_preview(const Engine& e, const nlohmann::json& body) {
  const auto shapes = detail::shape_list(e, body, "shapes");
  if (shapes.size() < static_cast<std::size_t>(kMinCategories) || shapes.size() > static_cast<std::size_t>(kMaxCategories)) {
    throw FieldError("shapes", "must hold 2 to 10 ids");
  }
  const auto seed = detail::optional_field<std::uint64_t>(body, "rng_seed", 0);
  auto out = detail::envelope(body);
  out["previews"] = detail::previews(e, {shapes, static_cast<int>(shapes.size())}, seed);
  return out;
}

/// Status for a failed request: 400 for bad input, 422 for well-formed
/// requests the engine cannot satisfy, 500 otherwise.
inline int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::Validation:
    case ErrorKind::Domain: return 400;
    case ErrorKind::Contract:
    case ErrorKind::Infeasible: return 422;
    default: return 500;
  }
}

inline nlohmann::ordered_json error_body(std::string_view kind, std::string_view message,
                                         std::optional<std::string> field = std::nullopt) {
  nlohmann::ordered_json err;
  err["kind"] = kind;
  err["message"] = message;
  if (field) err["field"] = *field;
  nlohmann::ordered_json out;
  out["engine"] = {{"name", kEngineName}, {"version", kVersion}};
  out["error"] = err;
  return out;
}

/// Routes one request. Never throws.
inline ServiceResponse handle_request(const Engine& e, std::string_view method, std::string_view path,
                                      std::string_view body_text) {
  try {
    if (path == "/catalog") {
      if (method != "GET") return {405, error_body("method_not_allowed", "use GET")};
      return {200, handle_catalog(e)};
    }
    using Handler = nlohmann::ordered_json (*)(const Engine&, const nlohmann::json&);
    Handler handler = nullptr;
    if (path == "/score") handler = handle_score;
    else if (path == "/recommend") handler = handle_recommend;
    else if (path == "/swap") handler = handle_swap;
    else if (path == "/preview") handler = handle_preview;
    if (handler == nullptr) return {404, error_body("not_found", "no route " + std::string(path))};
    if (method != "POST") return {405, error_body("method_not_allowed", "use POST")};
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(body_text.empty() ? std::string_view("{}") : body_text);
    } catch (const nlohmann::json::exception& ex) {
      return {400, error_body(to_string(ErrorKind::Parse), std::string("body is not valid JSON: ") + ex.what())};
    }
    if (!body.is_object()) return {400, error_body(to_string(ErrorKind::Parse), "body must be a JSON object")};
    return {200, handler(e, body)};
  } catch (const FieldError& ex) {
    return {400, error_body(to_string(ex.kind()), ex.what(), ex.field())};
  } catch (const Error& ex) {
    return {status_for(ex.kind()), error_body(to_string(ex.kind()), ex.what())};
  } catch (const std::exception& ex) {
    return {500, error_body("internal_error", ex.what())};
  }
}

}  // namespace shapepal
