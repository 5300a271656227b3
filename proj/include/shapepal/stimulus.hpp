#pragma once

// Scatterplot stimuli for the two study tasks.
//
// Mean task: per-category 2D Gaussians with uniform means in [0.1, 0.9];
// the gap between the highest and second-highest category y-mean must land
// in mean_gap_range. Correlation task: per-category bivariate normals with
// correlation target_cov (answer category) or other_cov; the answer's
// Pearson r must land in target_r_range with a margin of min_r_gap over
// the runner-up. Both are checked on the jittered points.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "shapepal/catalog.hpp"
#include "shapepal/error.hpp"
#include "shapepal/rng.hpp"
#include "shapepal/stats.hpp"
#include "shapepal/trials.hpp"

namespace shapepal {

inline constexpr double kPlotSizePx = 400.0;
inline constexpr double kGlyphExtentPx = 6.0;

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
  friend bool operator==(const Range&, const Range&) = default;
};

struct StimulusParams {
  Task task = Task::MeanJudgment;
  int n = 2;
  int points_per_category = 20;
  Range mean_range{0.1, 0.9};
  Range mean_gap_range{0.2, 0.25};
  Range target_r_range{0.8, 0.95};
  double min_r_gap = 0.2;
  double target_cov = 0.95;
  double other_cov = 0.6;
  // Per-category standard deviation in data units. 0.04 keeps ~99% of a
  // category's mass inside [0, 1] for means at the ends of mean_range.
  double sigma = 0.04;
  long max_resamples = 10'000;
  double glyph_extent_px = kGlyphExtentPx;
  double plot_size_px = kPlotSizePx;

  static StimulusParams mean_task(int n) {
    StimulusParams p;
    p.task = Task::MeanJudgment;
    p.n = n;
    return p;
  }

  static StimulusParams correlation_task(int n) {
    StimulusParams p;
    p.task = Task::CorrelationJudgment;
    p.n = n;
    return p;
  }

  void validate() const {
    check_category_count(n);
    auto ordered = [](Range r) { return r.lo <= r.hi; };
    if (points_per_category <= 0) throw DomainError("points_per_category must be positive");
    if (!ordered(mean_range) || mean_range.lo < 0.0 || mean_range.hi > 1.0) throw DomainError("bad mean_range");
    if (!ordered(mean_gap_range)) throw DomainError("bad mean_gap_range");
    if (!ordered(target_r_range)) throw DomainError("bad target_r_range");
    if (std::abs(target_cov) > 1.0 || std::abs(other_cov) > 1.0) throw DomainError("covariances must lie in [-1, 1]");
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    if (max_resamples <= 0) throw DomainError("max_resamples must be positive");
  }
};

struct Stimulus {
  StimulusParams params;
  std::uint64_t seed = 0;
  std::vector<std::vector<Point>> categories;
  std::vector<std::string> assignment;  // category -> shape id
  int answer = 0;
  std::vector<double> achieved;  // y-means (mean task) or Pearson r (correlation task)
  long attempts = 0;
};

/// The statistic each task ranks categories by, recomputed from points.
inline std::vector<double> measure_categories(Task task, const std::vector<std::vector<Point>>& categories) {
  std::vector<double> out;
  out.reserve(categories.size());
  for (const auto& pts : categories) {
    std::vector<double> xs, ys;
    for (const auto& p : pts) {
      xs.push_back(p.x);
      ys.push_back(p.y);
    }
    out.push_back(task == Task::MeanJudgment ? mean(ys) : pearson(xs, ys));
  }
  return out;
}

/// Index of the largest value and its gap over the second largest.
inline std::pair<int, double> top_gap(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  double second = -1e300;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (static_cast<int>(i) != best) second = std::max(second, values[i]);
  }
  return {best, values[static_cast<std::size_t>(best)] - second};
}

/// Separates points whose glyph boxes (extent x extent px, axis aligned)
/// overlap. Each overlapping pair pushes its second point along a
/// hash-derived angle by the smallest step that clears the boxes. Returns
/// nullopt when `max_passes` sweeps still leave an overlap.
inline std::optional<std::vector<Point>> jitter(std::vector<Point> points, double glyph_extent_px,
                                                double plot_size_px = kPlotSizePx, int max_passes = 500) {
  constexpr double kMarginPx = 1e-6;
  const double e = glyph_extent_px;
  auto px = [&](double v) { return v * plot_size_px; };
  for (int pass = 0; pass < max_passes; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = i + 1; j < points.size(); ++j) {
        const double dx = px(points[j].x) - px(points[i].x);
        const double dy = px(points[j].y) - px(points[i].y);
        if (std::max(std::abs(dx), std::abs(dy)) >= e) continue;
        const std::uint64_t h = splitmix64(derive_seed(i * 1000003ULL + j, static_cast<std::uint64_t>(pass)));
        const double theta = static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 * std::numbers::pi;
        const double ux = std::cos(theta);
        const double uy = std::sin(theta);
        double step = 1e300;
        if (std::abs(ux) > 1e-12) step = std::min(step, ux > 0 ? (e - dx) / ux : (e + dx) / -ux);
        if (std::abs(uy) > 1e-12) step = std::min(step, uy > 0 ? (e - dy) / uy : (e + dy) / -uy);
        step += kMarginPx;
        points[j].x = std::clamp(points[j].x + step * ux / plot_size_px, 0.0, 1.0);
        points[j].y = std::clamp(points[j].y + step * uy / plot_size_px, 0.0, 1.0);
        moved = true;
      }
    }
    if (!moved) return points;
  }
  return std::nullopt;
}

namespace detail {

inline Point sample_point(Rng& rng, double mx, double my, double sigma, double rho) {
  // Rejection keeps the Gaussian shape inside the unit square.
  for (int tries = 0; tries < 100'000; ++tries) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double x = mx + sigma * z1;
    const double y = my + sigma * (rho * z1 + std::sqrt(1.0 - rho * rho) * z2);
    if (x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0) return {x, y};
  }
  throw GenerationError("could not place a point inside [0,1]^2", 100'000);
}

inline std::vector<Point> flatten(const std::vector<std::vector<Point>>& cats) {
  std::vector<Point> all;
  for (const auto& c : cats) all.insert(all.end(), c.begin(), c.end());
  return all;
}

inline void unflatten(const std::vector<Point>& all, std::vector<std::vector<Point>>& cats) {
  std::size_t k = 0;
  for (auto& c : cats) {
    for (auto& p : c) p = all[k++];
  }
}

inline bool satisfies(const StimulusParams& p, std::span<const double> stats, int target) {
  const auto [best, gap] = top_gap(stats);
  if (p.task == Task::MeanJudgment) return p.mean_gap_range.contains(gap);
  return best == target && p.target_r_range.contains(stats[static_cast<std::size_t>(best)]) && gap >= p.min_r_gap;
}

inline Stimulus generate(const Palette& palette, const StimulusParams& params, std::uint64_t rng_seed) {
  params.validate();
  if (palette.shape_ids.size() != static_cast<std::size_t>(params.n)) {
    throw ContractError("palette has " + std::to_string(palette.shape_ids.size()) + " shapes for a " +
                        std::to_string(params.n) + "-category stimulus");
  }
  check_distinct_ids(palette.shape_ids);
  Rng rng(rng_seed);
  const auto n = static_cast<std::size_t>(params.n);
  const auto m = static_cast<std::size_t>(params.points_per_category);
  const bool corr = params.task == Task::CorrelationJudgment;
  std::vector<std::vector<Point>> cats(n, std::vector<Point>(m));
  for (long attempt = 1; attempt <= params.max_resamples; ++attempt) {
    const int target = corr ? static_cast<int>(rng.below(n)) : -1;
    for (std::size_t c = 0; c < n; ++c) {
      const double mx = rng.uniform(params.mean_range.lo, params.mean_range.hi);
      const double my = rng.uniform(params.mean_range.lo, params.mean_range.hi);
      const double rho = !corr ? 0.0 : (static_cast<int>(c) == target ? params.target_cov : params.other_cov);
      for (auto& pt : cats[c]) pt = sample_point(rng, mx, my, params.sigma, rho);
    }
    // Cheap pre-check; the binding check runs after jitter.
    if (!satisfies(params, measure_categories(params.task, cats), target)) continue;
    auto moved = jitter(flatten(cats), params.glyph_extent_px, params.plot_size_px);
    if (!moved) continue;
    unflatten(*moved, cats);
    const auto stats = measure_categories(params.task, cats);
    if (!satisfies(params, stats, target)) continue;
    Stimulus s;
    s.params = params;
    s.seed = rng_seed;
    s.categories = cats;
    s.assignment = palette.shape_ids;
    s.answer = top_gap(stats).first;
    s.achieved = stats;
    s.attempts = attempt;
    return s;
  }
  throw GenerationError(std::string(to_string(params.task)) + " stimulus constraints not met", params.max_resamples);
}

}  // namespace detail

inline Stimulus gen_mean_stimulus(const Palette& palette, StimulusParams params, std::uint64_t rng_seed) {
  params.task = Task::MeanJudgment;
  return detail::generate(palette, params, rng_seed);
}

inline Stimulus gen_correlation_stimulus(const Palette& palette, StimulusParams params, std::uint64_t rng_seed) {
  params.task = Task::CorrelationJudgment;
  return detail::generate(palette, params, rng_seed);
}

inline Stimulus gen_stimulus(const Palette& palette, const StimulusParams& params, std::uint64_t rng_seed) {
  return detail::generate(palette, params, rng_seed);
}

/// Re-checks a stimulus against its task constraints from the points alone.
inline bool verify_stimulus(const Stimulus& s) {
  for (const auto& c : s.categories) {
    if (c.size() != static_cast<std::size_t>(s.params.points_per_category)) return false;
    for (const auto& p : c) {
      if (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0) return false;
    }
  }
  const auto stats = measure_categories(s.params.task, s.categories);
  const auto [best, gap] = top_gap(stats);
  if (best != s.answer) return false;
  if (s.params.task == Task::MeanJudgment) return s.params.mean_gap_range.contains(gap);
  return s.params.target_r_range.contains(stats[static_cast<std::size_t>(best)]) && gap >= s.params.min_r_gap;
}

// ---------------------------------------------------------------------------
// Manifest records

inline nlohmann::ordered_json params_to_json(const StimulusParams& p) {
  nlohmann::ordered_json j;
  j["task"] = to_string(p.task);
  j["n"] = p.n;
  j["points_per_category"] = p.points_per_category;
  j["mean_range"] = {p.mean_range.lo, p.mean_range.hi};
  if (p.task == Task::MeanJudgment) {
    j["mean_gap_range"] = {p.mean_gap_range.lo, p.mean_gap_range.hi};
  } else {
    j["target_r_range"] = {p.target_r_range.lo, p.target_r_range.hi};
    j["min_r_gap"] = p.min_r_gap;
    j["target_cov"] = p.target_cov;
    j["other_cov"] = p.other_cov;
  }
  j["sigma"] = p.sigma;
  j["max_resamples"] = p.max_resamples;
  return j;
}

inline nlohmann::ordered_json stimulus_manifest_record(const Stimulus& s, const std::string& svg_path) {
  nlohmann::ordered_json j;
  j["params"] = params_to_json(s.params);
  j["seed"] = s.seed;
  j["assignment"] = s.assignment;
  j["answer"] = s.answer;
  j["achieved"] = s.achieved;
  j["attempts"] = s.attempts;
  j["svg"] = svg_path;
  return j;
}

}  // namespace shapepal
