#pragma once

// Palette scoring, ranking and the budgeted seeded search behind the design
// tool's recommend and swap actions.
//
// Ranking order: (band_score, global_score) descending, then the top ten
// are re-ordered by tiebreak_score descending; remaining ties go to the
// lexicographically smaller sorted id list.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "shapepal/catalog.hpp"
#include "shapepal/error.hpp"
#include "shapepal/pairwise.hpp"
#include "shapepal/rng.hpp"

namespace shapepal {

inline constexpr std::size_t kTiebreakDepth = 10;

struct PaletteScore {
  Palette palette;
  double band_score = 0.0;
  double global_score = 0.0;
  double tiebreak_score = 0.0;
  int evaluated_pairs = 0;
  int tiebreak_pairs = 0;  // pairs with sparse mean-judgment data

  friend bool operator==(const PaletteScore&, const PaletteScore&) = default;
};

namespace detail {

inline std::vector<std::string> sorted_ids(const Palette& p) {
  std::vector<std::string> ids = p.shape_ids;
  std::sort(ids.begin(), ids.end());
  return ids;
}

/// Primary rank order: band desc, global desc, sorted ids asc.
inline bool primary_before(const PaletteScore& a, const PaletteScore& b) {
  if (a.band_score != b.band_score) return a.band_score > b.band_score;
  if (a.global_score != b.global_score) return a.global_score > b.global_score;
  return sorted_ids(a.palette) < sorted_ids(b.palette);
}

}  // namespace detail

/// Scores a palette of exactly n shapes. Pair sums run over the sorted id
/// order so equal sets always produce bit-identical scores.
inline PaletteScore score_palette(const ModelMatrices& m, const Palette& p, int n) {
  check_category_count(n);
  if (p.shape_ids.size() != static_cast<std::size_t>(n)) {
    throw ContractError("palette has " + std::to_string(p.shape_ids.size()) + " shapes but n=" +
                        std::to_string(n));
  }
  check_distinct_ids(p.shape_ids);
  const auto ids = detail::sorted_ids(p);
  const Band band = band_for(n);
  PaletteScore s;
  s.palette = {p.shape_ids, n};
  double band_sum = 0.0, global_sum = 0.0, tie_sum = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      band_sum += pair_score(m, ids[i], ids[j], band);
      global_sum += pair_score(m, ids[i], ids[j], Band::Global);
      if (auto t = m.sparse_mean.accuracy(ids[i], ids[j])) {
        tie_sum += *t;
        ++s.tiebreak_pairs;
      }
      ++s.evaluated_pairs;
    }
  }
  s.band_score = band_sum / s.evaluated_pairs;
  s.global_score = global_sum / s.evaluated_pairs;
  s.tiebreak_score = s.tiebreak_pairs > 0 ? tie_sum / s.tiebreak_pairs : 0.0;
  return s;
}

/// Orders already-scored palettes (a permutation of the input).
inline std::vector<PaletteScore> rank_scores(std::vector<PaletteScore> scores) {
  std::stable_sort(scores.begin(), scores.end(), detail::primary_before);
  const auto top = static_cast<std::ptrdiff_t>(std::min(kTiebreakDepth, scores.size()));
  std::stable_sort(scores.begin(), scores.begin() + top, [](const PaletteScore& a, const PaletteScore& b) {
    return a.tiebreak_score > b.tiebreak_score;
  });
  return scores;
}

inline std::vector<PaletteScore> rank_palettes(const ModelMatrices& m, std::span<const Palette> candidates, int n) {
  std::vector<PaletteScore> scores;
  scores.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (c.shape_ids.size() != static_cast<std::size_t>(n)) {
      throw ContractError("rank_palettes: candidate of size " + std::to_string(c.shape_ids.size()) +
                          " in a ranking for n=" + std::to_string(n));
    }
    scores.push_back(score_palette(m, c, n));
  }
  return rank_scores(std::move(scores));
}

// ---------------------------------------------------------------------------
// Search

/// Either a wall-clock allowance or a fixed number of distinct candidates.
struct Budget {
  enum class Kind { WallClockMs, Iterations };
  Kind kind = Kind::WallClockMs;
  long value = 5000;

  static Budget millis(long ms) { return {Kind::WallClockMs, ms}; }
  static Budget iterations(long count) { return {Kind::Iterations, count}; }
};

inline constexpr long kDefaultBudgetMs = 5000;
inline constexpr std::size_t kDefaultMaxCandidates = 1'000'000;

struct SearchRequest {
  std::vector<std::string> seeds;
  int n = 0;
  Budget budget = Budget::millis(kDefaultBudgetMs);
  std::uint64_t rng_seed = 0;
  // Hard ceiling on distinct candidates; bounds the dedup set in wall-clock mode.
  std::size_t max_candidates = kDefaultMaxCandidates;
};

struct SearchResult {
  PaletteScore best;
  std::size_t evaluated = 0;
  bool exhausted = false;  // every feasible candidate was evaluated
  double elapsed_ms = 0.0;
};

using CandidateObserver = std::function<void(const PaletteScore&)>;

namespace detail {

/// Dense pair-score tables over a pool sorted by id, so a bitmask over pool
/// positions enumerates ids in lexicographic order.
class ScoreTable {
 public:
  ScoreTable(const ModelMatrices& m, std::vector<std::string> pool, int n) : ids_(std::move(pool)), n_(n) {
    std::sort(ids_.begin(), ids_.end());
    const std::size_t k = ids_.size();
    band_.assign(k * k, 0.0);
    global_.assign(k * k, 0.0);
    tie_.assign(k * k, 0.0);
    has_tie_.assign(k * k, 0);
    const Band band = band_for(n);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        const std::size_t ij = i * k + j;
        band_[ij] = pair_score(m, ids_[i], ids_[j], band);
        global_[ij] = pair_score(m, ids_[i], ids_[j], Band::Global);
        if (auto t = m.sparse_mean.accuracy(ids_[i], ids_[j])) {
          tie_[ij] = *t;
          has_tie_[ij] = 1;
        }
      }
    }
  }

  const std::vector<std::string>& ids() const { return ids_; }

  std::size_t position(std::string_view id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) throw DomainError("unknown shape id '" + std::string(id) + "'");
    return static_cast<std::size_t>(it - ids_.begin());
  }

  struct Key {
    std::uint64_t mask = 0;
    double band = 0.0;
    double global = 0.0;
    double tiebreak = 0.0;
    int tie_pairs = 0;
  };

  Key evaluate(std::uint64_t mask) const {
    int members[64];
    int count = 0;
    for (std::uint64_t rest = mask; rest != 0; rest &= rest - 1) members[count++] = std::countr_zero(rest);
    const std::size_t k = ids_.size();
    double b = 0.0, g = 0.0, t = 0.0;
    int pairs = 0, tie_pairs = 0;
    for (int i = 0; i < count; ++i) {
      for (int j = i + 1; j < count; ++j) {
        const std::size_t ij = static_cast<std::size_t>(members[i]) * k + static_cast<std::size_t>(members[j]);
        b += band_[ij];
        g += global_[ij];
        if (has_tie_[ij]) {
          t += tie_[ij];
          ++tie_pairs;
        }
        ++pairs;
      }
    }
    return {mask, b / pairs, g / pairs, tie_pairs > 0 ? t / tie_pairs : 0.0, tie_pairs};
  }

  int n() const { return n_; }

 private:
  std::vector<std::string> ids_;
  int n_;
  std::vector<double> band_, global_, tie_;
  std::vector<char> has_tie_;
};

/// Lexicographic comparison of the ascending position lists of two masks of
/// equal popcount.
inline bool mask_ids_less(std::uint64_t a, std::uint64_t b) {
  if (a == b) return false;
  const std::uint64_t diff = a ^ b;
  return (a & (diff & (~diff + 1))) != 0;
}

inline bool key_primary_before(const ScoreTable::Key& a, const ScoreTable::Key& b) {
  if (a.band != b.band) return a.band > b.band;
  if (a.global != b.global) return a.global > b.global;
  return mask_ids_less(a.mask, b.mask);
}

/// Keeps the best kTiebreakDepth candidates by primary key.
class TopCandidates {
 public:
  void offer(const ScoreTable::Key& k) {
    if (items_.size() == kTiebreakDepth && !key_primary_before(k, items_.back())) return;
    auto pos = std::upper_bound(items_.begin(), items_.end(), k, key_primary_before);
    items_.insert(pos, k);
    if (items_.size() > kTiebreakDepth) items_.pop_back();
  }

  /// First entry of the full rank order: highest tiebreak among the top
  /// ten, primary order among equal tiebreaks.
  const ScoreTable::Key& best() const {
    const ScoreTable::Key* best = &items_.front();
    for (const auto& k : items_) {
      if (k.tiebreak > best->tiebreak) best = &k;
    }
    return *best;
  }

  bool empty() const { return items_.empty(); }

 private:
  std::vector<ScoreTable::Key> items_;
};

inline std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  constexpr std::uint64_t cap = UINT64_MAX / 2;
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) is divisible by i; cancel the common factor first.
    const std::uint64_t g = std::gcd(r, i);
    const std::uint64_t t = (n - k + i) / (i / g);
    r /= g;
    if (r > cap / t) return cap;
    r *= t;
  }
  return r;
}

inline constexpr std::uint64_t kEnumerateLimit = 2'000'000;

}  // namespace detail

/// Search restricted to `pool`. Shapes in `excluded` are never added as
/// fill; seeds always stay. `ordered_fixed` controls output order: fixed
/// shapes first in the given order, fill shapes after in pool order.
inline SearchResult search_pool(const ModelMatrices& m, std::span<const std::string> pool,
                                const SearchRequest& req, std::span<const std::string> excluded = {},
                                const CandidateObserver& observer = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  check_category_count(req.n);
  if (req.budget.value <= 0) throw DomainError("search budget must be positive");
  if (req.seeds.size() > kStudyCatalogSize) throw DomainError("more than 39 seed shapes");
  check_distinct_ids(req.seeds);
  if (pool.size() > 64) throw DomainError("search pools are limited to 64 shapes");
  {
    std::vector<std::string> p(pool.begin(), pool.end());
    check_distinct_ids(p);
  }
  for (const auto& s : req.seeds) {
    if (std::find(pool.begin(), pool.end(), s) == pool.end()) throw DomainError("unknown shape id '" + s + "'");
  }

  const auto n = static_cast<std::size_t>(req.n);
  SearchResult result;

  if (req.seeds.size() == n) {
    result.best = score_palette(m, {req.seeds, req.n}, req.n);
    result.evaluated = 1;
    result.exhausted = true;
    if (observer) observer(result.best);
    result.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return result;
  }

  const detail::ScoreTable table(m, std::vector<std::string>(pool.begin(), pool.end()), req.n);

  // Positions the candidate chooses from, and the always-present mask.
  std::vector<int> choose_from;
  std::uint64_t fixed_mask = 0;
  std::size_t pick = 0;
  if (req.seeds.size() > n) {
    for (const auto& s : req.seeds) choose_from.push_back(static_cast<int>(table.position(s)));
    pick = n;
  } else {
    for (const auto& s : req.seeds) fixed_mask |= std::uint64_t{1} << table.position(s);
    for (std::size_t i = 0; i < table.ids().size(); ++i) {
      const auto& id = table.ids()[i];
      const bool is_fixed = (fixed_mask >> i) & 1U;
      const bool is_excluded = std::find(excluded.begin(), excluded.end(), id) != excluded.end();
      if (!is_fixed && !is_excluded) choose_from.push_back(static_cast<int>(i));
    }
    pick = n - req.seeds.size();
    if (choose_from.size() < pick) {
      throw InfeasibleError("only " + std::to_string(choose_from.size()) + " shapes available to fill " +
                            std::to_string(pick) + " slots");
    }
  }
  // Keep draws independent of the caller's seed order.
  std::sort(choose_from.begin(), choose_from.end());

  const std::uint64_t space = detail::binomial_saturating(choose_from.size(), pick);
  std::size_t cap = req.max_candidates;
  if (req.budget.kind == Budget::Kind::Iterations) cap = std::min<std::size_t>(cap, static_cast<std::size_t>(req.budget.value));
  const auto deadline = start + std::chrono::milliseconds(req.budget.value);
  const bool timed = req.budget.kind == Budget::Kind::WallClockMs;

  auto to_palette = [&](std::uint64_t mask) {
    Palette p;
    p.n = req.n;
    if (req.seeds.size() > n) {
      for (const auto& s : req.seeds) {
        if ((mask >> table.position(s)) & 1U) p.shape_ids.push_back(s);
      }
    } else {
      p.shape_ids = req.seeds;
      for (const auto& id : pool) {
        const auto pos = table.position(id);
        if (((mask >> pos) & 1U) && !((fixed_mask >> pos) & 1U)) p.shape_ids.push_back(id);
      }
    }
    return p;
  };

  Rng rng(req.rng_seed);
  detail::TopCandidates top;
  auto consider = [&](std::uint64_t mask) {
    const auto key = table.evaluate(mask);
    top.offer(key);
    ++result.evaluated;
    if (observer) {
      observer({to_palette(mask), key.band, key.global, key.tiebreak,
                static_cast<int>(n * (n - 1) / 2), key.tie_pairs});
    }
  };
  auto out_of_budget = [&] { return result.evaluated >= cap || (timed && Clock::now() >= deadline); };

  if (space <= detail::kEnumerateLimit) {
    // Small space: visit every candidate once in random order.
    std::vector<std::uint64_t> all;
    all.reserve(space);
    std::vector<std::size_t> idx(pick);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      std::uint64_t mask = fixed_mask;
      for (auto i : idx) mask |= std::uint64_t{1} << choose_from[i];
      all.push_back(mask);
      std::size_t i = pick;
      while (i > 0 && idx[i - 1] == choose_from.size() - pick + (i - 1)) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < pick; ++j) idx[j] = idx[j - 1] + 1;
    }
    rng.shuffle(std::span<std::uint64_t>(all));
    for (auto mask : all) {
      if (out_of_budget()) break;
      consider(mask);
    }
    result.exhausted = result.evaluated == all.size();
  } else {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(std::min<std::size_t>(cap, 1 << 16));
    std::vector<int> scratch = choose_from;
    while (!out_of_budget()) {
      std::uint64_t mask = fixed_mask;
      for (std::size_t i = 0; i < pick; ++i) {
        const auto j = i + rng.below(scratch.size() - i);
        std::swap(scratch[i], scratch[j]);
        mask |= std::uint64_t{1} << scratch[i];
      }
      if (!seen.insert(mask).second) continue;
      consider(mask);
    }
  }

  const auto& best = top.best();
  result.best = {to_palette(best.mask), best.band, best.global, best.tiebreak,
                 static_cast<int>(n * (n - 1) / 2), best.tie_pairs};
  result.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return result;
}

inline SearchResult search(const ModelMatrices& m, const Catalog& catalog, const SearchRequest& req,
                           const CandidateObserver& observer = {}) {
  for (const auto& s : req.seeds) {
    if (!catalog.contains(s)) throw DomainError("unknown shape id '" + s + "'");
  }
  const auto pool = catalog.ids();
  return search_pool(m, pool, req, {}, observer);
}

/// Replaces the rejected shapes of `current` with the best fill found under
/// the budget. Kept shapes stay in their slots; new shapes take the
/// rejected slots.
inline SearchResult swap(const ModelMatrices& m, const Catalog& catalog, const Palette& current,
                         std::span<const std::string> rejected, int n, Budget budget, std::uint64_t rng_seed,
                         const CandidateObserver& observer = {}) {
  check_category_count(n);
  if (current.shape_ids.size() != static_cast<std::size_t>(n)) {
    throw ContractError("current palette has " + std::to_string(current.shape_ids.size()) +
                        " shapes but n=" + std::to_string(n));
  }
  check_distinct_ids(current.shape_ids, &catalog);
  {
    std::vector<std::string> r(rejected.begin(), rejected.end());
    check_distinct_ids(r);
  }
  for (const auto& r : rejected) {
    if (std::find(current.shape_ids.begin(), current.shape_ids.end(), r) == current.shape_ids.end()) {
      throw ContractError("rejected shape '" + r + "' is not in the current palette");
    }
  }
  if (rejected.empty()) {
    SearchResult result;
    result.best = score_palette(m, current, n);
    result.evaluated = 1;
    result.exhausted = true;
    return result;
  }
  const std::size_t free = catalog.size() - current.shape_ids.size();
  if (free < rejected.size()) {
    throw InfeasibleError("catalog has " + std::to_string(free) + " unused shapes, cannot replace " +
                          std::to_string(rejected.size()));
  }
  SearchRequest req;
  req.n = n;
  req.budget = budget;
  req.rng_seed = rng_seed;
  for (const auto& id : current.shape_ids) {
    if (std::find(rejected.begin(), rejected.end(), id) == rejected.end()) req.seeds.push_back(id);
  }
  const auto pool = catalog.ids();
  SearchResult result = search_pool(m, pool, req, current.shape_ids, observer);

  // Put fill shapes into the rejected slots.
  std::vector<std::string> fill(result.best.palette.shape_ids.begin() + static_cast<std::ptrdiff_t>(req.seeds.size()),
                                result.best.palette.shape_ids.end());
  Palette arranged{current.shape_ids, n};
  std::size_t next = 0;
  for (auto& id : arranged.shape_ids) {
    if (std::find(rejected.begin(), rejected.end(), id) != rejected.end()) id = fill[next++];
  }
  result.best.palette = std::move(arranged);
  return result;
}

// ---------------------------------------------------------------------------
// Palette exchange format: {shapes: [...], n, scores: {band, global, tiebreak}}

inline nlohmann::ordered_json palette_score_to_json(const PaletteScore& s) {
  nlohmann::ordered_json j;
  j["shapes"] = s.palette.shape_ids;
  j["n"] = s.palette.n;
  j["scores"] = {{"band", s.band_score}, {"global", s.global_score}, {"tiebreak", s.tiebreak_score}};
  j["evaluated_pairs"] = s.evaluated_pairs;
  return j;
}

inline Palette palette_from_json(const nlohmann::json& j) {
  try {
    Palette p;
    p.shape_ids = j.at("shapes").get<std::vector<std::string>>();
    p.n = j.contains("n") ? j.at("n").get<int>() : static_cast<int>(p.shape_ids.size());
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed palette: ") + e.what());
  }
}

}  // namespace shapepal
