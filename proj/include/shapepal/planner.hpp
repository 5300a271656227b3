#pragma once

// Experiment plans: shape-type group combinations, designer-palette
// combinations, progressive pair-balanced combinations, stratified task
// groups and engagement checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "shapepal/catalog.hpp"
#include "shapepal/error.hpp"
#include "shapepal/rng.hpp"
#include "shapepal/stats.hpp"
#include "shapepal/stimulus.hpp"

namespace shapepal {

enum class OriginKind { TypeGroup, DesignerPalette, Progressive, Random };

inline std::string_view to_string(OriginKind k) {
  switch (k) {
    case OriginKind::TypeGroup: return "type";
    case OriginKind::DesignerPalette: return "palette";
    case OriginKind::Progressive: return "progressive";
    case OriginKind::Random: return "random";
  }
  return "?";
}

struct Combination {
  std::vector<std::string> shape_ids;
  int n = 0;
  OriginKind origin = OriginKind::Progressive;
  std::string label;  // type-group kind or palette name

  /// `kind:label` as written to trial files.
  std::string origin_tag() const {
    return label.empty() ? std::string(to_string(origin)) : std::string(to_string(origin)) + ":" + label;
  }

  friend bool operator==(const Combination&, const Combination&) = default;
};

// ---------------------------------------------------------------------------
// Coverage ledger

/// Per-pair appearance counts over a fixed pool.
class CoverageLedger {
 public:
  CoverageLedger() = default;
  explicit CoverageLedger(std::vector<std::string> pool) : pool_(std::move(pool)) {
    check_distinct_ids(pool_);
    for (std::size_t i = 0; i < pool_.size(); ++i) index_.emplace(pool_[i], i);
    counts_.assign(pool_.size() * pool_.size(), 0);
  }

  void record(std::span<const std::string> ids) {
    std::vector<std::size_t> pos;
    for (const auto& id : ids) pos.push_back(position(id));
    for (std::size_t i = 0; i < pos.size(); ++i) {
      for (std::size_t j = i + 1; j < pos.size(); ++j) {
        ++counts_[pos[i] * pool_.size() + pos[j]];
        ++counts_[pos[j] * pool_.size() + pos[i]];
      }
    }
  }

  long count(std::size_t i, std::size_t j) const { return counts_[i * pool_.size() + j]; }
  long count(std::string_view a, std::string_view b) const { return count(position(a), position(b)); }

  std::size_t position(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) throw DomainError("shape '" + std::string(id) + "' is not in the ledger pool");
    return it->second;
  }

  const std::vector<std::string>& pool() const { return pool_; }

  /// Counts for every unordered pool pair, row-major over i < j.
  std::vector<double> pair_counts() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < pool_.size(); ++i) {
      for (std::size_t j = i + 1; j < pool_.size(); ++j) out.push_back(static_cast<double>(count(i, j)));
    }
    return out;
  }

  struct Summary {
    long min = 0;
    long max = 0;
    double mean = 0.0;
    double stddev = 0.0;
  };

  Summary summary() const {
    const auto c = pair_counts();
    if (c.empty()) return {};
    return {static_cast<long>(*std::min_element(c.begin(), c.end())),
            static_cast<long>(*std::max_element(c.begin(), c.end())), shapepal::mean(c), shapepal::stddev(c)};
  }

  friend bool operator==(const CoverageLedger& a, const CoverageLedger& b) {
    return a.pool_ == b.pool_ && a.counts_ == b.counts_;
  }

 private:
  std::vector<std::string> pool_;
  std::map<std::string, std::size_t> index_;
  std::vector<long> counts_;
};

namespace detail {

inline std::vector<std::string> sample_without_replacement(Rng& rng, std::span<const std::string> from, std::size_t k) {
  std::vector<std::string> v(from.begin(), from.end());
  for (std::size_t i = 0; i < k; ++i) std::swap(v[i], v[i + rng.below(v.size() - i)]);
  v.resize(k);
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Shape-type groups

struct TypeGroupKind {
  std::string label;
  std::vector<ShapeType> types;
};

inline std::vector<TypeGroupKind> type_group_kinds() {
  using T = ShapeType;
  return {{"filled", {T::Filled}},
          {"unfilled", {T::Unfilled}},
          {"open", {T::Open}},
          {"filled+unfilled", {T::Filled, T::Unfilled}},
          {"filled+open", {T::Filled, T::Open}},
          {"unfilled+open", {T::Unfilled, T::Open}},
          {"filled+unfilled+open", {T::Filled, T::Unfilled, T::Open}}};
}

inline constexpr int kCombinationsPerCell = 10;
inline constexpr std::size_t kTypeGroupPlanSize = 750;

/// Ten combinations per feasible (kind, n) cell, then extra combinations
/// until the plan holds 750. Extras go to the kind with the fewest
/// combinations so far, at its least-covered feasible n, so every kind and
/// category number can meet the task-group quotas.
inline std::vector<Combination> plan_type_groups(const Catalog& catalog, std::uint64_t rng_seed) {
  const auto subset = catalog.experiment_subset();
  std::map<ShapeType, std::vector<std::string>> pools;
  for (const auto& s : subset) pools[s.type].push_back(s.id);
  const auto kinds = type_group_kinds();

  auto feasible = [&](const TypeGroupKind& k, int n) {
    const auto t = static_cast<int>(k.types.size());
    if (n < t) return false;
    const int per_type_max = (n + t - 1) / t;
    for (auto type : k.types) {
      if (static_cast<int>(pools[type].size()) < per_type_max) return false;
    }
    return true;
  };

  std::vector<std::array<int, kMaxCategories + 1>> cells(kinds.size());
  std::vector<int> kind_total(kinds.size(), 0);
  std::array<int, kMaxCategories + 1> n_total{};
  std::size_t total = 0;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    cells[k].fill(0);
    for (int n = kMinCategories; n <= kMaxCategories; ++n) {
      if (!feasible(kinds[k], n)) continue;
      cells[k][n] = kCombinationsPerCell;
      kind_total[k] += kCombinationsPerCell;
      n_total[n] += kCombinationsPerCell;
      total += kCombinationsPerCell;
    }
  }
  if (total == 0) throw PlanningError("experiment subset supports no type-group combinations");
  while (total < kTypeGroupPlanSize) {
    const auto k = static_cast<std::size_t>(std::min_element(kind_total.begin(), kind_total.end()) - kind_total.begin());
    int best_n = -1;
    for (int n = kMinCategories; n <= kMaxCategories; ++n) {
      if (cells[k][n] > 0 && (best_n < 0 || n_total[n] < n_total[best_n])) best_n = n;
    }
    ++cells[k][best_n];
    ++kind_total[k];
    ++n_total[best_n];
    ++total;
  }

  Rng rng(rng_seed);
  std::vector<Combination> plan;
  plan.reserve(total);
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    const auto& kind = kinds[k];
    const auto t = kind.types.size();
    for (int n = kMinCategories; n <= kMaxCategories; ++n) {
      for (int rep = 0; rep < cells[k][n]; ++rep) {
        // Equal share per type; the remainder goes to randomly chosen types.
        std::vector<std::size_t> share(t, static_cast<std::size_t>(n) / t);
        std::vector<std::size_t> order(t);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t r = 0; r < static_cast<std::size_t>(n) % t; ++r) ++share[order[r]];
        Combination c;
        c.n = n;
        c.origin = OriginKind::TypeGroup;
        c.label = kind.label;
        for (std::size_t ti = 0; ti < t; ++ti) {
          const auto picked = detail::sample_without_replacement(rng, pools[kind.types[ti]], share[ti]);
          c.shape_ids.insert(c.shape_ids.end(), picked.begin(), picked.end());
        }
        rng.shuffle(std::span<std::string>(c.shape_ids));
        plan.push_back(std::move(c));
      }
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Designer palettes

inline std::vector<Combination> plan_palette_trials(const Catalog& catalog, std::uint64_t rng_seed) {
  if (catalog.designer_palettes().empty()) throw PlanningError("catalog has no designer palettes");
  Rng rng(rng_seed);
  std::vector<Combination> plan;
  for (const auto& palette : catalog.designer_palettes()) {
    const int max_n = std::min<int>(kMaxCategories, static_cast<int>(palette.shapes.size()));
    for (int n = kMinCategories; n <= max_n; ++n) {
      for (int rep = 0; rep < kCombinationsPerCell; ++rep) {
        Combination c;
        c.n = n;
        c.origin = OriginKind::DesignerPalette;
        c.label = palette.name;
        // Sampling order doubles as the random category assignment.
        c.shape_ids = detail::sample_without_replacement(rng, palette.shapes, static_cast<std::size_t>(n));
        plan.push_back(std::move(c));
      }
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Progressive pair-balanced selection

struct ProgressivePlan {
  std::vector<Combination> combinations;
  CoverageLedger ledger;
};

struct ProgressiveOptions {
  int per_n = 90;
  int n_lo = kMinCategories;
  int n_hi = kMaxCategories;
  int candidate_factor = 5;  // candidates generated per selected combination
};

/// Random n-subsets at n_lo, then for each larger n: greedy candidates that
/// start from a least-covered pair and grow by the shape adding the most
/// weight on under-sampled pairs (weight 1 / (1 + count)); per_n of them are
/// drawn at random and committed to the ledger.
inline ProgressivePlan plan_progressive(std::span<const std::string> pool, const ProgressiveOptions& opt,
                                        std::uint64_t rng_seed) {
  if (opt.n_lo < kMinCategories || opt.n_hi > kMaxCategories || opt.n_lo > opt.n_hi) {
    throw DomainError("progressive n range must lie within [2, 10]");
  }
  if (opt.per_n <= 0 || opt.candidate_factor <= 0) throw DomainError("per_n and candidate_factor must be positive");
  if (pool.size() < static_cast<std::size_t>(opt.n_hi)) throw DomainError("pool smaller than the largest n");
  ProgressivePlan out{{}, CoverageLedger(std::vector<std::string>(pool.begin(), pool.end()))};
  Rng rng(rng_seed);
  const std::size_t k = pool.size();

  auto emit = [&](std::vector<std::string> ids) {
    rng.shuffle(std::span<std::string>(ids));
    out.ledger.record(ids);
    Combination c;
    c.n = static_cast<int>(ids.size());
    c.origin = OriginKind::Progressive;
    c.shape_ids = std::move(ids);
    out.combinations.push_back(std::move(c));
  };

  for (int r = 0; r < opt.per_n; ++r) {
    emit(detail::sample_without_replacement(rng, pool, static_cast<std::size_t>(opt.n_lo)));
  }

  for (int n = opt.n_lo + 1; n <= opt.n_hi; ++n) {
    CoverageLedger work = out.ledger;
    std::vector<std::vector<std::string>> candidates;
    const int wanted = opt.per_n * opt.candidate_factor;
    for (int cand = 0; cand < wanted; ++cand) {
      long lowest = -1;
      std::vector<std::pair<std::size_t, std::size_t>> least;
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
          const long c = work.count(i, j);
          if (lowest < 0 || c < lowest) {
            lowest = c;
            least.clear();
          }
          if (c == lowest) least.emplace_back(i, j);
        }
      }
      const auto [a, b] = least[rng.below(least.size())];
      std::vector<std::size_t> members = {a, b};
      std::vector<char> in(k, 0);
      in[a] = in[b] = 1;
      while (members.size() < static_cast<std::size_t>(n)) {
        double best_gain = -1.0;
        std::vector<std::size_t> ties;
        for (std::size_t s = 0; s < k; ++s) {
          if (in[s]) continue;
          double gain = 0.0;
          for (auto m : members) gain += 1.0 / (1.0 + static_cast<double>(work.count(s, m)));
          if (gain > best_gain + 1e-12) {
            best_gain = gain;
            ties.assign(1, s);
          } else if (std::abs(gain - best_gain) <= 1e-12) {
            ties.push_back(s);
          }
        }
        const auto chosen = ties[rng.below(ties.size())];
        members.push_back(chosen);
        in[chosen] = 1;
      }
      std::vector<std::string> ids;
      for (auto m : members) ids.push_back(pool[m]);
      work.record(ids);
      candidates.push_back(std::move(ids));
    }
    rng.shuffle(std::span<std::vector<std::string>>(candidates));
    for (int r = 0; r < opt.per_n; ++r) emit(std::move(candidates[static_cast<std::size_t>(r)]));
  }
  return out;
}

/// Size-matched baseline: uniform random n-subsets.
inline ProgressivePlan plan_random(std::span<const std::string> pool, const ProgressiveOptions& opt, std::uint64_t rng_seed) {
  ProgressivePlan out{{}, CoverageLedger(std::vector<std::string>(pool.begin(), pool.end()))};
  Rng rng(rng_seed);
  for (int n = opt.n_lo; n <= opt.n_hi; ++n) {
    for (int r = 0; r < opt.per_n; ++r) {
      Combination c;
      c.n = n;
      c.origin = OriginKind::Random;
      c.shape_ids = detail::sample_without_replacement(rng, pool, static_cast<std::size_t>(n));
      out.ledger.record(c.shape_ids);
      out.combinations.push_back(std::move(c));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Task groups

struct GroupPolicy {
  std::string name;
  int groups = 1;
  int capacity = 0;         // maximum tasks per group
  bool exact_size = false;  // every group holds exactly `capacity`
  int min_per_n = 0;
  int min_per_origin = 0;   // per origin label (type-group kind, palette)

  /// 15 groups of 50: at least 5 per category number, 7 per type group.
  static GroupPolicy experiment1() { return {"experiment1", 15, 50, true, 5, 7}; }
  /// 8 groups of at most 52: at least 5 per category number, 7 per palette.
  /// Unsatisfiable for the 410-combination plan: n=10 has 30 combinations.
  static GroupPolicy experiment2() { return {"experiment2", 8, 52, false, 5, 7}; }
  /// experiment2 with 3 per category number, the most n=10 supports.
  static GroupPolicy experiment2_relaxed() { return {"experiment2_relaxed", 8, 52, false, 3, 7}; }
  /// 15 groups of 54: 6 per category number.
  static GroupPolicy experiment4() { return {"experiment4", 15, 54, true, 6, 0}; }
};

struct TaskGroup {
  int group_id = 0;
  std::vector<std::size_t> members;  // indices into the plan
  std::vector<Combination> combinations;
  std::map<int, int> per_n;
  std::map<std::string, int> per_origin;
};

namespace detail {

inline std::optional<std::string> first_violation(const std::vector<TaskGroup>& groups, const GroupPolicy& policy,
                                                  const std::set<int>& ns, const std::set<std::string>& labels) {
  for (const auto& g : groups) {
    const auto size = static_cast<int>(g.members.size());
    if (size > policy.capacity || (policy.exact_size && size != policy.capacity)) {
      return "group " + std::to_string(g.group_id) + " has " + std::to_string(size) + " tasks";
    }
    for (int n : ns) {
      auto it = g.per_n.find(n);
      if ((it == g.per_n.end() ? 0 : it->second) < policy.min_per_n) {
        return "group " + std::to_string(g.group_id) + " has fewer than " + std::to_string(policy.min_per_n) +
               " tasks for category number " + std::to_string(n);
      }
    }
    for (const auto& l : labels) {
      auto it = g.per_origin.find(l);
      if ((it == g.per_origin.end() ? 0 : it->second) < policy.min_per_origin) {
        return "group " + std::to_string(g.group_id) + " has fewer than " + std::to_string(policy.min_per_origin) +
               " tasks for origin " + l;
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Stratified partition of a plan into task groups. Combinations are placed
/// scarcest stratum first, each into the group with the largest unmet
/// quota. Retries with fresh shuffles before reporting the constraint that
/// could not be met.
inline std::vector<TaskGroup> assign_task_groups(std::span<const Combination> plan, const GroupPolicy& policy,
                                                 std::uint64_t rng_seed, int max_attempts = 200) {
  if (policy.groups <= 0 || policy.capacity <= 0) throw PlanningError("policy needs positive group count and capacity");
  const auto groups = static_cast<std::size_t>(policy.groups);
  const std::size_t slots = groups * static_cast<std::size_t>(policy.capacity);
  if (policy.exact_size && plan.size() != slots) {
    throw PlanningError("plan has " + std::to_string(plan.size()) + " combinations; policy " + policy.name +
                        " needs exactly " + std::to_string(slots));
  }
  if (plan.size() > slots) {
    throw PlanningError("plan has " + std::to_string(plan.size()) + " combinations; policy " + policy.name +
                        " holds at most " + std::to_string(slots));
  }
  std::map<int, int> n_count;
  std::map<std::string, int> label_count;
  for (const auto& c : plan) {
    ++n_count[c.n];
    ++label_count[c.label];
  }
  for (const auto& [n, cnt] : n_count) {
    if (cnt < policy.min_per_n * policy.groups) {
      throw PlanningError("category number " + std::to_string(n) + " has " + std::to_string(cnt) +
                          " combinations; policy " + policy.name + " needs " +
                          std::to_string(policy.min_per_n * policy.groups));
    }
  }
  if (policy.min_per_origin > 0) {
    for (const auto& [label, cnt] : label_count) {
      if (cnt < policy.min_per_origin * policy.groups) {
        throw PlanningError("origin " + label + " has " + std::to_string(cnt) + " combinations; policy " +
                            policy.name + " needs " + std::to_string(policy.min_per_origin * policy.groups));
      }
    }
  }
  std::set<int> ns;
  for (const auto& [n, cnt] : n_count) ns.insert(n);
  std::set<std::string> labels;
  if (policy.min_per_origin > 0) {
    for (const auto& [l, cnt] : label_count) labels.insert(l);
  }

  Rng rng(rng_seed);
  std::string last_violation;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<std::size_t> order(plan.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    auto scarcity = [&](std::size_t i) {
      const auto& c = plan[i];
      double s = static_cast<double>(n_count[c.n]) / std::max(1, policy.min_per_n * policy.groups);
      if (policy.min_per_origin > 0) {
        s = std::min(s, static_cast<double>(label_count[c.label]) / (policy.min_per_origin * policy.groups));
      }
      return s;
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scarcity(a) < scarcity(b); });

    std::vector<TaskGroup> out(groups);
    for (std::size_t g = 0; g < groups; ++g) out[g].group_id = static_cast<int>(g);
    bool stuck = false;
    for (auto i : order) {
      const auto& c = plan[i];
      std::size_t best = groups;
      long best_score = -1;
      for (std::size_t g = 0; g < groups; ++g) {
        const auto size = static_cast<int>(out[g].members.size());
        if (size >= policy.capacity) continue;
        const int need_n = std::max(0, policy.min_per_n - out[g].per_n[c.n]);
        const int need_o = policy.min_per_origin > 0 ? std::max(0, policy.min_per_origin - out[g].per_origin[c.label]) : 0;
        // Unmet quotas dominate; emptier groups break ties.
        const long score = (static_cast<long>(need_n) + need_o) * 100'000L + (policy.capacity - size) * 100L +
                           static_cast<long>(rng.below(100));
        if (score > best_score) {
          best_score = score;
          best = g;
        }
      }
      if (best == groups) {
        stuck = true;
        break;
      }
      out[best].members.push_back(i);
      ++out[best].per_n[c.n];
      ++out[best].per_origin[c.label];
    }
    if (stuck) {
      last_violation = "ran out of group capacity";
      continue;
    }
    if (auto v = detail::first_violation(out, policy, ns, labels)) {
      last_violation = *v;
      continue;
    }
    for (auto& g : out) {
      rng.shuffle(std::span<std::size_t>(g.members));
      for (auto i : g.members) g.combinations.push_back(plan[i]);
    }
    return out;
  }
  throw PlanningError("policy " + policy.name + " unsatisfied: " + last_violation);
}

// ---------------------------------------------------------------------------
// Engagement checks

struct EngagementCheck {
  StimulusParams params;
  Palette palette;
  std::uint64_t seed = 0;
  int position = 0;  // insert before this formal-trial index
};

inline const std::vector<std::string>& default_check_shapes() {
  static const std::vector<std::string> shapes = {"f_circle", "u_circle", "o_asterisk"};
  return shapes;
}

/// Easy 2-3 category stimuli: a y-mean gap of at least 0.35 (mean task) or
/// a correlation margin of at least 0.35 against uncorrelated distractors.
inline std::vector<EngagementCheck> engagement_checks(Task task, int count, std::uint64_t rng_seed,
                                                      int formal_trials = 50,
                                                      std::span<const std::string> shapes = default_check_shapes()) {
  if (count < 0) throw DomainError("engagement check count must be non-negative");
  if (shapes.size() < 3) throw DomainError("engagement checks need three shapes");
  Rng rng(rng_seed);
  std::vector<EngagementCheck> out;
  for (int i = 0; i < count; ++i) {
    EngagementCheck check;
    const int n = 2 + static_cast<int>(rng.below(2));
    check.params = task == Task::MeanJudgment ? StimulusParams::mean_task(n) : StimulusParams::correlation_task(n);
    if (task == Task::MeanJudgment) {
      check.params.mean_gap_range = {0.35, 1.0};
    } else {
      check.params.other_cov = 0.0;
      check.params.min_r_gap = 0.35;
    }
    check.palette = {std::vector<std::string>(shapes.begin(), shapes.begin() + n), n};
    check.seed = rng.next();
    check.position = static_cast<int>(rng.below(static_cast<std::uint64_t>(formal_trials) + 1));
    out.push_back(std::move(check));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.position < b.position; });
  return out;
}

inline Stimulus generate_check(const EngagementCheck& check) { return gen_stimulus(check.palette, check.params, check.seed); }

// ---------------------------------------------------------------------------
// Plan manifest

inline nlohmann::ordered_json combination_to_json(const Combination& c) {
  nlohmann::ordered_json j;
  j["shapes"] = c.shape_ids;
  j["n"] = c.n;
  j["origin"] = to_string(c.origin);
  if (!c.label.empty()) j["label"] = c.label;
  return j;
}

inline std::string plan_manifest(std::string_view kind, std::span<const Combination> plan, std::uint64_t master_seed,
                                 const std::vector<TaskGroup>& groups = {}, const CoverageLedger* ledger = nullptr) {
  nlohmann::ordered_json doc;
  doc["format"] = "shapepal-plan";
  doc["version"] = 1;
  doc["kind"] = kind;
  doc["master_seed"] = master_seed;
  auto combos = nlohmann::ordered_json::array();
  for (const auto& c : plan) combos.push_back(combination_to_json(c));
  doc["combinations"] = combos;
  auto gj = nlohmann::ordered_json::array();
  for (const auto& g : groups) gj.push_back({{"group_id", g.group_id}, {"members", g.members}});
  doc["groups"] = gj;
  if (ledger != nullptr) {
    auto rows = nlohmann::ordered_json::array();
    const auto& pool = ledger->pool();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      for (std::size_t j = i + 1; j < pool.size(); ++j) {
        rows.push_back({pool[i], pool[j], ledger->count(i, j)});
      }
    }
    doc["ledger"] = rows;
  }
  return doc.dump(1) + "\n";
}

inline std::vector<Combination> parse_plan(std::string_view text) {
  std::vector<Combination> plan;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.value("format", "") != "shapepal-plan") throw ParseError("not a shapepal plan file");
    for (const auto& cj : doc.at("combinations")) {
      Combination c;
      c.shape_ids = cj.at("shapes").get<std::vector<std::string>>();
      c.n = cj.at("n").get<int>();
      const auto origin = cj.value("origin", "progressive");
      if (origin == "type") c.origin = OriginKind::TypeGroup;
      else if (origin == "palette") c.origin = OriginKind::DesignerPalette;
      else if (origin == "random") c.origin = OriginKind::Random;
      else c.origin = OriginKind::Progressive;
      c.label = cj.value("label", "");
      if (c.shape_ids.size() != static_cast<std::size_t>(c.n)) throw ValidationError("plan combination size mismatch");
      plan.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed plan: ") + e.what());
  }
  return plan;
}

}  // namespace shapepal
