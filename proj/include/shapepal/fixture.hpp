#pragma once

// Deterministic synthetic study data in the trial export format:
//  - 14,850 correlation trials over an 810-combination progressive plan,
//    answered by a hashed synthetic observer, with two pair accuracies
//    pinned exactly (f_plus/u_star6 at Low = 0.80, f_star5/f_star6 at
//    Mid = 0.46);
//  - mean-judgment trials over the type-group and designer-palette plans,
//    tagged with their origin.
// Also a 5-shape catalog and matrix file with hand-set accuracies.

#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "shapepal/analysis.hpp"
#include "shapepal/catalog.hpp"
#include "shapepal/pairwise.hpp"
#include "shapepal/planner.hpp"
#include "shapepal/rng.hpp"
#include "shapepal/trials.hpp"

namespace shapepal {

struct PinnedPair {
  std::string a;
  std::string b;
  Band band = Band::Low;
  long numerator = 0;  // accuracy = numerator / denominator exactly
  long denominator = 1;
};

struct FixtureOptions {
  std::uint64_t master_seed = 0x5A9E'2024ULL;
  std::size_t correlation_trials = 14'850;
  int per_n = 90;
  int mean_trials_per_combination = 3;
  std::vector<PinnedPair> pins = {{"f_plus", "u_star6", Band::Low, 4, 5}, {"f_star5", "f_star6", Band::Mid, 23, 50}};
};

struct StudyFixture {
  std::vector<Combination> correlation_plan;
  std::vector<TaskGroup> correlation_groups;
  std::vector<TrialRecord> correlation_trials;
  std::vector<TrialRecord> mean_trials;
};

namespace detail {

inline bool has_pair(const std::vector<std::string>& ids, std::string_view a, std::string_view b) {
  return std::find(ids.begin(), ids.end(), a) != ids.end() && std::find(ids.begin(), ids.end(), b) != ids.end();
}

inline bool touches_pin(const TrialRecord& r, const PinnedPair& p) {
  return band_for(r.n) == p.band && has_pair(r.shape_ids, p.a, p.b);
}

inline std::string padded(long v, int width) {
  std::string s = std::to_string(v);
  return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

}  // namespace detail

inline StudyFixture generate_study_fixture(const Catalog& catalog, const FixtureOptions& opt = {}) {
  StudyFixture fx;
  const auto pool = catalog.ids();
  ProgressiveOptions popt;
  popt.per_n = opt.per_n;
  fx.correlation_plan = plan_progressive(pool, popt, derive_seed(opt.master_seed, 1)).combinations;
  fx.correlation_groups = assign_task_groups(fx.correlation_plan, GroupPolicy::experiment4(), derive_seed(opt.master_seed, 2));
  std::vector<std::string> group_of(fx.correlation_plan.size());
  for (const auto& g : fx.correlation_groups) {
    for (auto i : g.members) group_of[i] = "g" + detail::padded(g.group_id + 1, 2);
  }

  long reserve = 0;
  for (const auto& p : opt.pins) {
    if (p.denominator <= 0 || p.numerator < 0 || p.numerator > p.denominator) throw DomainError("bad pinned accuracy");
    reserve += p.denominator - 1;
  }
  const auto combos = fx.correlation_plan.size();
  if (opt.correlation_trials < combos + static_cast<std::size_t>(reserve)) {
    throw PlanningError("too few correlation trials for the plan");
  }
  const std::size_t base_total = opt.correlation_trials - static_cast<std::size_t>(reserve);
  std::vector<std::size_t> reps(combos, base_total / combos);
  for (std::size_t i = 0; i < base_total % combos; ++i) ++reps[i];

  const auto observer = SyntheticObserver::hashed(derive_seed(opt.master_seed, 3));
  Rng rng(derive_seed(opt.master_seed, 4));
  auto make_trial = [&](std::size_t combo, std::size_t rep) {
    const auto& c = fx.correlation_plan[combo];
    TrialRecord r;
    r.task = Task::CorrelationJudgment;
    r.shape_ids = c.shape_ids;
    r.n = c.n;
    r.correct = rng.bernoulli(observer.combination_probability(c.shape_ids));
    r.group_id = group_of[combo];
    r.participant_id = r.group_id + "-p" + detail::padded(static_cast<long>(rep) + 1, 2);
    return r;
  };
  auto& trials = fx.correlation_trials;
  for (std::size_t i = 0; i < combos; ++i) {
    for (std::size_t k = 0; k < reps[i]; ++k) trials.push_back(make_trial(i, k));
  }

  // Pins: top up appearances to a multiple of the denominator with extra
  // trials of a plan combination showing the pair, then flip correctness
  // (latest trials first) until the count matches exactly.
  for (const auto& pin : opt.pins) {
    std::size_t host = combos;
    for (std::size_t i = 0; i < combos && host == combos; ++i) {
      const auto& c = fx.correlation_plan[i];
      if (band_for(c.n) == pin.band && detail::has_pair(c.shape_ids, pin.a, pin.b)) host = i;
    }
    if (host == combos) {
      throw PlanningError("plan never shows " + pin.a + "/" + pin.b + " in band " + std::string(to_string(pin.band)));
    }
    long appear = 0;
    for (const auto& r : trials) appear += detail::touches_pin(r, pin) ? 1 : 0;
    const long extra = (pin.denominator - appear % pin.denominator) % pin.denominator;
    for (long k = 0; k < extra; ++k) trials.push_back(make_trial(host, reps[host]++));
    appear += extra;
    long correct = 0;
    for (const auto& r : trials) correct += detail::touches_pin(r, pin) && r.correct ? 1 : 0;
    const long target = appear / pin.denominator * pin.numerator;
    for (auto it = trials.rbegin(); it != trials.rend() && correct != target; ++it) {
      if (!detail::touches_pin(*it, pin)) continue;
      if (correct < target && !it->correct) {
        it->correct = true;
        ++correct;
      } else if (correct > target && it->correct) {
        it->correct = false;
        --correct;
      }
    }
  }

  // Fill the remaining slots with trials that show no pinned pair.
  std::size_t cursor = 0;
  while (trials.size() < opt.correlation_trials) {
    const std::size_t i = cursor++ % combos;
    const auto& c = fx.correlation_plan[i];
    bool pinned = false;
    for (const auto& pin : opt.pins) pinned = pinned || detail::has_pair(c.shape_ids, pin.a, pin.b);
    if (!pinned) trials.push_back(make_trial(i, reps[i]++));
  }
  for (std::size_t t = 0; t < trials.size(); ++t) trials[t].trial_id = "e4-" + detail::padded(static_cast<long>(t) + 1, 5);

  // Mean-judgment trials from the type-group and designer-palette plans.
  auto mean_plan = plan_type_groups(catalog, derive_seed(opt.master_seed, 5));
  const auto palettes = plan_palette_trials(catalog, derive_seed(opt.master_seed, 6));
  const auto g1 = assign_task_groups(mean_plan, GroupPolicy::experiment1(), derive_seed(opt.master_seed, 7));
  const auto g2 = assign_task_groups(palettes, GroupPolicy::experiment2_relaxed(), derive_seed(opt.master_seed, 8));
  const auto mean_observer = SyntheticObserver::hashed(derive_seed(opt.master_seed, 9));
  Rng mean_rng(derive_seed(opt.master_seed, 10));
  long next = 0;
  auto emit_groups = [&](const std::vector<TaskGroup>& groups, std::string_view prefix) {
    for (const auto& g : groups) {
      for (const auto& c : g.combinations) {
        for (int k = 0; k < opt.mean_trials_per_combination; ++k) {
          TrialRecord r;
          r.trial_id = std::string(prefix) + "-" + detail::padded(++next, 5);
          r.task = Task::MeanJudgment;
          r.shape_ids = c.shape_ids;
          r.n = c.n;
          r.correct = mean_rng.bernoulli(mean_observer.combination_probability(c.shape_ids));
          r.group_id = std::string(prefix) + "g" + detail::padded(g.group_id + 1, 2);
          r.participant_id = r.group_id + "-p" + detail::padded(k + 1, 2);
          r.origin = c.origin_tag();
          fx.mean_trials.push_back(std::move(r));
        }
      }
    }
  };
  emit_groups(g1, "e1");
  emit_groups(g2, "e2");
  return fx;
}

inline std::string trials_to_text(std::span<const TrialRecord> records, bool with_origin) {
  std::ostringstream out;
  write_trials(out, records, with_origin);
  return out.str();
}

// ---------------------------------------------------------------------------
// Five-shape pool

/// Hand-set Global and Low accuracies for ten pairs of five shapes; the
/// best pair is f_circle/o_plus at 0.95.
inline ModelMatrices small_pool_matrices() {
  ModelMatrices m;
  m.universe = {"f_circle", "f_star5", "o_plus", "u_square", "u_triangle_up"};
  const struct {
    const char* a;
    const char* b;
    long correct;
    long appear;
  } rows[] = {
      {"f_circle", "f_star5", 14, 20},  {"f_circle", "o_plus", 19, 20},       {"f_circle", "u_square", 16, 20},
      {"f_circle", "u_triangle_up", 17, 20}, {"f_star5", "o_plus", 12, 20},   {"f_star5", "u_square", 15, 20},
      {"f_star5", "u_triangle_up", 13, 20},  {"o_plus", "u_square", 18, 20}, {"o_plus", "u_triangle_up", 11, 20},
      {"u_square", "u_triangle_up", 10, 20},
  };
  for (const auto& r : rows) {
    m.band(Band::Low).set(r.a, r.b, {r.correct, r.appear});
    m.band(Band::Global).set(r.a, r.b, {r.correct, r.appear});
  }
  return m;
}

inline Catalog small_pool_catalog(const Catalog& study) {
  std::vector<ShapeDef> shapes;
  for (const auto& id : small_pool_matrices().universe) {
    ShapeDef s = study.at(id);
    s.sources.clear();
    shapes.push_back(std::move(s));
  }
  return Catalog::build(std::move(shapes), {}, CatalogRules::relaxed());
}

}  // namespace shapepal
