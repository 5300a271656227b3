#pragma once

// Descriptive accuracy summaries, rank validation of the model against
// per-combination accuracy, cosine similarity of expert selections, and a
// synthetic observer that turns pair probabilities into trial records.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "shapepal/catalog.hpp"
#include "shapepal/error.hpp"
#include "shapepal/pairwise.hpp"
#include "shapepal/palette_engine.hpp"
#include "shapepal/planner.hpp"
#include "shapepal/rng.hpp"
#include "shapepal/stats.hpp"
#include "shapepal/trials.hpp"

namespace shapepal {

inline constexpr double kZ95 = 1.959963984540054;

// ---------------------------------------------------------------------------
// Accuracy summaries

enum class GroupBy { TypeGroup, Palette, Band, N, Pair };

inline std::string_view to_string(GroupBy g) {
  switch (g) {
    case GroupBy::TypeGroup: return "type_group";
    case GroupBy::Palette: return "palette";
    case GroupBy::Band: return "band";
    case GroupBy::N: return "n";
    case GroupBy::Pair: return "pair";
  }
  return "?";
}

inline GroupBy parse_group_by(std::string_view s) {
  if (s == "type_group") return GroupBy::TypeGroup;
  if (s == "palette") return GroupBy::Palette;
  if (s == "band") return GroupBy::Band;
  if (s == "n") return GroupBy::N;
  if (s == "pair") return GroupBy::Pair;
  throw DomainError("unknown grouping key '" + std::string(s) + "'");
}

struct Proportion {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Normal-approximation 95% interval, clipped to [0, 1].
inline Proportion proportion_ci(long correct, long trials) {
  if (trials <= 0) throw DomainError("proportion needs at least one trial");
  const double p = static_cast<double>(correct) / static_cast<double>(trials);
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  return {p, std::max(0.0, p - half), std::min(1.0, p + half)};
}

struct SummaryRow {
  std::string group;
  long trials = 0;
  long correct = 0;
  Proportion accuracy;
};

namespace detail {

/// Label of an origin tag `kind:label` when the kind matches.
inline std::optional<std::string> origin_label(std::string_view origin, std::string_view kind) {
  const auto colon = origin.find(':');
  if (colon == std::string_view::npos || origin.substr(0, colon) != kind) return std::nullopt;
  return std::string(origin.substr(colon + 1));
}

}  // namespace detail

/// Per-group trial counts and accuracy. type_group and palette use the
/// trial origin column; trials from other origins are not counted there.
/// pair counts every unordered pair a trial showed.
inline std::vector<SummaryRow> accuracy_summary(const TrialStore& store, GroupBy by,
                                                std::optional<Task> task = std::nullopt) {
  if (store.size() == 0) throw DomainError("accuracy summary needs a nonempty store");
  std::map<std::string, std::pair<long, long>> acc;  // group -> (correct, trials)
  std::map<std::string, int> n_order;
  auto credit = [&](const std::string& key, bool correct) {
    auto& [c, t] = acc[key];
    ++t;
    if (correct) ++c;
  };
  for (const auto& r : store.records()) {
    if (task && r.task != *task) continue;
    switch (by) {
      case GroupBy::TypeGroup:
        if (auto l = detail::origin_label(r.origin, "type")) credit(*l, r.correct);
        break;
      case GroupBy::Palette:
        if (auto l = detail::origin_label(r.origin, "palette")) credit(*l, r.correct);
        break;
      case GroupBy::Band: credit(std::string(to_string(band_for(r.n))), r.correct); break;
      case GroupBy::N:
        credit(std::to_string(r.n), r.correct);
        n_order[std::to_string(r.n)] = r.n;
        break;
      case GroupBy::Pair:
        for (std::size_t i = 0; i < r.shape_ids.size(); ++i) {
          for (std::size_t j = i + 1; j < r.shape_ids.size(); ++j) {
            const auto key = make_pair_key(r.shape_ids[i], r.shape_ids[j]);
            credit(key.first + "|" + key.second, r.correct);
          }
        }
        break;
    }
  }
  std::vector<SummaryRow> rows;
  for (const auto& [key, ct] : acc) rows.push_back({key, ct.second, ct.first, proportion_ci(ct.first, ct.second)});
  if (by == GroupBy::N) {
    std::sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) { return n_order[a.group] < n_order[b.group]; });
  } else if (by == GroupBy::Band) {
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return parse_band(a.group) < parse_band(b.group); });
  }
  return rows;
}

inline std::string fmt_fixed(double v, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string summary_table(std::span<const SummaryRow> rows, GroupBy by) {
  std::string out = std::string(to_string(by)) + ",trials,correct,accuracy,ci_low,ci_high\n";
  for (const auto& r : rows) {
    out += r.group + "," + std::to_string(r.trials) + "," + std::to_string(r.correct) + "," +
           fmt_fixed(r.accuracy.estimate) + "," + fmt_fixed(r.accuracy.ci_low) + "," + fmt_fixed(r.accuracy.ci_high) +
           "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic observer

/// Pair probability as a function of the two shapes and the category count.
using PairProbability = std::function<double(std::string_view, std::string_view, int)>;

class SyntheticObserver {
 public:
  explicit SyntheticObserver(PairProbability p) : p_(std::move(p)) {}

  double pair_probability(std::string_view a, std::string_view b, int n) const {
    const double v = p_(a, b, n);
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("observer probability for " + std::string(a) + "/" + std::string(b) + " is undefined");
    }
    return v;
  }

  /// Mean pair probability over the combination's pairs.
  double combination_probability(std::span<const std::string> ids) const {
    const int n = static_cast<int>(ids.size());
    double sum = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        sum += pair_probability(ids[i], ids[j], n);
        ++pairs;
      }
    }
    if (pairs == 0) throw DomainError("combination needs at least two shapes");
    return sum / pairs;
  }

  static SyntheticObserver constant(double p) {
    return SyntheticObserver([p](std::string_view, std::string_view, int) { return p; });
  }

  /// n-independent table; pairs missing from the table are undefined.
  static SyntheticObserver from_table(std::map<PairKey, double> table) {
    return SyntheticObserver([t = std::move(table)](std::string_view a, std::string_view b, int) {
      auto it = t.find(make_pair_key(a, b));
      return it == t.end() ? std::nan("") : it->second;
    });
  }

  /// Probabilities read from model matrices at the band of n.
  static SyntheticObserver from_matrices(ModelMatrices m) {
    return SyntheticObserver([m = std::move(m)](std::string_view a, std::string_view b, int n) {
      return pair_score(m, a, b, band_for(n));
    });
  }

  /// Hash-derived ground truth: each shape has a distinctiveness s, each
  /// pair a residual e, q = 0.6 (s_a + s_b) / 2 + 0.4 e. The base rate falls
  /// linearly from 0.96 at n=2 to 0.40 at n=10 and q shifts it on the logit
  /// scale: p = logistic(logit(base(n)) + 4 (q - 0.5)).
  static SyntheticObserver hashed(std::uint64_t seed) {
    return SyntheticObserver([seed](std::string_view a, std::string_view b, int n) {
      const auto key = make_pair_key(a, b);
      auto unit = [](std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; };
      const double sa = unit(splitmix64(seed ^ fnv1a(key.first)));
      const double sb = unit(splitmix64(seed ^ fnv1a(key.second)));
      const double e = unit(splitmix64(seed ^ fnv1a(key.first + "|" + key.second) ^ 0x9e37U));
      const double q = 0.6 * (sa + sb) / 2.0 + 0.4 * e;
      const double base = 0.96 - 0.07 * (n - 2);
      const double z = std::log(base / (1.0 - base)) + 4.0 * (q - 0.5);
      return 1.0 / (1.0 + std::exp(-z));
    });
  }

 private:
  PairProbability p_;
};

/// per_combination Bernoulli trials per plan entry, in plan order.
inline std::vector<TrialRecord> simulate_trials(const SyntheticObserver& observer, std::span<const Combination> plan,
                                                int per_combination, std::uint64_t rng_seed,
                                                Task task = Task::CorrelationJudgment) {
  if (per_combination < 0) throw DomainError("per_combination must be non-negative");
  Rng rng(rng_seed);
  std::vector<TrialRecord> out;
  out.reserve(plan.size() * static_cast<std::size_t>(per_combination));
  long next_id = 0;
  for (std::size_t c = 0; c < plan.size(); ++c) {
    const auto& combo = plan[c];
    const double p = observer.combination_probability(combo.shape_ids);
    for (int k = 0; k < per_combination; ++k) {
      TrialRecord r;
      r.trial_id = "s" + std::to_string(next_id++);
      r.task = task;
      r.shape_ids = combo.shape_ids;
      r.n = combo.n;
      r.correct = rng.bernoulli(p);
      r.participant_id = "synthetic";
      r.group_id = "c" + std::to_string(c);
      r.origin = combo.label.empty() ? "" : combo.origin_tag();
      out.push_back(std::move(r));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rank validation

/// Order-independent key of a combination: sorted ids joined by ';'.
inline std::string combination_key(std::span<const std::string> ids) {
  std::vector<std::string> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  return detail::join(sorted, ";");
}

using CombinationTruth = std::map<std::string, double>;

struct CurvePoint {
  int rank = 0;
  double mean_accuracy = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct RankValidation {
  std::map<int, std::vector<PaletteScore>> ranked;  // per n, rank 1 first
  std::vector<CurvePoint> curve;
  double r = 0.0;  // Pearson r of rank against mean accuracy
};

/// Ranks each n's combinations with the model, averages truth per rank
/// position across n, and correlates rank with that average.
inline RankValidation cross_validate(const ModelMatrices& m, std::span<const Combination> plan, const CombinationTruth& truth) {
  std::map<int, std::vector<Palette>> by_n;
  std::vector<std::string> missing;
  for (const auto& c : plan) {
    by_n[c.n].push_back({c.shape_ids, c.n});
    if (truth.find(combination_key(c.shape_ids)) == truth.end()) missing.push_back(combination_key(c.shape_ids));
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) list += (i ? ", " : "") + missing[i];
    if (missing.size() > 10) list += ", ...";
    throw ValidationError("truth is missing " + std::to_string(missing.size()) + " combinations: " + list);
  }
  if (by_n.empty()) throw ValidationError("plan is empty");
  const std::size_t k = by_n.begin()->second.size();
  for (const auto& [n, list] : by_n) {
    if (list.size() != k) {
      throw ValidationError("plan has " + std::to_string(list.size()) + " combinations at n=" + std::to_string(n) +
                            ", expected " + std::to_string(k));
    }
  }
  if (k < 2) throw ValidationError("rank validation needs at least two combinations per n");

  RankValidation out;
  std::vector<std::vector<double>> at_rank(k);
  for (const auto& [n, list] : by_n) {
    out.ranked[n] = rank_palettes(m, list, n);
    for (std::size_t i = 0; i < k; ++i) at_rank[i].push_back(truth.at(combination_key(out.ranked[n][i].palette.shape_ids)));
  }
  std::vector<double> ranks, means;
  for (std::size_t i = 0; i < k; ++i) {
    const double mu = mean(at_rank[i]);
    double half = 0.0;
    if (at_rank[i].size() > 1) {
      const double sd = stddev(at_rank[i]) * std::sqrt(static_cast<double>(at_rank[i].size()) / (at_rank[i].size() - 1.0));
      half = kZ95 * sd / std::sqrt(static_cast<double>(at_rank[i].size()));
    }
    out.curve.push_back({static_cast<int>(i + 1), mu, mu - half, mu + half});
    ranks.push_back(static_cast<double>(i + 1));
    means.push_back(mu);
  }
  out.r = pearson(ranks, means);
  return out;
}

/// Observed accuracy per distinct combination.
inline CombinationTruth truth_from_trials(std::span<const TrialRecord> trials) {
  std::map<std::string, std::pair<long, long>> acc;
  for (const auto& r : trials) {
    auto& [c, t] = acc[combination_key(r.shape_ids)];
    ++t;
    if (r.correct) ++c;
  }
  CombinationTruth out;
  for (const auto& [key, ct] : acc) out[key] = static_cast<double>(ct.first) / static_cast<double>(ct.second);
  return out;
}

inline std::string validation_curve_table(const RankValidation& v) {
  std::string out = "rank,mean_accuracy,ci_low,ci_high\n";
  for (const auto& p : v.curve) {
    out += std::to_string(p.rank) + "," + fmt_fixed(p.mean_accuracy) + "," + fmt_fixed(p.ci_low) + "," +
           fmt_fixed(p.ci_high) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Expert selections

inline constexpr int kExpertSelectionSize = 10;

struct SelectionVector {
  std::string expert_id;
  std::vector<int> indicator;
};

/// Indicator over `universe` of the ten chosen shapes.
inline SelectionVector make_selection(std::string expert_id, std::span<const std::string> universe,
                                      std::span<const std::string> chosen) {
  check_distinct_ids(chosen);
  if (chosen.size() != static_cast<std::size_t>(kExpertSelectionSize)) {
    throw ValidationError("selection of " + expert_id + " has " + std::to_string(chosen.size()) + " shapes, expected 10");
  }
  SelectionVector v{std::move(expert_id), std::vector<int>(universe.size(), 0)};
  for (const auto& id : chosen) {
    auto it = std::find(universe.begin(), universe.end(), id);
    if (it == universe.end()) throw DomainError("selected shape '" + id + "' is not in the universe");
    v.indicator[static_cast<std::size_t>(it - universe.begin())] = 1;
  }
  return v;
}

inline std::vector<std::vector<double>> selection_similarity(std::span<const SelectionVector> vectors) {
  const std::size_t k = vectors.size();
  for (const auto& v : vectors) {
    if (v.indicator.size() != vectors.front().indicator.size()) throw DomainError("selection vectors differ in dimension");
  }
  std::vector<double> norms;
  for (const auto& v : vectors) {
    double s = 0.0;
    for (int x : v.indicator) s += static_cast<double>(x) * x;
    if (s == 0.0) throw DomainError("selection of " + v.expert_id + " is empty");
    norms.push_back(std::sqrt(s));
  }
  std::vector<std::vector<double>> sim(k, std::vector<double>(k, 1.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      double dot = 0.0;
      for (std::size_t d = 0; d < vectors[i].indicator.size(); ++d) {
        dot += static_cast<double>(vectors[i].indicator[d]) * vectors[j].indicator[d];
      }
      sim[i][j] = sim[j][i] = dot / (norms[i] * norms[j]);
    }
  }
  return sim;
}

/// Mean over the off-diagonal entries.
inline double mean_similarity(const std::vector<std::vector<double>>& sim) {
  double s = 0.0;
  long c = 0;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    for (std::size_t j = i + 1; j < sim.size(); ++j) {
      s += sim[i][j];
      ++c;
    }
  }
  if (c == 0) throw DomainError("similarity needs at least two selections");
  return s / static_cast<double>(c);
}

}  // namespace shapepal
