#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "shapepal/shapepal.hpp"

namespace testing_support {

inline const std::string kDataDir = SHAPEPAL_DATA_DIR;

inline const shapepal::Catalog& study_catalog() {
  static const auto c = shapepal::load_catalog(kDataDir + "/catalog.json");
  return c;
}

inline const shapepal::TrialStore& study_trials() {
  static const auto store = [] {
    auto s = shapepal::ingest_trials_file(kDataDir + "/fixtures/study_correlation_trials.csv");
    const auto mean = shapepal::ingest_trials_file(kDataDir + "/fixtures/study_mean_trials.csv");
    for (const auto& r : mean.records()) s.add(r);
    return s;
  }();
  return store;
}

inline const shapepal::ModelMatrices& study_matrices() {
  static const auto m = shapepal::compute_matrices(study_trials(), study_catalog().ids());
  return m;
}

/// (task, band, a, b) -> (correct, appear), counted with a plain double loop.
using NaiveCounts = std::map<std::tuple<std::string, std::string, std::string, std::string>, std::pair<long, long>>;

inline NaiveCounts naive_pair_counts(const std::vector<shapepal::TrialRecord>& trials) {
  NaiveCounts out;
  for (const auto& t : trials) {
    for (std::size_t i = 0; i < t.shape_ids.size(); ++i) {
      for (std::size_t j = 0; j < t.shape_ids.size(); ++j) {
        if (!(t.shape_ids[i] < t.shape_ids[j])) continue;
        std::vector<std::string> bands = {"global"};
        if (t.task == shapepal::Task::CorrelationJudgment) {
          bands.push_back(t.n <= 4 ? "low" : t.n <= 7 ? "mid" : "high");
        }
        for (const auto& b : bands) {
          auto& c = out[{t.task == shapepal::Task::CorrelationJudgment ? "correlation" : "mean", b, t.shape_ids[i],
                         t.shape_ids[j]}];
          c.first += t.correct ? 1 : 0;
          c.second += 1;
        }
      }
    }
  }
  return out;
}

inline NaiveCounts flatten(const shapepal::ModelMatrices& m) {
  NaiveCounts out;
  auto add = [&](const shapepal::PairwiseMatrix& mat) {
    for (const auto& [key, c] : mat.entries()) {
      out[{std::string(shapepal::to_string(mat.task())), std::string(shapepal::to_string(mat.band())), key.first,
           key.second}] = {c.correct, c.appear};
    }
  };
  for (const auto& mat : m.banded) add(mat);
  add(m.sparse_mean);
  return out;
}

/// Random valid trials over `pool`.
inline std::vector<shapepal::TrialRecord> random_trials(const std::vector<std::string>& pool, std::size_t count,
                                                        std::uint64_t seed, bool mixed_tasks = true) {
  shapepal::Rng rng(seed);
  std::vector<shapepal::TrialRecord> out;
  for (std::size_t t = 0; t < count; ++t) {
    shapepal::TrialRecord r;
    r.trial_id = "r" + std::to_string(t);
    r.task = mixed_tasks && rng.bernoulli(0.3) ? shapepal::Task::MeanJudgment : shapepal::Task::CorrelationJudgment;
    r.n = 2 + static_cast<int>(rng.below(std::min<std::size_t>(9, pool.size() - 1)));
    std::vector<std::string> ids = pool;
    rng.shuffle(std::span<std::string>(ids));
    ids.resize(static_cast<std::size_t>(r.n));
    r.shape_ids = ids;
    r.correct = rng.bernoulli(0.6);
    r.participant_id = "p" + std::to_string(rng.below(20));
    r.group_id = "g" + std::to_string(rng.below(5));
    out.push_back(std::move(r));
  }
  return out;
}

/// Model with every pair of `pool` set from a hash of the pair, so scores
/// are distinct with probability ~1.
inline shapepal::ModelMatrices hashed_matrices(const std::vector<std::string>& pool, std::uint64_t seed) {
  shapepal::ModelMatrices m;
  m.universe = pool;
  std::sort(m.universe.begin(), m.universe.end());
  shapepal::Rng rng(seed);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      for (auto b : shapepal::kAllBands) {
        const long appear = 40;
        m.band(b).set(pool[i], pool[j], {static_cast<long>(rng.below(41)), appear});
      }
      m.sparse_mean.set(pool[i], pool[j], {static_cast<long>(rng.below(11)), 10});
    }
  }
  return m;
}

}  // namespace testing_support
