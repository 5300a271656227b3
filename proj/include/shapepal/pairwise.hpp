#pragma once

// Pairwise shape-difference model. Every trial credits each unordered shape
// pair it showed: appear += 1, correct += (answered correctly). A pair's
// accuracy is correct / appear. Correlation trials fill one matrix per
// category band plus a Global one; mean-judgment trials fill a single sparse
// Global matrix used only for tie-breaking.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "shapepal/catalog.hpp"
#include "shapepal/error.hpp"
#include "shapepal/trials.hpp"

namespace shapepal {

enum class Band { Low, Mid, High, Global };

inline constexpr std::array<Band, 4> kAllBands = {Band::Low, Band::Mid, Band::High, Band::Global};

inline std::string_view to_string(Band b) {
  switch (b) {
    case Band::Low: return "low";
    case Band::Mid: return "mid";
    case Band::High: return "high";
    case Band::Global: return "global";
  }
  return "?";
}

inline Band parse_band(std::string_view s) {
  if (s == "low") return Band::Low;
  if (s == "mid") return Band::Mid;
  if (s == "high") return Band::High;
  if (s == "global") return Band::Global;
  throw ParseError("unknown band '" + std::string(s) + "'");
}

/// 2-4 -> Low, 5-7 -> Mid, 8-10 -> High.
inline Band band_for(int n) {
  check_category_count(n);
  if (n <= 4) return Band::Low;
  if (n <= 7) return Band::Mid;
  return Band::High;
}

struct PairCounts {
  long correct = 0;
  long appear = 0;

  double accuracy() const { return static_cast<double>(correct) / static_cast<double>(appear); }
  friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

using PairKey = std::pair<std::string, std::string>;

inline PairKey make_pair_key(std::string_view a, std::string_view b) {
  return a < b ? PairKey{std::string(a), std::string(b)} : PairKey{std::string(b), std::string(a)};
}

class PairwiseMatrix {
 public:
  PairwiseMatrix() = default;
  PairwiseMatrix(Task task, Band band) : task_(task), band_(band) {}

  Task task() const { return task_; }
  Band band() const { return band_; }

  void add(std::string_view a, std::string_view b, bool correct) {
    if (a == b) throw DomainError("pair needs two distinct shapes, got '" + std::string(a) + "' twice");
    auto& c = entries_[make_pair_key(a, b)];
    ++c.appear;
    if (correct) ++c.correct;
  }

  void set(std::string_view a, std::string_view b, PairCounts counts) {
    if (a == b) throw DomainError("pair needs two distinct shapes");
    if (counts.correct < 0 || counts.appear < 0 || counts.correct > counts.appear) {
      throw ValidationError("pair " + std::string(a) + "/" + std::string(b) + " has inconsistent counts");
    }
    entries_[make_pair_key(a, b)] = counts;
  }

  const PairCounts* find(std::string_view a, std::string_view b) const {
    auto it = entries_.find(make_pair_key(a, b));
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::optional<double> accuracy(std::string_view a, std::string_view b) const {
    const PairCounts* c = find(a, b);
    if (c == nullptr || c->appear == 0) return std::nullopt;
    return c->accuracy();
  }

  /// Unweighted mean of per-pair accuracy over observed pairs.
  std::optional<double> mean_accuracy() const {
    double sum = 0.0;
    long count = 0;
    for (const auto& [key, c] : entries_) {
      if (c.appear > 0) {
        sum += c.accuracy();
        ++count;
      }
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
  }

  const std::map<PairKey, PairCounts>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  friend bool operator==(const PairwiseMatrix&, const PairwiseMatrix&) = default;

 private:
  Task task_ = Task::CorrelationJudgment;
  Band band_ = Band::Global;
  std::map<PairKey, PairCounts> entries_;
};

/// The full model: correlation matrices per band plus Global, and the sparse
/// mean-judgment Global matrix. `universe` lists every id pair_score accepts.
struct ModelMatrices {
  std::array<PairwiseMatrix, 4> banded = {
      PairwiseMatrix(Task::CorrelationJudgment, Band::Low),
      PairwiseMatrix(Task::CorrelationJudgment, Band::Mid),
      PairwiseMatrix(Task::CorrelationJudgment, Band::High),
      PairwiseMatrix(Task::CorrelationJudgment, Band::Global)};
  PairwiseMatrix sparse_mean{Task::MeanJudgment, Band::Global};
  std::vector<std::string> universe;  // sorted

  const PairwiseMatrix& band(Band b) const { return banded[static_cast<std::size_t>(b)]; }
  PairwiseMatrix& band(Band b) { return banded[static_cast<std::size_t>(b)]; }

  bool knows(std::string_view id) const {
    return std::binary_search(universe.begin(), universe.end(), id);
  }

  friend bool operator==(const ModelMatrices&, const ModelMatrices&) = default;
};

/// Accumulates one trial into the model matrices.
inline void accumulate_trial(ModelMatrices& m, const TrialRecord& r) {
  const auto& ids = r.shape_ids;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      if (r.task == Task::CorrelationJudgment) {
        m.band(band_for(r.n)).add(ids[i], ids[j], r.correct);
        m.band(Band::Global).add(ids[i], ids[j], r.correct);
      } else {
        m.sparse_mean.add(ids[i], ids[j], r.correct);
      }
    }
  }
}

/// Builds the model from a trial store. When `universe` is empty it is the
/// set of ids seen in the store.
inline ModelMatrices compute_matrices(const TrialStore& store, std::vector<std::string> universe = {}) {
  ModelMatrices m;
  if (universe.empty()) {
    for (const auto& r : store.records()) {
      universe.insert(universe.end(), r.shape_ids.begin(), r.shape_ids.end());
    }
  }
  std::sort(universe.begin(), universe.end());
  universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
  m.universe = std::move(universe);
  for (const auto& r : store.records()) {
    for (const auto& id : r.shape_ids) {
      if (!m.knows(id)) throw DomainError("trial " + r.trial_id + " uses unknown shape '" + id + "'");
    }
    accumulate_trial(m, r);
  }
  return m;
}

/// Accuracy used when nothing was observed at all.
inline constexpr double kUninformedAccuracy = 0.5;

/// Pair accuracy at `band`, falling back to Global, then to the band's mean
/// over observed pairs (Global mean if the band is empty).
inline double pair_score(const ModelMatrices& m, std::string_view a, std::string_view b, Band band) {
  if (a == b) throw DomainError("pair_score needs two distinct shapes, got '" + std::string(a) + "' twice");
  if (!m.knows(a)) throw DomainError("unknown shape id '" + std::string(a) + "'");
  if (!m.knows(b)) throw DomainError("unknown shape id '" + std::string(b) + "'");
  if (auto v = m.band(band).accuracy(a, b)) return *v;
  if (band != Band::Global) {
    if (auto v = m.band(Band::Global).accuracy(a, b)) return *v;
  }
  if (auto v = m.band(band).mean_accuracy()) return *v;
  if (auto v = m.band(Band::Global).mean_accuracy()) return *v;
  return kUninformedAccuracy;
}

// ---------------------------------------------------------------------------
// Matrix export: (a, b, correct, appear) rows sorted lexicographically, each
// symmetric pair stored once with a < b.

inline nlohmann::ordered_json matrix_to_json(const PairwiseMatrix& mat) {
  nlohmann::ordered_json j;
  j["task"] = to_string(mat.task());
  j["band"] = to_string(mat.band());
  auto rows = nlohmann::ordered_json::array();
  for (const auto& [key, c] : mat.entries()) {
    rows.push_back({key.first, key.second, c.correct, c.appear});
  }
  j["entries"] = rows;
  return j;
}

inline std::string export_matrices(const ModelMatrices& m) {
  nlohmann::ordered_json doc;
  doc["format"] = "shapepal-matrices";
  doc["version"] = 1;
  doc["universe"] = m.universe;
  auto mats = nlohmann::ordered_json::array();
  for (const auto& mat : m.banded) mats.push_back(matrix_to_json(mat));
  mats.push_back(matrix_to_json(m.sparse_mean));
  doc["matrices"] = mats;
  return doc.dump(1) + "\n";
}

inline ModelMatrices import_matrices(std::string_view text) {
  ModelMatrices m;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.value("format", "") != "shapepal-matrices") throw ParseError("not a shapepal matrix file");
    m.universe = doc.at("universe").get<std::vector<std::string>>();
    std::sort(m.universe.begin(), m.universe.end());
    for (const auto& mj : doc.at("matrices")) {
      const Task task = parse_task(mj.at("task").get<std::string>());
      const Band band = parse_band(mj.at("band").get<std::string>());
      if (task == Task::MeanJudgment && band != Band::Global) {
        throw ParseError("mean-judgment matrices are Global only");
      }
      PairwiseMatrix& target = task == Task::MeanJudgment ? m.sparse_mean : m.band(band);
      for (const auto& row : mj.at("entries")) {
        const auto a = row.at(0).get<std::string>();
        const auto b = row.at(1).get<std::string>();
        if (!(a < b)) throw ParseError("matrix rows must satisfy a < b (" + a + ", " + b + ")");
        if (!m.knows(a) || !m.knows(b)) throw ValidationError("matrix row uses an id outside the universe");
        target.set(a, b, {row.at(2).get<long>(), row.at(3).get<long>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed matrix file: ") + e.what());
  }
  return m;
}

}  // namespace shapepal
