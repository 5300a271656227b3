#pragma once

// Trial records and their delimiter-separated file format:
//
//   trial_id,task,shapes,n,correct,participant_id,group_id[,origin]
//
// `shapes` is a ';'-joined id list, `task` is `mean` or `correlation`,
// `correct` is 0/1. The trailing `origin` column is optional and carries
// the plan origin label (e.g. `type:filled+open`, `palette:D3`).

#include <cstddef>
#include <istream>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "shapepal/catalog.hpp"
#include "shapepal/error.hpp"

namespace shapepal {

enum class Task { MeanJudgment, CorrelationJudgment };

inline std::string_view to_string(Task t) {
  return t == Task::MeanJudgment ? "mean" : "correlation";
}

inline Task parse_task(std::string_view s) {
  if (s == "mean" || s == "mean_judgment") return Task::MeanJudgment;
  if (s == "correlation" || s == "correlation_judgment") return Task::CorrelationJudgment;
  throw ParseError("unknown task '" + std::string(s) + "'");
}

struct TrialRecord {
  std::string trial_id;
  Task task = Task::CorrelationJudgment;
  std::vector<std::string> shape_ids;
  int n = 0;
  bool correct = false;
  std::string participant_id;
  std::string group_id;
  std::string origin;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

inline void validate_trial(const TrialRecord& r) {
  check_category_count(r.n);
  if (static_cast<std::size_t>(r.n) != r.shape_ids.size()) {
    throw ValidationError("trial " + r.trial_id + ": n=" + std::to_string(r.n) + " but " +
                          std::to_string(r.shape_ids.size()) + " shapes listed");
  }
  std::set<std::string_view> seen;
  for (const auto& id : r.shape_ids) {
    if (id.empty()) throw ValidationError("trial " + r.trial_id + ": empty shape id");
    if (!seen.insert(id).second) {
      throw ValidationError("trial " + r.trial_id + ": duplicate shape '" + id + "'");
    }
  }
}

class TrialStore {
 public:
  TrialStore() = default;

  explicit TrialStore(std::vector<TrialRecord> records) {
    for (auto& r : records) add(std::move(r));
  }

  void add(TrialRecord r) {
    try {
      validate_trial(r);
    } catch (const DomainError& e) {
      throw ValidationError("trial " + r.trial_id + ": " + e.what());
    }
    records_.push_back(std::move(r));
  }

  std::span<const TrialRecord> records() const& { return records_; }
  std::span<const TrialRecord> records() const&& = delete;
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::size_t count(Task t) const {
    std::size_t c = 0;
    for (const auto& r : records_) c += r.task == t ? 1 : 0;
    return c;
  }

 private:
  std::vector<TrialRecord> records_;
};

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string join(std::span<const std::string> items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

inline int parse_int(const std::string& s, long line, const char* field) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw ParseError(std::string("field '") + field + "' is not an integer: '" + s + "'", line);
  }
  return v;
}

}  // namespace detail

inline constexpr std::string_view kTrialHeader = "trial_id,task,shapes,n,correct,participant_id,group_id";

/// Reads a trial file. Rows are validated as they are read; the first bad
/// row aborts ingestion with its line number.
inline TrialStore ingest_trials(std::istream& in) {
  std::string line;
  long line_no = 0;
  bool has_origin = false;
  if (!std::getline(in, line)) throw ParseError("empty trial file", 1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line == kTrialHeader) {
    has_origin = false;
  } else if (line == std::string(kTrialHeader) + ",origin") {
    has_origin = true;
  } else {
    throw ParseError("unexpected header '" + line + "'", line_no);
  }
  const std::size_t columns = has_origin ? 8 : 7;
  TrialStore store;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split(line, ',');
    if (fields.size() != columns) {
      throw ParseError("expected " + std::to_string(columns) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    TrialRecord r;
    r.trial_id = fields[0];
    try {
      r.task = parse_task(fields[1]);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    r.shape_ids = detail::split(fields[2], ';');
    r.n = detail::parse_int(fields[3], line_no, "n");
    if (fields[4] == "1" || fields[4] == "true") {
      r.correct = true;
    } else if (fields[4] == "0" || fields[4] == "false") {
      r.correct = false;
    } else {
      throw ParseError("field 'correct' must be 0 or 1, got '" + fields[4] + "'", line_no);
    }
    r.participant_id = fields[5];
    r.group_id = fields[6];
    if (has_origin) r.origin = fields[7];
    try {
      store.add(std::move(r));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return store;
}

inline TrialStore ingest_trials_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return ingest_trials(in);
}

inline TrialStore ingest_trials_file(const std::string& path) {
  std::istringstream in(read_text_file(path));
  return ingest_trials(in);
}

inline void write_trials(std::ostream& out, std::span<const TrialRecord> records, bool with_origin = false) {
  out << kTrialHeader << (with_origin ? ",origin" : "") << '\n';
  for (const auto& r : records) {
    out << r.trial_id << ',' << to_string(r.task) << ',' << detail::join(r.shape_ids, ";") << ','
        << r.n << ',' << (r.correct ? 1 : 0) << ',' << r.participant_id << ',' << r.group_id;
    if (with_origin) out << ',' << r.origin;
    out << '\n';
  }
}

}  // namespace shapepal
