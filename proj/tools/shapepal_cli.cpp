// shapepal: command-line front end. Exit 0 on success, 1 with a JSON error
// on stderr when an operation fails, 2 on usage errors.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shapepal/shapepal.hpp"

namespace {

using namespace shapepal;
using nlohmann::ordered_json;

struct Paths {
  std::string catalog = SHAPEPAL_DATA_DIR "/catalog.json";
  std::string matrices = SHAPEPAL_DATA_DIR "/fixtures/study_matrices.json";
  bool relaxed = false;
};

Catalog open_catalog(const Paths& p) {
  return load_catalog(p.catalog, p.relaxed ? CatalogRules::relaxed() : CatalogRules::strict());
}

Engine open_engine(const Paths& p) {
  ServiceConfig c;
  c.catalog_path = p.catalog;
  c.matrices_path = p.matrices;
  c.relaxed_catalog = p.relaxed;
  return Engine::load(c);
}

/// Writes `text` to `out`, or stdout when `out` is empty.
void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text_file(out, text);
  }
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

TrialStore load_trials(const std::vector<std::string>& files) {
  TrialStore store;
  for (const auto& f : files) {
    const auto file = ingest_trials_file(f);
    for (const auto& r : file.records()) store.add(r);
  }
  return store;
}

/// Splits the previews out of a handler response into SVG files under `dir`.
std::string with_previews_written(ordered_json response, const std::string& dir) {
  if (dir.empty()) return response.dump(2) + "\n";
  ensure_dir(dir);
  for (const char* kind : {"mean", "correlation"}) {
    const std::string path = dir + "/preview_" + kind + ".svg";
    write_text_file(path, response["previews"][kind].get<std::string>());
    response["previews"][kind] = path;
  }
  const std::string text = response.dump(2) + "\n";
  write_text_file(dir + "/response.json", text);
  return text;
}

void add_paths(CLI::App* sub, Paths& p, bool with_matrices) {
  sub->add_option("--catalog", p.catalog, "catalog file")->capture_default_str();
  if (with_matrices) sub->add_option("--matrices", p.matrices, "matrix export file")->capture_default_str();
  sub->add_flag("--relaxed-catalog", p.relaxed, "accept catalogs without the 39-shape study layout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape palette engine for multiclass scatterplots"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  Paths paths;
  std::string out;
  std::uint64_t seed = 0;

  // catalog
  auto* cat_cmd = app.add_subcommand("catalog", "print the shape catalog");
  add_paths(cat_cmd, paths, false);
  std::string type_filter;
  bool subset_only = false;
  cat_cmd->add_option("--type", type_filter, "only shapes of this type")->check(CLI::IsMember({"filled", "unfilled", "open"}));
  cat_cmd->add_flag("--subset", subset_only, "only the type-study subset");
  cat_cmd->add_option("--out", out, "output file");

  // score
  auto* score_cmd = app.add_subcommand("score", "score one palette");
  add_paths(score_cmd, paths, true);
  std::vector<std::string> shapes;
  int n = 0;
  score_cmd->add_option("--shapes", shapes, "shape ids")->delimiter(',')->required();
  score_cmd->add_option("--n", n, "category count")->check(CLI::Range(2, 10))->required();
  score_cmd->add_option("--out", out, "output file");

  // recommend
  auto* rec_cmd = app.add_subcommand("recommend", "search for the best palette");
  add_paths(rec_cmd, paths, true);
  std::vector<std::string> seeds;
  long budget_ms = kDefaultBudgetMs;
  long iterations = 0;
  rec_cmd->add_option("--seeds", seeds, "seed shape ids")->delimiter(',');
  rec_cmd->add_option("--n", n, "category count")->check(CLI::Range(2, 10))->required();
  rec_cmd->add_option("--budget-ms", budget_ms, "wall-clock budget")->check(CLI::PositiveNumber)->capture_default_str();
  rec_cmd->add_option("--iterations", iterations, "candidate budget (deterministic)")->check(CLI::PositiveNumber);
  rec_cmd->add_option("--seed", seed, "random seed");
  rec_cmd->add_option("--out", out, "directory for response.json and preview SVGs");

  // swap
  auto* swap_cmd = app.add_subcommand("swap", "replace rejected shapes");
  add_paths(swap_cmd, paths, true);
  std::vector<std::string> rejected;
  swap_cmd->add_option("--shapes", shapes, "current palette")->delimiter(',')->required();
  swap_cmd->add_option("--reject", rejected, "shapes to replace")->delimiter(',');
  swap_cmd->add_option("--n", n, "category count")->check(CLI::Range(2, 10))->required();
  swap_cmd->add_option("--budget-ms", budget_ms, "wall-clock budget")->check(CLI::PositiveNumber)->capture_default_str();
  swap_cmd->add_option("--iterations", iterations, "candidate budget (deterministic)")->check(CLI::PositiveNumber);
  swap_cmd->add_option("--seed", seed, "random seed");
  swap_cmd->add_option("--out", out, "directory for response.json and preview SVGs");

  // gen-stimuli
  auto* gen_cmd = app.add_subcommand("gen-stimuli", "generate stimulus SVGs and a manifest");
  add_paths(gen_cmd, paths, false);
  std::string task_name = "mean";
  std::string plan_path;
  int count = 1;
  double sigma = 0.0;
  gen_cmd->add_option("--task", task_name, "mean or correlation")->check(CLI::IsMember({"mean", "correlation"}));
  auto* shapes_opt = gen_cmd->add_option("--shapes", shapes, "palette in category order")->delimiter(',');
  auto* plan_opt = gen_cmd->add_option("--plan", plan_path, "plan manifest; one stimulus per combination");
  shapes_opt->excludes(plan_opt);
  gen_cmd->add_option("--count", count, "stimuli per palette")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--sigma", sigma, "per-category standard deviation")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", seed, "master seed");
  gen_cmd->add_option("--out", out, "output directory")->required();

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "generate an experiment plan");
  add_paths(plan_cmd, paths, false);
  std::string kind = "progressive";
  std::string policy_name = "none";
  int per_n = 90;
  int checks = 0;
  plan_cmd->add_option("--kind", kind, "plan kind")
      ->check(CLI::IsMember({"type-groups", "palettes", "progressive", "random"}))
      ->capture_default_str();
  plan_cmd->add_option("--per-n", per_n, "combinations per n (progressive, random)")->check(CLI::PositiveNumber);
  plan_cmd->add_option("--groups", policy_name, "task-group policy")
      ->check(CLI::IsMember({"none", "experiment1", "experiment2", "experiment2_relaxed", "experiment4"}));
  plan_cmd->add_option("--checks", checks, "engagement checks per group")->check(CLI::NonNegativeNumber);
  plan_cmd->add_option("--check-task", task_name, "task of the engagement checks")->check(CLI::IsMember({"mean", "correlation"}));
  plan_cmd->add_option("--seed", seed, "master seed");
  plan_cmd->add_option("--out", out, "output file");

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "validate trial files");
  std::vector<std::string> trial_files;
  ingest_cmd->add_option("trials", trial_files, "trial files")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--out", out, "write the merged, validated trials here");

  // matrices
  auto* mat_cmd = app.add_subcommand("matrices", "compute the pairwise model");
  add_paths(mat_cmd, paths, false);
  mat_cmd->add_option("trials", trial_files, "trial files")->required()->check(CLI::ExistingFile);
  mat_cmd->add_option("--out", out, "matrix export file");

  // validate
  auto* val_cmd = app.add_subcommand("validate", "rank validation of the model against accuracy");
  add_paths(val_cmd, paths, true);
  std::string truth_path;
  int per_combination = 200;
  val_cmd->add_option("--plan", plan_path, "plan manifest")->required()->check(CLI::ExistingFile);
  val_cmd->add_option("--truth", truth_path, "observed trials; simulated from the matrices when absent")
      ->check(CLI::ExistingFile);
  val_cmd->add_option("--per-combination", per_combination, "simulated trials per combination")->check(CLI::PositiveNumber);
  val_cmd->add_option("--seed", seed, "simulation seed");
  val_cmd->add_option("--out", out, "validation curve CSV");

  // summarize
  auto* sum_cmd = app.add_subcommand("summarize", "accuracy summary table");
  std::string by = "n";
  std::string task_filter;
  sum_cmd->add_option("trials", trial_files, "trial files")->required()->check(CLI::ExistingFile);
  sum_cmd->add_option("--by", by, "grouping key")->check(CLI::IsMember({"type_group", "palette", "band", "n", "pair"}));
  sum_cmd->add_option("--task", task_filter, "only this task")->check(CLI::IsMember({"mean", "correlation"}));
  sum_cmd->add_option("--out", out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*cat_cmd) {
      const auto catalog = open_catalog(paths);
      if (type_filter.empty() && !subset_only) {
        emit(out, serialize_catalog(catalog));
      } else {
        std::vector<ShapeDef> list = catalog.experiment_subset();
        if (!subset_only) list.assign(catalog.shapes().begin(), catalog.shapes().end());
        if (!type_filter.empty()) list = shapes_by_type(list, parse_shape_type(type_filter));
        auto arr = ordered_json::array();
        for (const auto& s : list) arr.push_back({{"id", s.id}, {"name", s.name}, {"type", to_string(s.type)}});
        emit(out, arr.dump(2) + "\n");
      }
    } else if (*score_cmd) {
      const auto engine = open_engine(paths);
      emit(out, handle_score(engine, {{"shapes", shapes}, {"n", n}}).dump(2) + "\n");
    } else if (*rec_cmd || *swap_cmd) {
      const auto engine = open_engine(paths);
      nlohmann::json body = {{"n", n}, {"rng_seed", seed}};
      if (iterations > 0) {
        body["budget_iterations"] = iterations;
      } else {
        body["budget_ms"] = budget_ms;
      }
      ordered_json response;
      if (*rec_cmd) {
        body["seeds"] = seeds;
        response = handle_recommend(engine, body);
      } else {
        body["shapes"] = shapes;
        body["rejected"] = rejected;
        response = handle_swap(engine, body);
      }
      std::cout << with_previews_written(std::move(response), out);
    } else if (*gen_cmd) {
      const auto catalog = open_catalog(paths);
      const Task task = parse_task(task_name);
      std::vector<std::vector<std::string>> palettes;
      if (!plan_path.empty()) {
        for (const auto& c : parse_plan(read_text_file(plan_path))) palettes.push_back(c.shape_ids);
      } else if (!shapes.empty()) {
        palettes.push_back(shapes);
      } else {
        throw ValidationError("gen-stimuli needs --shapes or --plan");
      }
      ensure_dir(out);
      std::string manifest;
      std::uint64_t index = 0;
      for (const auto& ids : palettes) {
        check_distinct_ids(ids, &catalog);
        const Palette palette{ids, static_cast<int>(ids.size())};
        auto params = task == Task::MeanJudgment ? StimulusParams::mean_task(palette.n)
                                                 : StimulusParams::correlation_task(palette.n);
        if (sigma > 0.0) params.sigma = sigma;
        for (int k = 0; k < count; ++k, ++index) {
          const auto stimulus = gen_stimulus(palette, params, derive_seed(seed, index));
          char name[64];
          std::snprintf(name, sizeof name, "stimulus_%05llu.svg", static_cast<unsigned long long>(index + 1));
          write_text_file(out + "/" + name, render_svg(stimulus, catalog));
          manifest += stimulus_manifest_record(stimulus, name).dump() + "\n";
        }
      }
      write_text_file(out + "/manifest.jsonl", manifest);
      std::cout << "{\"stimuli\":" << index << ",\"manifest\":\"" << out << "/manifest.jsonl\"}\n";
    } else if (*plan_cmd) {
      const auto catalog = open_catalog(paths);
      std::vector<Combination> plan;
      std::optional<CoverageLedger> ledger;
      ProgressiveOptions popt;
      popt.per_n = per_n;
      if (kind == "type-groups") {
        plan = plan_type_groups(catalog, derive_seed(seed, 1));
      } else if (kind == "palettes") {
        plan = plan_palette_trials(catalog, derive_seed(seed, 1));
      } else {
        auto p = kind == "progressive" ? plan_progressive(catalog.ids(), popt, derive_seed(seed, 1))
                                       : plan_random(catalog.ids(), popt, derive_seed(seed, 1));
        plan = std::move(p.combinations);
        ledger = std::move(p.ledger);
      }
      if (!ledger) {
        std::vector<std::string> used;
        for (const auto& c : plan) used.insert(used.end(), c.shape_ids.begin(), c.shape_ids.end());
        std::sort(used.begin(), used.end());
        used.erase(std::unique(used.begin(), used.end()), used.end());
        ledger.emplace(used);
        for (const auto& c : plan) ledger->record(c.shape_ids);
      }
      std::vector<TaskGroup> groups;
      if (policy_name != "none") {
        const GroupPolicy policy = policy_name == "experiment1"   ? GroupPolicy::experiment1()
                                   : policy_name == "experiment2" ? GroupPolicy::experiment2()
                                   : policy_name == "experiment4" ? GroupPolicy::experiment4()
                                                                  : GroupPolicy::experiment2_relaxed();
        groups = assign_task_groups(plan, policy, derive_seed(seed, 2));
      }
      auto doc = ordered_json::parse(plan_manifest(kind, plan, seed, groups, &*ledger));
      if (checks > 0) {
        auto arr = ordered_json::array();
        const std::size_t group_count = std::max<std::size_t>(1, groups.size());
        for (std::size_t g = 0; g < group_count; ++g) {
          const int formal = groups.empty() ? static_cast<int>(plan.size()) : static_cast<int>(groups[g].members.size());
          for (const auto& c : engagement_checks(parse_task(task_name), checks, derive_seed(seed, 100 + g), formal)) {
            arr.push_back({{"group_id", g},
                           {"position", c.position},
                           {"shapes", c.palette.shape_ids},
                           {"seed", c.seed},
                           {"params", params_to_json(c.params)}});
          }
        }
        doc["engagement_checks"] = arr;
      }
      emit(out, doc.dump(1) + "\n");
    } else if (*ingest_cmd) {
      const auto store = load_trials(trial_files);
      bool with_origin = false;
      for (const auto& r : store.records()) with_origin = with_origin || !r.origin.empty();
      if (!out.empty()) write_text_file(out, trials_to_text(store.records(), with_origin));
      std::cout << ordered_json{{"trials", store.size()},
                                {"correlation", store.count(Task::CorrelationJudgment)},
                                {"mean", store.count(Task::MeanJudgment)}}
                       .dump()
                << "\n";
    } else if (*mat_cmd) {
      const auto catalog = open_catalog(paths);
      emit(out, export_matrices(compute_matrices(load_trials(trial_files), catalog.ids())));
    } else if (*val_cmd) {
      const auto engine = open_engine(paths);
      const auto plan = parse_plan(read_text_file(plan_path));
      CombinationTruth truth;
      if (!truth_path.empty()) {
        const auto observed = ingest_trials_file(truth_path);
        truth = truth_from_trials(observed.records());
      } else {
        const auto observer = SyntheticObserver::from_matrices(engine.matrices);
        truth = truth_from_trials(simulate_trials(observer, plan, per_combination, seed));
      }
      const auto v = cross_validate(engine.matrices, plan, truth);
      if (!out.empty()) write_text_file(out, validation_curve_table(v));
      std::cout << ordered_json{{"r", v.r}, {"ranks", v.curve.size()}, {"category_numbers", v.ranked.size()}}.dump()
                << "\n";
    } else if (*sum_cmd) {
      const auto store = load_trials(trial_files);
      const GroupBy key = parse_group_by(by);
      std::optional<Task> task;
      if (!task_filter.empty()) task = parse_task(task_filter);
      const auto rows = accuracy_summary(store, key, task);
      emit(out, summary_table(rows, key));
    }
  } catch (const FieldError& e) {
    std::cerr << error_body(to_string(e.kind()), e.what(), e.field()).dump() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << error_body(to_string(e.kind()), e.what()).dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << error_body("internal_error", e.what()).dump() << "\n";
    return 1;
  }
  return 0;
}
