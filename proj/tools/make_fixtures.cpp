// Regenerates the shipped synthetic study fixtures. Output is byte-stable
// for a given catalog and seed.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "shapepal/shapepal.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Regenerate the synthetic study fixtures"};
  std::string catalog_path = SHAPEPAL_DATA_DIR "/catalog.json";
  std::string out_dir = SHAPEPAL_DATA_DIR "/fixtures";
  app.add_option("--catalog", catalog_path, "catalog file");
  app.add_option("--out", out_dir, "output directory");
  CLI11_PARSE(app, argc, argv);

  using namespace shapepal;
  try {
    const auto catalog = load_catalog(catalog_path);
    const FixtureOptions opt;
    const auto fx = generate_study_fixture(catalog, opt);
    write_text_file(out_dir + "/study_correlation_trials.csv", trials_to_text(fx.correlation_trials, false));
    write_text_file(out_dir + "/study_mean_trials.csv", trials_to_text(fx.mean_trials, true));

    TrialStore store(fx.correlation_trials);
    for (const auto& r : fx.mean_trials) store.add(r);
    write_text_file(out_dir + "/study_matrices.json", export_matrices(compute_matrices(store, catalog.ids())));

    CoverageLedger ledger(catalog.ids());
    for (const auto& c : fx.correlation_plan) ledger.record(c.shape_ids);
    write_text_file(out_dir + "/study_plan.json",
                    plan_manifest("progressive", fx.correlation_plan, opt.master_seed, fx.correlation_groups, &ledger));

    write_text_file(out_dir + "/pool5_catalog.json", serialize_catalog(small_pool_catalog(catalog)));
    write_text_file(out_dir + "/pool5_matrices.json", export_matrices(small_pool_matrices()));
    std::cout << "wrote fixtures to " << out_dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
