// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <regex>
#include <set>
#include <unordered_set>

#include "../unit/support.hpp"

using namespace shapepal;
namespace ts = testing_support;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_s > 0 && secs >= limit_s) {
    o.pass = false;
    o.detail += " (over the " + fmt_fixed(limit_s, 0) + " s limit)";
  }
  if (!o.pass) ++failures;
  std::printf("%s  %d  %-40s %8.3f s  %s\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.detail.c_str());
  std::fflush(stdout);
}

void info(const char* title, const std::string& detail) { std::printf("INFO     %-40s %s\n", title, detail.c_str()); }

// Independent Pearson r: two-pass, long double accumulators.
double pearson_ref(const std::vector<Point>& pts) {
  long double mx = 0, my = 0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= pts.size();
  my /= pts.size();
  long double sxy = 0, sxx = 0, syy = 0;
  for (const auto& p : pts) {
    sxy += (p.x - mx) * (p.y - my);
    sxx += (p.x - mx) * (p.x - mx);
    syy += (p.y - my) * (p.y - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

double mean_y(const std::vector<Point>& pts) {
  long double s = 0;
  for (const auto& p : pts) s += p.y;
  return static_cast<double>(s / pts.size());
}

Palette random_palette(Rng& rng, const std::vector<std::string>& ids, int n) {
  auto v = ids;
  rng.shuffle(std::span<std::string>(v));
  v.resize(static_cast<std::size_t>(n));
  return {v, n};
}

}  // namespace

int main() {
  const auto& catalog = ts::study_catalog();
  const auto ids = catalog.ids();

  criterion(1, "pairwise counting oracle", 1.0, [&] {
    std::vector<std::string> pool;
    for (int i = 0; i < 12; ++i) pool.push_back("shape" + std::to_string(i));
    const auto trials = ts::random_trials(pool, 1000, 20240601);
    const TrialStore store(trials);
    const auto got = ts::flatten(compute_matrices(store, pool));
    const auto want = ts::naive_pair_counts(trials);
    return Outcome{got == want, std::to_string(want.size()) + " (task, band, pair) cells compared"};
  });

  criterion(2, "fixture lookup regression", 0.0, [&] {
    const auto& m = ts::study_matrices();
    const double low = pair_score(m, "f_plus", "u_star6", Band::Low);
    const double mid = pair_score(m, "f_star5", "f_star6", Band::Mid);
    return Outcome{low == 0.80 && mid == 0.46, "Low " + fmt_fixed(low, 17) + ", Mid " + fmt_fixed(mid, 17)};
  });

  criterion(3, "synthetic observer round trip", 10.0, [&] {
    // M: the hand-set five-shape matrix, read at Low (n = 2).
    const auto known = small_pool_matrices();
    std::map<PairKey, double> table;
    std::vector<Combination> plan;
    for (const auto& [key, c] : known.band(Band::Low).entries()) {
      table[key] = c.accuracy();
      plan.push_back({{key.first, key.second}, 2, OriginKind::Random, ""});
    }
    const auto trials = simulate_trials(SyntheticObserver::from_table(table), plan, 500, 77);
    const auto est = compute_matrices(TrialStore(trials), known.universe);
    double worst = 0.0;
    for (const auto& [key, p] : table) {
      worst = std::max(worst, std::abs(*est.band(Band::Low).accuracy(key.first, key.second) - p));
    }
    return Outcome{worst <= 0.05, std::to_string(table.size()) + " entries, max |error| " + fmt_fixed(worst, 4)};
  });
  {
    // Same procedure over every pair of the study model.
    const auto& m = ts::study_matrices();
    std::map<PairKey, double> table;
    std::vector<Combination> plan;
    for (const auto& [key, c] : m.band(Band::Low).entries()) {
      table[key] = c.accuracy();
      plan.push_back({{key.first, key.second}, 2, OriginKind::Random, ""});
    }
    const auto trials = simulate_trials(SyntheticObserver::from_table(table), plan, 500, 78);
    const auto est = compute_matrices(TrialStore(trials), ids);
    int outside = 0;
    double worst = 0.0;
    for (const auto& [key, p] : table) {
      const double d = std::abs(*est.band(Band::Low).accuracy(key.first, key.second) - p);
      worst = std::max(worst, d);
      outside += d > 0.05 ? 1 : 0;
    }
    info("3: same at study scale", std::to_string(table.size()) + " entries, " + std::to_string(outside) +
                                       " beyond 0.05, max |error| " + fmt_fixed(worst, 4));
  }

  criterion(4, "cross-measure validation", 60.0, [&] {
    const auto& m = ts::study_matrices();
    const auto plan = plan_progressive(ids, {}, 404).combinations;
    const auto trials = simulate_trials(SyntheticObserver::from_matrices(m), plan, 200, 405);
    const auto v = cross_validate(m, plan, truth_from_trials(trials));
    return Outcome{std::abs(v.r) >= 0.90, "r = " + fmt_fixed(v.r, 4) + " over " + std::to_string(v.curve.size()) + " ranks"};
  });
  {
    // Truth from the hashed observer that generated the fixture, so model
    // estimation noise is not shared with the truth.
    const auto& m = ts::study_matrices();
    const FixtureOptions fo;
    const auto plan = plan_progressive(ids, {}, 404).combinations;
    const auto trials = simulate_trials(SyntheticObserver::hashed(derive_seed(fo.master_seed, 3)), plan, 200, 405);
    const auto v = cross_validate(m, plan, truth_from_trials(trials));
    info("4: independent-observer variant", "r = " + fmt_fixed(v.r, 4));
  }

  criterion(5, "stimulus constraints", 120.0, [&] {
    Rng rng(5005);
    long violations = 0;
    for (int i = 0; i < 1000; ++i) {
      const int n = 2 + static_cast<int>(rng.below(9));
      const auto s = gen_mean_stimulus(random_palette(rng, ids, n), StimulusParams::mean_task(n), rng.next());
      std::vector<double> means;
      bool ok = s.categories.size() == static_cast<std::size_t>(n);
      for (const auto& c : s.categories) {
        ok = ok && c.size() == 20;
        for (const auto& p : c) ok = ok && p.x >= 0 && p.x <= 1 && p.y >= 0 && p.y <= 1;
        means.push_back(mean_y(c));
      }
      std::sort(means.rbegin(), means.rend());
      const double gap = means[0] - means[1];
      ok = ok && gap >= 0.2 && gap <= 0.25;
      violations += ok ? 0 : 1;
    }
    for (int i = 0; i < 1000; ++i) {
      const int n = 2 + static_cast<int>(rng.below(9));
      const auto s = gen_correlation_stimulus(random_palette(rng, ids, n), StimulusParams::correlation_task(n), rng.next());
      std::vector<double> rs;
      bool ok = s.categories.size() == static_cast<std::size_t>(n);
      for (const auto& c : s.categories) {
        ok = ok && c.size() == 20;
        for (const auto& p : c) ok = ok && p.x >= 0 && p.x <= 1 && p.y >= 0 && p.y <= 1;
        rs.push_back(pearson_ref(c));
      }
      const double target = rs[static_cast<std::size_t>(s.answer)];
      double runner_up = -2.0;
      for (std::size_t c = 0; c < rs.size(); ++c) {
        if (static_cast<int>(c) != s.answer) runner_up = std::max(runner_up, rs[c]);
      }
      ok = ok && target >= 0.8 && target <= 0.95 && target - runner_up >= 0.2;
      violations += ok ? 0 : 1;
    }
    return Outcome{violations == 0, std::to_string(violations) + " violations in 2000 stimuli"};
  });

  criterion(6, "progressive sampler balance", 30.0, [&] {
    ProgressiveOptions opt;
    opt.per_n = 10;
    int wins = 0;
    double sp = 0.0, sr = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const double p = plan_progressive(ids, opt, derive_seed(6006, seed)).ledger.summary().stddev;
      const double r = plan_random(ids, opt, derive_seed(6006, seed)).ledger.summary().stddev;
      wins += p < r ? 1 : 0;
      sp += p;
      sr += r;
    }
    return Outcome{wins >= 19, std::to_string(wins) + "/20 seeds; mean sigma " + fmt_fixed(sp / 20, 3) + " vs " +
                                   fmt_fixed(sr / 20, 3)};
  });

  criterion(7, "plan cardinalities", 0.0, [&] {
    const auto a = plan_type_groups(catalog, 7).size();
    const auto b = plan_palette_trials(catalog, 7).size();
    const auto c = plan_progressive(ids, {}, 7).combinations.size();
    return Outcome{a == 750 && b == 410 && c == 810,
                   std::to_string(a) + " / " + std::to_string(b) + " / " + std::to_string(c)};
  });

  criterion(8, "search contracts", 0.0, [&] {
    // Exhaustive five-shape pool against brute force.
    const auto pool5 = small_pool_matrices();
    std::vector<Palette> all;
    for (std::size_t i = 0; i < pool5.universe.size(); ++i) {
      for (std::size_t j = i + 1; j < pool5.universe.size(); ++j) all.push_back({{pool5.universe[i], pool5.universe[j]}, 2});
    }
    auto brute = rank_palettes(pool5, all, 2).front().palette.shape_ids;
    SearchRequest small;
    small.n = 2;
    small.budget = Budget::iterations(1000);
    auto found = search_pool(pool5, pool5.universe, small).best.palette.shape_ids;
    std::sort(brute.begin(), brute.end());
    std::sort(found.begin(), found.end());
    const bool exhaustive_ok = brute == found;

    // Five seconds of wall clock at n = 10 over the study catalog.
    SearchRequest req;
    req.n = 10;
    req.seeds = {"f_circle", "o_plus", "u_square"};
    req.budget = Budget::millis(5000);
    req.rng_seed = 8008;
    std::unordered_set<std::string> distinct;
    std::vector<PaletteScore> top;  // best ten by the primary key
    bool seeds_everywhere = true;
    const auto result = search(ts::study_matrices(), catalog, req, [&](const PaletteScore& s) {
      distinct.insert(combination_key(s.palette.shape_ids));
      for (const auto& id : req.seeds) {
        seeds_everywhere = seeds_everywhere &&
                           std::find(s.palette.shape_ids.begin(), s.palette.shape_ids.end(), id) != s.palette.shape_ids.end();
      }
      top.push_back(s);
      std::sort(top.begin(), top.end(), detail::primary_before);
      if (top.size() > kTiebreakDepth) top.pop_back();
    });
    const auto leader = rank_scores(top).front();
    const bool maximal = combination_key(leader.palette.shape_ids) == combination_key(result.best.palette.shape_ids);
    const bool ok = exhaustive_ok && distinct.size() >= 100 && distinct.size() == result.evaluated && maximal &&
                    seeds_everywhere;
    return Outcome{ok, std::string("brute force ") + (exhaustive_ok ? "match" : "MISMATCH") + "; " +
                           std::to_string(distinct.size()) + " distinct candidates in 5 s; best " +
                           (maximal ? "maximal" : "NOT maximal") + "; seeds " + (seeds_everywhere ? "contained" : "MISSING")};
  });

  criterion(9, "renderer determinism and layout", 0.0, [&] {
    Rng rng(9009);
    bool identical = true, layout = true;
    for (int i = 0; i < 20; ++i) {
      const int n = 2 + static_cast<int>(rng.below(9));
      const auto p = random_palette(rng, ids, n);
      const auto seed = rng.next();
      const auto a = render_svg(gen_correlation_stimulus(p, StimulusParams::correlation_task(n), seed), catalog);
      const auto b = render_svg(gen_correlation_stimulus(p, StimulusParams::correlation_task(n), seed), catalog);
      identical = identical && a == b;
      const std::regex tick_x(R"(class="tick tick-x")"), tick_y(R"(class="tick tick-y")");
      const auto nx = std::distance(std::sregex_iterator(a.begin(), a.end(), tick_x), std::sregex_iterator());
      const auto ny = std::distance(std::sregex_iterator(a.begin(), a.end(), tick_y), std::sregex_iterator());
      layout = layout && nx == 13 && ny == 13 && a.find(R"(width="400" height="400")") != std::string::npos;
    }
    // Glyph boxes: every shape drawn once, coordinates read back from <defs>.
    Stimulus all;
    all.params = StimulusParams::mean_task(10);
    all.categories.assign(ids.size(), std::vector<Point>{{0.5, 0.5}});
    all.assignment = ids;
    const auto svg = render_svg(all, catalog);
    const auto defs = svg.substr(svg.find("<defs>"), svg.find("</defs>") - svg.find("<defs>"));
    const std::regex group(R"re(<g id="glyph-[a-z0-9_]+"([^>]*)>(.*?)</g>)re");
    const std::regex stroke(R"re(stroke-width="([0-9.]+)")re");
    const std::regex circle(R"re(<circle cx="([-0-9.]+)" cy="([-0-9.]+)" r="([0-9.]+)"/>)re");
    const std::regex number(R"re(-?[0-9]+(\.[0-9]+)?)re");
    const std::regex path(R"re(<path d="([^"]*)"/>)re");
    double widest = 0.0;
    std::size_t glyphs = 0;
    for (std::sregex_iterator g(defs.begin(), defs.end(), group), end; g != end; ++g, ++glyphs) {
      const std::string attrs = (*g)[1], body = (*g)[2];
      std::smatch sw;
      const double half = std::regex_search(attrs, sw, stroke) ? std::stod(sw[1]) / 2.0 : 0.0;
      double reach = 0.0;
      for (std::sregex_iterator c(body.begin(), body.end(), circle); c != end; ++c) {
        const double r = std::stod((*c)[3]);
        reach = std::max({reach, std::abs(std::stod((*c)[1])) + r, std::abs(std::stod((*c)[2])) + r});
      }
      for (std::sregex_iterator p(body.begin(), body.end(), path); p != end; ++p) {
        const std::string d = (*p)[1];
        for (std::sregex_iterator v(d.begin(), d.end(), number); v != end; ++v) reach = std::max(reach, std::abs(std::stod((*v)[0])));
      }
      widest = std::max(widest, 2.0 * (reach + half));
    }
    const bool boxes = glyphs == ids.size() && widest <= 6.0 + 1e-3;
    return Outcome{identical && layout && boxes, std::string(identical ? "byte-identical" : "NOT identical") + "; " +
                                                     (layout ? "400x400, 13+13 ticks" : "layout WRONG") + "; widest glyph " +
                                                     fmt_fixed(widest, 3) + " px over " + std::to_string(glyphs)};
  });

  std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
