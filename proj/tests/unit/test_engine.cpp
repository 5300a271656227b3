#include <gtest/gtest.h>

#include <chrono>
#include <set>

#include "support.hpp"

using namespace shapepal;
using testing_support::hashed_matrices;
using testing_support::study_catalog;
using testing_support::study_matrices;

namespace {

std::set<std::string> as_set(const Palette& p) { return {p.shape_ids.begin(), p.shape_ids.end()}; }

/// Reference ordering: score every n-subset independently and sort by the
/// documented keys.
std::vector<std::string> brute_force_best(const ModelMatrices& m, const std::vector<std::string>& pool, int n,
                                          const std::vector<std::string>& must = {},
                                          const std::vector<std::string>& banned = {}) {
  std::vector<Palette> all;
  const auto k = pool.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    if (std::popcount(mask) != n) continue;
    Palette p{{}, n};
    for (std::size_t i = 0; i < k; ++i) {
      if ((mask >> i) & 1U) p.shape_ids.push_back(pool[i]);
    }
    const auto s = as_set(p);
    bool ok = true;
    for (const auto& id : must) ok = ok && s.count(id);
    for (const auto& id : banned) ok = ok && !s.count(id);
    if (ok) all.push_back(p);
  }
  const auto ranked = rank_palettes(m, all, n);
  auto ids = ranked.front().palette.shape_ids;
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

PaletteScore fake(std::vector<std::string> ids, double band, double global, double tie) {
  PaletteScore s;
  s.palette = {std::move(ids), 2};
  s.band_score = band;
  s.global_score = global;
  s.tiebreak_score = tie;
  return s;
}

}  // namespace

TEST(ScorePalette, SinglePairEqualsPairAccuracy) {
  const auto s = score_palette(study_matrices(), {{"f_plus", "u_star6"}, 2}, 2);
  EXPECT_EQ(s.band_score, 0.80);
  EXPECT_EQ(s.evaluated_pairs, 1);
}

TEST(ScorePalette, ThreeShapeMean) {
  // Pool fixture: f_circle/f_star5 14/20, f_circle/o_plus 19/20, f_star5/o_plus 12/20.
  const auto m = small_pool_matrices();
  const auto s = score_palette(m, {{"o_plus", "f_circle", "f_star5"}, 3}, 3);
  EXPECT_NEAR(s.band_score, (0.70 + 0.95 + 0.60) / 3.0, 1e-15);
  EXPECT_NEAR(s.global_score, 0.75, 1e-15);
  EXPECT_EQ(s.evaluated_pairs, 3);
  EXPECT_EQ(s.tiebreak_pairs, 0);
}

TEST(ScorePalette, Contracts) {
  const auto m = small_pool_matrices();
  EXPECT_THROW(score_palette(m, {{"o_plus", "f_circle", "f_star5", "u_square"}, 3}, 3), ContractError);
  EXPECT_THROW(score_palette(m, {{"o_plus", "nope"}, 2}, 2), DomainError);
  EXPECT_THROW(score_palette(m, {{"o_plus", "o_plus"}, 2}, 2), DomainError);
}

TEST(ScorePalette, ScoresStayInUnitInterval) {
  const auto& m = study_matrices();
  const auto ids = study_catalog().ids();
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    auto v = ids;
    rng.shuffle(std::span<std::string>(v));
    const int n = 2 + static_cast<int>(rng.below(9));
    v.resize(static_cast<std::size_t>(n));
    const auto s = score_palette(m, {v, n}, n);
    for (double x : {s.band_score, s.global_score, s.tiebreak_score}) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
    EXPECT_EQ(s.evaluated_pairs, n * (n - 1) / 2);
  }
}

TEST(RankPalettes, Singleton) {
  const auto r = rank_palettes(small_pool_matrices(), std::vector<Palette>{{{"f_circle", "o_plus"}, 2}}, 2);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].palette.shape_ids, (std::vector<std::string>{"f_circle", "o_plus"}));
}

TEST(RankPalettes, Dominance) {
  const auto r = rank_scores({fake({"a", "b"}, 0.5, 0.9, 0.3), fake({"c", "d"}, 0.9, 0.1, 0.3)});
  EXPECT_EQ(r[0].band_score, 0.9);
}

TEST(RankPalettes, GlobalBreaksBandTies) {
  const auto r = rank_scores({fake({"a", "b"}, 0.5, 0.4, 0.0), fake({"c", "d"}, 0.5, 0.6, 0.0)});
  EXPECT_EQ(r[0].palette.shape_ids[0], "c");
}

TEST(RankPalettes, TiebreakReordersOnlyTheTopTen) {
  std::vector<PaletteScore> in;
  for (int i = 0; i < 12; ++i) {
    in.push_back(fake({"s" + std::to_string(10 + i), "t"}, 0.9 - 0.01 * i, 0.5, i == 11 ? 1.0 : 0.1 * i));
  }
  const auto r = rank_scores(in);
  // Inside the top ten the sparse score decides: index 9 (0.9) leads.
  EXPECT_EQ(r[0].palette.shape_ids[0], "s19");
  EXPECT_EQ(r[9].palette.shape_ids[0], "s10");
  // Rank 12 keeps its place despite the highest sparse score.
  EXPECT_EQ(r[11].palette.shape_ids[0], "s21");
}

TEST(RankPalettes, IdOrderBreaksRemainingTies) {
  const auto r = rank_scores({fake({"z", "b"}, 0.5, 0.5, 0.5), fake({"c", "a"}, 0.5, 0.5, 0.5)});
  EXPECT_EQ(r[0].palette.shape_ids, (std::vector<std::string>{"c", "a"}));
}

TEST(RankPalettes, OutputIsPermutation) {
  const auto m = hashed_matrices({"a", "b", "c", "d", "e", "f"}, 2);
  std::vector<Palette> in;
  for (auto ids : std::vector<std::vector<std::string>>{{"a", "b", "c"}, {"d", "e", "f"}, {"a", "c", "e"}, {"b", "d", "f"}}) {
    in.push_back({ids, 3});
  }
  const auto r = rank_palettes(m, in, 3);
  ASSERT_EQ(r.size(), in.size());
  std::multiset<std::set<std::string>> a, b;
  for (const auto& p : in) a.insert(as_set(p));
  for (const auto& s : r) b.insert(as_set(s.palette));
  EXPECT_EQ(a, b);
}

TEST(RankPalettes, MixedSizesRejected) {
  const auto m = small_pool_matrices();
  std::vector<Palette> in = {{{"f_circle", "o_plus"}, 2}, {{"f_circle", "o_plus", "f_star5"}, 3}};
  EXPECT_THROW(rank_palettes(m, in, 2), ContractError);
}

TEST(Search, FullyConstrainedReturnsSeeds) {
  SearchRequest req;
  const auto ids = study_catalog().ids();
  req.seeds.assign(ids.begin() + 5, ids.begin() + 15);
  req.n = 10;
  req.budget = Budget::iterations(100);
  const auto r = search(study_matrices(), study_catalog(), req);
  EXPECT_EQ(r.best.palette.shape_ids, req.seeds);
  EXPECT_EQ(r.best.band_score, score_palette(study_matrices(), {req.seeds, 10}, 10).band_score);
}

TEST(Search, PoolOfFiveFindsBestPair) {
  const auto m = small_pool_matrices();
  SearchRequest req;
  req.n = 2;
  req.budget = Budget::iterations(1000);
  const auto r = search_pool(m, m.universe, req);
  EXPECT_TRUE(r.exhausted);
  EXPECT_EQ(r.evaluated, 10u);
  EXPECT_EQ(sorted(r.best.palette.shape_ids), brute_force_best(m, m.universe, 2));
  EXPECT_EQ(sorted(r.best.palette.shape_ids), (std::vector<std::string>{"f_circle", "o_plus"}));
}

TEST(Search, ExhaustiveSmallPoolsMatchBruteForce) {
  for (std::size_t k = 4; k <= 8; ++k) {
    std::vector<std::string> pool;
    for (std::size_t i = 0; i < k; ++i) pool.push_back("p" + std::to_string(i));
    const auto m = hashed_matrices(pool, k);
    for (int n = 2; n <= static_cast<int>(k); ++n) {
      SearchRequest req;
      req.n = n;
      req.budget = Budget::iterations(1'000'000);
      req.rng_seed = k * 31 + n;
      const auto r = search_pool(m, pool, req);
      EXPECT_TRUE(r.exhausted);
      EXPECT_EQ(sorted(r.best.palette.shape_ids), brute_force_best(m, pool, n)) << "k=" << k << " n=" << n;
    }
  }
}

TEST(Search, SeedsAreContainedAndIdsDistinct) {
  const auto& cat = study_catalog();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SearchRequest req;
    req.seeds = {"f_circle", "o_plus", "u_square"};
    req.n = 3 + static_cast<int>(seed % 8);
    req.budget = Budget::iterations(200);
    req.rng_seed = seed;
    std::size_t seen = 0;
    const auto r = search(study_matrices(), cat, req, [&](const PaletteScore& s) {
      ++seen;
      for (const auto& id : req.seeds) {
        ASSERT_NE(std::find(s.palette.shape_ids.begin(), s.palette.shape_ids.end(), id), s.palette.shape_ids.end());
      }
    });
    EXPECT_EQ(seen, r.evaluated);
    EXPECT_EQ(as_set(r.best.palette).size(), static_cast<std::size_t>(req.n));
    EXPECT_TRUE(std::equal(req.seeds.begin(), req.seeds.end(), r.best.palette.shape_ids.begin()));
  }
}

TEST(Search, ReturnsBestOfEvaluated) {
  SearchRequest req;
  req.n = 6;
  req.budget = Budget::iterations(3000);
  req.rng_seed = 77;
  std::vector<PaletteScore> log;
  const auto r = search(study_matrices(), study_catalog(), req, [&](const PaletteScore& s) { log.push_back(s); });
  ASSERT_EQ(log.size(), 3000u);
  std::set<std::set<std::string>> distinct;
  for (const auto& s : log) distinct.insert(as_set(s.palette));
  EXPECT_EQ(distinct.size(), log.size());
  const auto ranked = rank_scores(log);
  EXPECT_EQ(as_set(ranked.front().palette), as_set(r.best.palette));
  const auto rescored = score_palette(study_matrices(), r.best.palette, 6);
  EXPECT_EQ(rescored.band_score, r.best.band_score);
  EXPECT_EQ(rescored.global_score, r.best.global_score);
  EXPECT_EQ(rescored.tiebreak_score, r.best.tiebreak_score);
}

TEST(Search, DeterministicInIterationMode) {
  SearchRequest req;
  req.seeds = {"f_star5"};
  req.n = 8;
  req.budget = Budget::iterations(500);
  req.rng_seed = 123;
  const auto a = search(study_matrices(), study_catalog(), req);
  const auto b = search(study_matrices(), study_catalog(), req);
  EXPECT_EQ(a.best.palette.shape_ids, b.best.palette.shape_ids);
  EXPECT_EQ(a.best.band_score, b.best.band_score);
}

TEST(Search, MoreSeedsThanNPicksSubsetOfSeeds) {
  const auto ids = study_catalog().ids();
  SearchRequest req;
  req.seeds.assign(ids.begin(), ids.begin() + 12);
  req.n = 10;
  req.budget = Budget::iterations(100'000);
  const auto r = search(study_matrices(), study_catalog(), req, [&](const PaletteScore& s) {
    for (const auto& id : s.palette.shape_ids) {
      ASSERT_NE(std::find(req.seeds.begin(), req.seeds.end(), id), req.seeds.end());
    }
  });
  EXPECT_TRUE(r.exhausted);
  EXPECT_EQ(r.evaluated, 66u);  // C(12, 10)
  EXPECT_EQ(sorted(r.best.palette.shape_ids), brute_force_best(study_matrices(), req.seeds, 10));
}

TEST(Search, Errors) {
  SearchRequest req;
  req.n = 3;
  req.budget = Budget::iterations(10);
  req.seeds = {"nope"};
  EXPECT_THROW(search(study_matrices(), study_catalog(), req), DomainError);
  req.seeds = {};
  req.n = 11;
  EXPECT_THROW(search(study_matrices(), study_catalog(), req), DomainError);
  req.n = 3;
  req.budget = Budget::iterations(0);
  EXPECT_THROW(search(study_matrices(), study_catalog(), req), DomainError);
  std::vector<std::string> forty;
  for (int i = 0; i < 40; ++i) forty.push_back("x" + std::to_string(i));
  req.budget = Budget::iterations(10);
  req.seeds = forty;
  EXPECT_THROW(search(study_matrices(), study_catalog(), req), DomainError);
}

TEST(Search, WallClockBudgetRespected) {
  SearchRequest req;
  req.n = 10;
  req.budget = Budget::millis(150);
  const auto& m = study_matrices();
  const auto start = std::chrono::steady_clock::now();
  const auto r = search(m, study_catalog(), req);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  EXPECT_GT(r.evaluated, 0u);
  EXPECT_LT(ms, 150.0 + 100.0);
  EXPECT_FALSE(r.exhausted);
}

TEST(Swap, EmptyRejectionIsNoOp) {
  const Palette current{{"f_circle", "o_plus", "u_square"}, 3};
  const auto r = swap(study_matrices(), study_catalog(), current, {}, 3, Budget::iterations(10), 1);
  EXPECT_EQ(r.best.palette.shape_ids, current.shape_ids);
}

TEST(Swap, ReplacesWithBestPartner) {
  // Three-shape pool: keep f_circle, reject f_star5; o_plus is the only fill.
  ModelMatrices m = small_pool_matrices();
  std::vector<ShapeDef> shapes;
  for (const auto& id : {"f_circle", "f_star5", "o_plus"}) shapes.push_back(study_catalog().at(id));
  for (auto& s : shapes) s.sources.clear();
  const auto pool3 = Catalog::build(shapes, {}, CatalogRules::relaxed());
  const auto r = swap(m, pool3, {{"f_circle", "f_star5"}, 2}, std::vector<std::string>{"f_star5"}, 2,
                      Budget::iterations(100), 5);
  EXPECT_EQ(r.best.palette.shape_ids, (std::vector<std::string>{"f_circle", "o_plus"}));

  // Five-shape pool: the best partner of u_square is o_plus (18/20).
  const auto pool5 = small_pool_catalog(study_catalog());
  const auto r5 = swap(m, pool5, {{"f_star5", "u_square"}, 2}, std::vector<std::string>{"f_star5"}, 2,
                       Budget::iterations(100), 5);
  EXPECT_EQ(r5.best.palette.shape_ids, (std::vector<std::string>{"o_plus", "u_square"}));
  EXPECT_EQ(sorted(r5.best.palette.shape_ids), brute_force_best(m, {"f_circle", "o_plus", "u_square", "u_triangle_up"}, 2,
                                                                 {"u_square"}));
}

TEST(Swap, KeepsSlotsAndExcludesRejected) {
  const Palette current{{"f_circle", "o_plus", "u_square", "f_star5", "u_hexagon", "o_line"}, 6};
  const std::vector<std::string> rejected = {"o_plus", "u_hexagon"};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = swap(study_matrices(), study_catalog(), current, rejected, 6, Budget::iterations(300), seed);
    const auto& out = r.best.palette.shape_ids;
    ASSERT_EQ(out.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
      const bool was_rejected = std::find(rejected.begin(), rejected.end(), current.shape_ids[i]) != rejected.end();
      if (was_rejected) {
        EXPECT_EQ(std::find(current.shape_ids.begin(), current.shape_ids.end(), out[i]), current.shape_ids.end());
      } else {
        EXPECT_EQ(out[i], current.shape_ids[i]);
      }
    }
    EXPECT_EQ(as_set(r.best.palette).size(), 6u);
  }
}

TEST(Swap, Errors) {
  const Palette current{{"f_circle", "o_plus"}, 2};
  EXPECT_THROW(swap(study_matrices(), study_catalog(), current, std::vector<std::string>{"u_square"}, 2,
                    Budget::iterations(10), 0),
               ContractError);
  EXPECT_THROW(swap(study_matrices(), study_catalog(), current, {}, 3, Budget::iterations(10), 0), ContractError);
  const auto pool5 = small_pool_catalog(study_catalog());
  const Palette all5{small_pool_matrices().universe, 5};
  EXPECT_THROW(swap(small_pool_matrices(), pool5, all5, std::vector<std::string>{"o_plus"}, 5, Budget::iterations(10), 0),
               InfeasibleError);
}

TEST(PaletteExchange, RoundTrip) {
  const auto s = score_palette(study_matrices(), {{"f_plus", "u_star6", "o_line"}, 3}, 3);
  const auto j = palette_score_to_json(s);
  EXPECT_EQ(j["scores"]["band"].get<double>(), s.band_score);
  const auto p = palette_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(p.shape_ids, s.palette.shape_ids);
  EXPECT_EQ(p.n, 3);
  EXPECT_THROW(palette_from_json(nlohmann::json::parse("{\"n\":2}")), ParseError);
}
