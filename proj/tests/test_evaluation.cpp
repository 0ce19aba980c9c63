/*
 * Copyright (c) 2026 The artemis-head Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "artemis/error.hpp"
#include "artemis/evaluation.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace artemis;

namespace {

template <typename Fn>
bool throws_code(ErrorCode code, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

FeatureBank random_bank(const std::vector<std::string>& ids, std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<float> normal;
  std::vector<float> data(ids.size() * dim);
  for (float& v : data) v = normal(rng);
  return FeatureBank(dim, ids, data);
}

// Normalized row computed here from the raw floats.
oracle::Vec unit_row(const FeatureBank& bank, std::size_t i) {
  const auto raw = bank.row(i);
  oracle::Vec v(raw.begin(), raw.end());
  const double n = std::sqrt(static_cast<double>(oracle::dot(v, v)));
  for (double& x : v) x /= n;
  return v;
}

QuerySpec query(const std::string& ref, const std::string& mod, std::vector<std::string> gt) {
  QuerySpec q;
  q.ref_id = ref;
  q.mod_id = mod;
  q.ground_truth = std::move(gt);
  return q;
}

Gallery ids_only_gallery(std::size_t n) {
  std::vector<std::string> ids = numbered("id", n);
  return make_gallery(FeatureBank(1, ids, std::vector<float>(n, 1.0f)));
}

struct Fixture {
  std::mt19937_64 rng{11};
  std::size_t dim = 8;
  FeatureBank images;
  FeatureBank modifiers;
  Gallery gallery;
  std::vector<QuerySpec> queries;
  HeadParams params;

  Fixture(std::size_t n_queries, std::size_t n_images, std::size_t d = 8) : dim(d) {
    images = random_bank(numbered("img", n_images), dim, rng);
    modifiers = random_bank(numbered("mod", n_queries), dim, rng);
    gallery = make_gallery(images);
    std::uniform_int_distribution<std::size_t> pick(0, n_images - 1);
    for (std::size_t q = 0; q < n_queries; ++q) {
      queries.push_back(query(images.ids()[pick(rng)], modifiers.ids()[q], {images.ids()[pick(rng)]}));
    }
    params = oracle::random_head(HeadDims{dim, dim, dim}, rng);
  }
};

}  // namespace

TEST_CASE("score_matrix: reference column scores one under image_only") {
  Fixture f(5, 12);
  const ScoreMatrix m = score_matrix(f.queries, f.images, f.modifiers, f.gallery, f.params,
                                     Flavor::kImageOnly);
  for (std::size_t q = 0; q < f.queries.size(); ++q) {
    CHECK(m.row(q)[f.gallery.index_of(f.queries[q].ref_id)] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("score_matrix matches per-pair scoring for every flavor") {
  Fixture f(3, 4);
  for (Flavor flavor : kAllFlavors) {
    const ScoreMatrix m = score_matrix(f.queries, f.images, f.modifiers, f.gallery, f.params, flavor);
    REQUIRE(m.queries == 3);
    REQUIRE(m.candidates == 4);
    for (std::size_t q = 0; q < 3; ++q) {
      const oracle::Vec r = unit_row(f.images, f.images.index_of(f.queries[q].ref_id));
      const oracle::Vec mod = unit_row(f.modifiers, f.modifiers.index_of(f.queries[q].mod_id));
      for (std::size_t c = 0; c < 4; ++c) {
        const oracle::Vec t = unit_row(f.images, f.images.index_of(f.gallery.ids[c]));
        CHECK(std::abs(m.row(q)[c] - oracle::score(r, mod, t, f.params, flavor)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("score_matrix is independent of the thread count") {
  Fixture f(37, 101);
  for (Flavor flavor : {Flavor::kLateFusion, Flavor::kArtemis}) {
    const ScoreMatrix one = score_matrix(f.queries, f.images, f.modifiers, f.gallery, f.params, flavor, 1);
    for (std::size_t threads : {2u, 3u, 8u}) {
      const ScoreMatrix many =
          score_matrix(f.queries, f.images, f.modifiers, f.gallery, f.params, flavor, threads);
      CHECK(many.values == one.values);
    }
  }
}

TEST_CASE("score_matrix rejects unknown ids") {
  Fixture f(2, 5);
  f.queries[1].mod_id = "missing";
  CHECK(throws_code(ErrorCode::kUnknownId, [&] {
    score_matrix(f.queries, f.images, f.modifiers, f.gallery, f.params, Flavor::kArtemis);
  }));
}

TEST_CASE("rank_targets examples") {
  const Gallery g = ids_only_gallery(3);
  const std::vector<double> row{0.9, 0.1, 0.5};
  const RankResult r = rank_targets(row, g, query("x", "m", {"id0"}));
  CHECK(r.rank == 1);
  CHECK(r.order == std::vector<std::size_t>{0, 2, 1});

  const std::vector<double> flat{0.3, 0.3, 0.3};
  CHECK(rank_targets(flat, g, query("x", "m", {"id2"})).rank == 3);
  CHECK(best_rank(flat, g, query("x", "m", {"id2"})) == 3);

  // Best ground truth wins.
  CHECK(rank_targets(row, g, query("x", "m", {"id1", "id2"})).rank == 2);

  // Excluding the reference drops it from the ranking.
  QuerySpec ex = query("id0", "m", {"id2"});
  ex.exclude_ref = true;
  CHECK(rank_targets(row, g, ex).rank == 1);
  CHECK(best_rank(row, g, ex) == 1);
  ex.exclude_ref = false;
  CHECK(rank_targets(row, g, ex).rank == 2);
}

TEST_CASE("rank matches a brute-force count on a 100-gallery") {
  std::mt19937_64 rng(5);
  const Gallery g = ids_only_gallery(100);
  std::uniform_int_distribution<int> coarse(0, 9);  // coarse values force ties
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> row(100);
    for (double& v : row) v = coarse(rng) / 10.0;
    const std::size_t target = rng() % 100;
    const QuerySpec q = query("none", "m", {g.ids[target]});
    const std::size_t want = oracle::brute_rank(row, g.ids, target);
    CHECK(rank_targets(row, g, q).rank == want);
    CHECK(best_rank(row, g, q) == want);
  }
}

TEST_CASE("ranking is invariant to strictly increasing transforms") {
  std::mt19937_64 rng(6);
  const Gallery g = ids_only_gallery(60);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> row(60);
    for (double& v : row) v = u(rng);
    row[3] = row[7];  // one tie
    std::vector<double> scaled(row), shifted(row);
    for (double& v : scaled) v *= 4.0;
    for (double& v : shifted) v = std::exp(v);
    const QuerySpec q = query("none", "m", {g.ids[rng() % 60]});
    const RankResult base = rank_targets(row, g, q);
    CHECK(rank_targets(scaled, g, q).order == base.order);
    CHECK(rank_targets(shifted, g, q).order == base.order);
    CHECK(rank_targets(shifted, g, q).rank == base.rank);
  }
}

TEST_CASE("recall_at_k examples and errors") {
  const std::vector<std::size_t> ranks{1, 5, 12, 60};
  CHECK(recall_at_k(ranks, 10) == 50.0);
  CHECK(recall_at_k(ranks, 50) == 75.0);
  CHECK(recall_at_k(ranks, 60) == 100.0);
  CHECK(recall_at_k(ranks, 1000) == 100.0);
  CHECK(throws_code(ErrorCode::kEmptyInput, [] { recall_at_k({}, 10); }));
}

TEST_CASE("recall is monotone in K and bounded") {
  std::mt19937_64 rng(8);
  std::vector<std::size_t> ranks(200);
  for (auto& r : ranks) r = 1 + rng() % 300;
  double last = 0.0;
  for (std::size_t k = 1; k <= 300; ++k) {
    const double r = recall_at_k(ranks, k);
    CHECK(r >= last);
    CHECK(r <= 100.0);
    last = r;
  }
  CHECK(last == 100.0);
}

TEST_CASE("median_rank examples") {
  CHECK(median_rank(std::vector<std::size_t>{1, 2, 3}) == 2.0);
  CHECK(median_rank(std::vector<std::size_t>{1, 5, 12, 60}) == 8.5);
  CHECK(median_rank(std::vector<std::size_t>{60, 1, 12, 5}) == 8.5);
  CHECK(median_rank(std::vector<std::size_t>{7}) == 7.0);
  CHECK(throws_code(ErrorCode::kEmptyInput, [] { median_rank({}); }));
}

TEST_CASE("subset recall examples") {
  const Gallery g = ids_only_gallery(10);
  std::vector<std::string> members{"id4", "id1", "id2", "id3", "id5", "id6"};
  std::vector<QuerySpec> qs{query("id9", "m", {"id4"})};
  qs[0].subset_members = members;
  ScoreMatrix m;
  m.queries = 1;
  m.candidates = 10;
  m.values = {0.0, 0.2, 0.3, 0.1, 0.5, 0.0, 0.4, 0.0, 0.9, 0.9};
  CHECK(subset_rank(m.row(0), g, qs[0]) == 1);
  for (std::size_t k : {1u, 2u, 3u}) CHECK(recall_subset_at_k(qs, m, g, k) == 100.0);
  CHECK(best_rank(m.row(0), g, qs[0]) == 3);

  qs[0].subset_members.reset();
  CHECK(throws_code(ErrorCode::kMissingSubset, [&] { recall_subset_at_k(qs, m, g, 1); }));
}

TEST_CASE("subset recall null model: size 6, K=3 gives about 50%") {
  const std::size_t trials = 10000;
  const Gallery g = ids_only_gallery(6);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ScoreMatrix m;
  m.queries = trials;
  m.candidates = 6;
  m.values.resize(trials * 6);
  for (double& v : m.values) v = u(rng);
  std::vector<QuerySpec> qs;
  for (std::size_t i = 0; i < trials; ++i) {
    QuerySpec q = query("none", "m", {g.ids[i % 6]});
    q.subset_members = g.ids;
    qs.push_back(std::move(q));
  }
  const double r = recall_subset_at_k(qs, m, g, 3);
  CHECK(std::abs(r - 50.0) <= 5.0);
}

TEST_CASE("subset ranks never exceed full-gallery ranks") {
  std::mt19937_64 rng(3);
  const Gallery g = ids_only_gallery(80);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> row(80);
    for (double& v : row) v = u(rng);
    std::vector<std::string> pool = g.ids;
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(6);
    QuerySpec q = query("none", "m", {pool[rng() % 6]});
    q.subset_members = pool;
    CHECK(subset_rank(row, g, q) <= best_rank(row, g, q));
  }
}

TEST_CASE("aggregate_suite reproduces published aggregates") {
  const MetricTable fiq{{"dress", {{"R@10", 27.16}, {"R@50", 52.40}}},
                        {"shirt", {{"R@10", 21.78}, {"R@50", 43.64}}},
                        {"toptee", {{"R@10", 29.20}, {"R@50", 54.83}}}};
  const MetricReport a = aggregate_suite(fiq, Convention::kFashionIq);
  CHECK(a.headline == "CM");
  CHECK(round_half_up(a.aggregates.at("CM")) == doctest::Approx(38.17).epsilon(1e-12));
  CHECK(round_half_up(a.aggregates.at("R@10")) == doctest::Approx(26.05).epsilon(1e-12));
  CHECK(round_half_up(a.aggregates.at("R@50")) == doctest::Approx(50.29).epsilon(1e-12));

  const MetricTable shoes{{"shoes", {{"R@1", 18.72}, {"R@10", 53.11}, {"R@50", 79.31}}}};
  CHECK(round_half_up(aggregate_suite(shoes, Convention::kShoes).aggregates.at("average")) ==
        doctest::Approx(50.38).epsilon(1e-12));

  const MetricTable cirr{{"cirr", {{"R@5", 46.10}, {"R_subset@1", 39.99}}}};
  const MetricReport c = aggregate_suite(cirr, Convention::kCirr);
  CHECK(round_half_up(c.aggregates.at("combined")) == doctest::Approx(43.05).epsilon(1e-12));
  CHECK(report_json(c).find("43.05") != std::string::npos);
}

TEST_CASE("aggregate_suite errors") {
  const MetricTable two{{"dress", {{"R@10", 1.0}, {"R@50", 2.0}}},
                        {"shirt", {{"R@10", 1.0}, {"R@50", 2.0}}}};
  CHECK(throws_code(ErrorCode::kMissingCell, [&] { aggregate_suite(two, Convention::kFashionIq); }));
  const MetricTable no_r50{{"shoes", {{"R@1", 1.0}, {"R@10", 2.0}}}};
  CHECK(throws_code(ErrorCode::kMissingCell, [&] { aggregate_suite(no_r50, Convention::kShoes); }));
  const MetricTable no_subset{{"cirr", {{"R@5", 1.0}}}};
  CHECK(throws_code(ErrorCode::kMissingCell, [&] { aggregate_suite(no_subset, Convention::kCirr); }));
}

TEST_CASE("fashioniq aggregate is invariant to permuting categories") {
  const std::vector<std::pair<double, double>> cells{{27.16, 52.40}, {21.78, 43.64}, {29.20, 54.83}};
  std::vector<int> perm{0, 1, 2};
  const char* names[] = {"dress", "shirt", "toptee"};
  std::vector<double> seen;
  do {
    MetricTable t;
    for (int i = 0; i < 3; ++i) {
      t[names[i]] = {{"R@10", cells[perm[i]].first}, {"R@50", cells[perm[i]].second}};
    }
    seen.push_back(round_half_up(aggregate_suite(t, Convention::kFashionIq).aggregates.at("CM")));
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (double v : seen) CHECK(v == seen.front());
}

TEST_CASE("round_half_up") {
  CHECK(round_half_up(43.045) == doctest::Approx(43.05).epsilon(1e-12));
  CHECK(round_half_up(38.165) == doctest::Approx(38.17).epsilon(1e-12));
  CHECK(round_half_up(1.004) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(round_half_up(2.5, 0) == 3.0);
}

TEST_CASE("evaluation output is byte-identical across thread counts and query order") {
  Fixture f(40, 90);
  for (QuerySpec& q : f.queries) {
    std::vector<std::string> pool{q.ground_truth.front()};
    for (std::size_t k = 0; pool.size() < 6; ++k) {
      if (f.gallery.ids[k] != pool.front()) pool.push_back(f.gallery.ids[k]);
    }
    q.subset_members = pool;
  }
  auto report = [&](const std::vector<QuerySpec>& qs, std::size_t threads) {
    const ScoreMatrix m =
        score_matrix(qs, f.images, f.modifiers, f.gallery, f.params, Flavor::kArtemis, threads);
    const MetricRow row = evaluate_ranks(qs, m, f.gallery);
    return report_json(aggregate_suite({{"synthetic", row}}, Convention::kCirr));
  };
  const std::string base = report(f.queries, 1);
  CHECK(report(f.queries, 4) == base);
  std::vector<QuerySpec> reversed(f.queries.rbegin(), f.queries.rend());
  CHECK(report(reversed, 3) == base);

  const ScoreMatrix m = score_matrix(f.queries, f.images, f.modifiers, f.gallery, f.params,
                                     Flavor::kArtemis, 2);
  const std::string dump = ranking_dump(f.queries, m, f.gallery, 5);
  CHECK(std::count(dump.begin(), dump.end(), '\n') == 40);
}
