#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hyperkge/eval.hpp"
#include "hyperkge/train.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace hyperkge;

namespace {

// distmult, k = 1, relation fixed at 1: the score of (h, r0, t) is
// value(h) * value(t), so candidate ordering is fully scriptable.
EmbeddingTable scripted_table(const std::vector<double>& entity_values) {
  EmbeddingTable table(ModelVariant::kDistMult, entity_values.size(), 1, 1);
  for (std::size_t i = 0; i < entity_values.size(); ++i) {
    table.entity(static_cast<EntityId>(i))[0] = entity_values[i];
  }
  table.relation(0)[0] = 1.0;
  return table;
}

TripleStore single_test_triple(std::size_t num_entities) {
  TripleStore store;
  store.train = {};
  store.valid = {};
  store.test = {{0, 0, 1}};
  store.rebuild_indexes(num_entities, 1);
  return store;
}

// Random store + random table for oracle comparisons. Duplicate entity rows
// force exact score ties.
struct OracleFixture {
  Dataset ds;
  EmbeddingTable table;
};

OracleFixture oracle_fixture(std::uint64_t seed, ModelVariant variant,
                             bool reciprocal) {
  std::mt19937_64 rng(seed);
  Dataset ds;
  const std::size_t n = 20 + rng() % 30;  // <= 50 entities
  const std::size_t m = 2 + rng() % 3;
  for (std::size_t i = 0; i < n; ++i) {
    ds.vocab.add_entity("e" + std::to_string(i));
  }
  for (std::size_t r = 0; r < m; ++r) {
    ds.vocab.add_relation("r" + std::to_string(r));
  }
  std::uniform_int_distribution<EntityId> ent(0, static_cast<EntityId>(n - 1));
  std::uniform_int_distribution<RelationId> rel(0,
                                                static_cast<RelationId>(m - 1));
  const auto draw = [&] { return Triple{ent(rng), rel(rng), ent(rng)}; };
  for (int i = 0; i < 120; ++i) {
    ds.store.train.push_back(draw());
  }
  for (int i = 0; i < 25; ++i) {
    ds.store.valid.push_back(draw());
  }
  for (int i = 0; i < 25; ++i) {
    ds.store.test.push_back(draw());
  }
  ds.store.rebuild_indexes(n, m);
  if (reciprocal) {
    add_reciprocals(ds);
  }

  EmbeddingTable table(variant, n, ds.store.num_relations(), 3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto* data : {&table.entity_data(), &table.relation_data(),
                     &table.tail_relation_data()}) {
    for (double& v : *data) {
      v = dist(rng);
    }
  }
  // Clone a few entity rows to create exact ties.
  for (int i = 0; i < 6; ++i) {
    const EntityId src = ent(rng);
    const EntityId dst = ent(rng);
    for (std::size_t j = 0; j < table.row_size(); ++j) {
      table.entity(dst)[j] = table.entity(src)[j];
    }
  }
  return OracleFixture{std::move(ds), std::move(table)};
}

}  // namespace

TEST_CASE("tiebreak names round trip") {
  for (TieBreak t :
       {TieBreak::kAverage, TieBreak::kOptimistic, TieBreak::kPessimistic}) {
    CHECK(tiebreak_from_name(tiebreak_name(t)) == t);
  }
  CHECK_FALSE(tiebreak_from_name("random").has_value());
}

TEST_CASE("rank counts higher scores and splits ties") {
  // Candidates score h * t with h = 1: truth (entity 1) scores 5,
  // entities 2 and 3 score 7. Entity 0 is the query head.
  const EmbeddingTable table = scripted_table({1.0, 5.0, 7.0, 7.0});
  const TripleStore store = single_test_triple(4);
  EvalOptions options;
  ScoreWorkspace ws;

  SUBCASE("two higher, no tie") {
    options.ties = TieBreak::kAverage;
    CHECK(filtered_rank(table, store, {0, 0, 1}, Direction::kTail, options,
                        ws) == doctest::Approx(3.0));
  }
  SUBCASE("tie conventions differ only on equal scores") {
    const EmbeddingTable tied = scripted_table({1.0, 7.0, 7.0, 7.0});
    options.ties = TieBreak::kOptimistic;
    CHECK(filtered_rank(tied, store, {0, 0, 1}, Direction::kTail, options,
                        ws) == doctest::Approx(1.0));
    options.ties = TieBreak::kAverage;
    CHECK(filtered_rank(tied, store, {0, 0, 1}, Direction::kTail, options,
                        ws) == doctest::Approx(2.0));
    options.ties = TieBreak::kPessimistic;
    CHECK(filtered_rank(tied, store, {0, 0, 1}, Direction::kTail, options,
                        ws) == doctest::Approx(3.0));
  }
}

TEST_CASE("observed triples are filtered out of the candidate list") {
  // Entity 2 outranks the truth but (0, r0, 2) is a train triple, so it is
  // excluded from the tail query of (0, r0, 1).
  const EmbeddingTable table = scripted_table({1.0, 5.0, 7.0, 6.0});
  TripleStore store;
  store.train = {{0, 0, 2}};
  store.test = {{0, 0, 1}};
  store.rebuild_indexes(4, 1);
  EvalOptions options;
  ScoreWorkspace ws;

  // Without filtering both 2 (7.0) and 3 (6.0) would outrank 5.0.
  CHECK(filtered_rank(table, store, {0, 0, 1}, Direction::kTail, options,
                      ws) == doctest::Approx(2.0));

  // The filtered rank never exceeds the raw rank.
  std::vector<EntityId> all = {0, 1, 2, 3};
  const auto scores =
      score_candidates(table, 0, 0, Direction::kTail, all, ws);
  int higher = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i] != 1 && scores[i] > scores[1]) {
      ++higher;
    }
  }
  CHECK(1.0 + higher >= 3.0);  // raw rank is 3
}

TEST_CASE("the true answer survives type constraints") {
  const EmbeddingTable table = scripted_table({1.0, 5.0, 7.0, 6.0});
  TripleStore store;
  store.train = {{0, 0, 2}};
  store.test = {{0, 0, 1}};  // tail 1 never appears as a train tail
  store.rebuild_indexes(4, 1);
  EvalOptions options;
  options.type_constraints = true;
  ScoreWorkspace ws;
  // Candidate pool is {2} plus the truth; 2 is filtered as observed.
  CHECK(filtered_rank(table, store, {0, 0, 1}, Direction::kTail, options,
                      ws) == doctest::Approx(1.0));
}

TEST_CASE("adding a constant to every score preserves ranks") {
  // Second dimension contributes h2 * C * t2 = C to every candidate when
  // all second coordinates are 1.
  const std::vector<double> values = {1.0, 5.0, 7.0, 6.0, 2.0};
  const auto build = [&](double shift) {
    EmbeddingTable table(ModelVariant::kDistMult, values.size(), 1, 2);
    for (std::size_t i = 0; i < values.size(); ++i) {
      table.entity(static_cast<EntityId>(i))[0] = values[i];
      table.entity(static_cast<EntityId>(i))[1] = 1.0;
    }
    table.relation(0)[0] = 1.0;
    table.relation(0)[1] = shift;
    return table;
  };
  TripleStore store;
  store.test = {{0, 0, 1}, {4, 0, 2}};
  store.rebuild_indexes(5, 1);
  EvalOptions options;
  ScoreWorkspace ws;

  const EmbeddingTable flat = build(0.0);
  const EmbeddingTable shifted = build(9.0);
  for (const Triple& triple : store.test) {
    for (Direction dir : {Direction::kHead, Direction::kTail}) {
      CHECK(filtered_rank(flat, store, triple, dir, options, ws) ==
            filtered_rank(shifted, store, triple, dir, options, ws));
    }
  }
}

TEST_CASE("worse truth scores never improve the rank") {
  TripleStore store = single_test_triple(6);
  EvalOptions options;
  ScoreWorkspace ws;
  double last_rank = 0.0;
  for (double truth_score : {9.0, 7.5, 4.0, 1.0}) {
    const EmbeddingTable table =
        scripted_table({1.0, truth_score, 8.0, 6.0, 3.0, 2.0});
    const double rank =
        filtered_rank(table, store, {0, 0, 1}, Direction::kTail, options, ws);
    CHECK(rank >= last_rank);
    last_rank = rank;
  }
}

TEST_CASE("evaluation matches the quadratic-time oracle") {
  for (const bool reciprocal : {false, true}) {
    for (const ModelVariant variant :
         {ModelVariant::kQuatE, ModelVariant::kDistMult}) {
      const OracleFixture fx =
          oracle_fixture(800 + static_cast<int>(variant) + (reciprocal ? 7 : 0),
                         variant, reciprocal);
      for (const TieBreak ties : {TieBreak::kAverage, TieBreak::kOptimistic,
                                  TieBreak::kPessimistic}) {
        for (const bool constrained : {false, true}) {
          EvalOptions options;
          options.split = Split::kTest;
          options.ties = ties;
          options.reciprocal = reciprocal;
          options.type_constraints = constrained;

          const RankReport got = evaluate(fx.table, fx.ds.store, options);
          const RankReport want =
              testsupport::naive_evaluate(fx.table, fx.ds.store, options);

          REQUIRE(got.records.size() == want.records.size());
          for (std::size_t i = 0; i < got.records.size(); ++i) {
            REQUIRE(got.records[i].rank == want.records[i].rank);
          }
          REQUIRE(got.mr == want.mr);
          REQUIRE(got.mrr == want.mrr);
          REQUIRE(got.hits1 == want.hits1);
          REQUIRE(got.hits3 == want.hits3);
          REQUIRE(got.hits10 == want.hits10);
          REQUIRE(got.per_relation_mrr == want.per_relation_mrr);
        }
      }
    }
  }
}

TEST_CASE("parallel evaluation matches sequential evaluation") {
  const OracleFixture fx = oracle_fixture(901, ModelVariant::kQuatE, false);
  EvalOptions sequential;
  EvalOptions parallel;
  parallel.workers = 4;
  const RankReport a = evaluate(fx.table, fx.ds.store, sequential);
  const RankReport b = evaluate(fx.table, fx.ds.store, parallel);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].rank == b.records[i].rank);
    CHECK(a.records[i].triple == b.records[i].triple);
  }
  CHECK(a.mrr == b.mrr);
}

TEST_CASE("evaluate validates its inputs") {
  const OracleFixture fx = oracle_fixture(902, ModelVariant::kDistMult, false);
  EvalOptions options;
  options.reciprocal = true;  // store is not augmented
  CHECK_THROWS_AS(evaluate(fx.table, fx.ds.store, options), UsageError);

  TripleStore empty;
  empty.rebuild_indexes(4, 1);
  const EmbeddingTable table(ModelVariant::kDistMult, 4, 1, 2);
  CHECK_THROWS_AS(evaluate(table, empty, EvalOptions{}), DataError);
}

TEST_CASE("a perfect model earns perfect metrics") {
  // Tail query: the head entity itself would outscore the truth, but the
  // train triple (0, r0, 0) filters it. Head query: 5 * 4 beats 4 * 4.
  const EmbeddingTable table = scripted_table({5.0, 4.0, 1.0, 0.5, 0.25});
  TripleStore store;
  store.train = {{0, 0, 0}};
  store.test = {{0, 0, 1}};
  store.rebuild_indexes(5, 1);
  const RankReport report = evaluate(table, store, EvalOptions{});
  CHECK(report.records.size() == 2);
  CHECK(report.mr == doctest::Approx(1.0));
  CHECK(report.mrr == doctest::Approx(1.0));
  CHECK(report.hits1 == doctest::Approx(1.0));
  CHECK(report.hits10 == doctest::Approx(1.0));
}

TEST_CASE("metric text lists every aggregate") {
  const EmbeddingTable table = scripted_table({3.0, 3.0, 1.0, 0.5});
  TripleStore store;
  store.test = {{0, 0, 1}};
  store.rebuild_indexes(4, 1);
  const RankReport report = evaluate(table, store, EvalOptions{});
  const std::string text = report.to_text();
  for (const char* needle :
       {"queries\t2", "MR\t", "MRR\t", "Hits@10\t", "Hits@3\t", "Hits@1\t"}) {
    CHECK_MESSAGE(text.find(needle) != std::string::npos, needle);
  }
  CHECK(text.find("per-relation") == std::string::npos);
  const std::string with_relations = report.to_text(true);
  CHECK(with_relations.find("per-relation MRR") != std::string::npos);
}

TEST_CASE("learned embeddings on the pattern graph rank held-out triples") {
  // Quick end-to-end sanity at small scale; the acceptance harness runs the
  // full-strength version.
  const Dataset ds = testsupport::make_pattern_kg(1);
  TrainConfig config;
  config.k = 8;
  config.epochs = 60;
  config.neg_per_pos = 4;
  config.lambda1 = 0.03;
  config.lambda2 = 0.03;
  config.seed = 5;
  const TrainResult result = train(ds.store, config);
  EvalOptions options;
  options.split = Split::kTest;
  const RankReport report = evaluate(result.table, ds.store, options);
  CHECK(report.mrr > 0.5);
}

TEST_CASE("parameter counts follow the embedding shapes") {
  CHECK(parameter_count(0, 0, 1, ModelVariant::kQuatE, false) == 0);
  CHECK(parameter_count(1, 1, 1, ModelVariant::kQuatE, false) == 8);
  CHECK(parameter_count(1, 1, 1, ModelVariant::kOctonionE, false) == 16);
  CHECK(parameter_count(1, 1, 1, ModelVariant::kQuatE, true) == 12);
  CHECK(parameter_count(1, 1, 1, ModelVariant::kDualRotation, false) == 12);

  // Benchmark-scale shapes.
  CHECK(parameter_count(40943, 11, 100, ModelVariant::kQuatE, false) ==
        16381600ULL);
  CHECK(parameter_count(40943, 18, 300, ModelVariant::kQuatE, false) ==
        49153200ULL);
}
