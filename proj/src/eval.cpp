#include "hyperkge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <sstream>
#include <thread>

namespace hyperkge {

const char* tiebreak_name(TieBreak t) {
  switch (t) {
    case TieBreak::kAverage:
      return "average";
    case TieBreak::kOptimistic:
      return "optimistic";
    case TieBreak::kPessimistic:
      return "pessimistic";
  }
  return "?";
}

std::optional<TieBreak> tiebreak_from_name(const std::string& name) {
  for (TieBreak t : {TieBreak::kAverage, TieBreak::kOptimistic,
                     TieBreak::kPessimistic}) {
    if (name == tiebreak_name(t)) {
      return t;
    }
  }
  return std::nullopt;
}

namespace {

// The scoring form of a query: rank `truth` among candidates substituted
// into `slot` of (fixed, relation, .) or (., relation, fixed). Membership in
// the filter index is always tested against the original relation.
struct Query {
  EntityId fixed;
  RelationId scoring_relation;
  Direction scoring_slot;
  EntityId truth;
};

Query make_query(const TripleStore& store, const Triple& triple,
                 Direction direction, bool reciprocal) {
  if (direction == Direction::kTail) {
    return {triple.h, triple.r, Direction::kTail, triple.t};
  }
  if (reciprocal) {
    // Head queries ride the reciprocal relation block: candidates fill the
    // tail slot of (t, r + M, ?). Filtering still uses (?, r, t).
    const RelationId rec = static_cast<RelationId>(
        triple.r + static_cast<RelationId>(store.original_relation_count()));
    return {triple.t, rec, Direction::kTail, triple.h};
  }
  return {triple.t, triple.r, Direction::kHead, triple.h};
}

bool filtered_out(const TripleStore& store, const Triple& triple,
                  Direction direction, EntityId candidate) {
  if (direction == Direction::kTail) {
    return store.contains({triple.h, triple.r, candidate});
  }
  return store.contains({candidate, triple.r, triple.t});
}

double rank_from_counts(std::size_t higher, std::size_t ties, TieBreak mode) {
  switch (mode) {
    case TieBreak::kOptimistic:
      return 1.0 + static_cast<double>(higher);
    case TieBreak::kPessimistic:
      return 1.0 + static_cast<double>(higher + ties);
    case TieBreak::kAverage:
      break;
  }
  return 1.0 + static_cast<double>(higher) + static_cast<double>(ties) / 2.0;
}

}  // namespace

double filtered_rank(const EmbeddingTable& table, const TripleStore& store,
                     const Triple& triple, Direction direction,
                     const EvalOptions& options, ScoreWorkspace& ws) {
  const Query q = make_query(store, triple, direction, options.reciprocal);

  if (ws.query.size() != table.row_size()) {
    ws.query.resize(table.row_size());
  }
  build_query(table, q.fixed, q.scoring_relation, q.scoring_slot,
              std::span<double>(ws.query), ws);
  const auto score_of = [&](EntityId c) {
    return algebra::inner(table.components(), ws.query.data(),
                          table.entity(c).data(), table.dim());
  };
  const double truth_score = score_of(q.truth);
  if (!std::isfinite(truth_score)) {
    throw NumericError("non-finite score for triple (" +
                       std::to_string(triple.h) + ", " +
                       std::to_string(triple.r) + ", " +
                       std::to_string(triple.t) + ")");
  }

  // Candidates this query competes against. Type constraints use the
  // original relation's observed slot fillers; the true answer competes even
  // when outside the constraint set.
  std::size_t higher = 0;
  std::size_t ties = 0;
  const auto consider = [&](EntityId c) {
    if (c == q.truth || filtered_out(store, triple, direction, c)) {
      return;
    }
    const double s = score_of(c);
    if (s > truth_score) {
      ++higher;
    } else if (s == truth_score) {
      ++ties;
    }
  };
  if (options.type_constraints) {
    const auto pool = direction == Direction::kHead
                          ? store.head_candidates(triple.r)
                          : store.tail_candidates(triple.r);
    for (EntityId c : pool) {
      consider(c);
    }
  } else {
    const EntityId n = static_cast<EntityId>(store.num_entities());
    for (EntityId c = 0; c < n; ++c) {
      consider(c);
    }
  }
  return rank_from_counts(higher, ties, options.ties);
}

RankReport evaluate(const EmbeddingTable& table, const TripleStore& store,
                    const EvalOptions& options) {
  const std::vector<Triple>& triples = store.split(options.split);
  if (triples.empty()) {
    throw DataError(std::string("split '") + split_name(options.split) +
                    "' is empty");
  }
  if (options.reciprocal && !store.augmented()) {
    throw UsageError("reciprocal evaluation requires an augmented store");
  }

  RankReport report;
  report.records.resize(2 * triples.size());

  const auto run_range = [&](std::size_t begin, std::size_t end) {
    ScoreWorkspace ws;
    for (std::size_t i = begin; i < end; ++i) {
      const Triple& triple = triples[i];
      report.records[2 * i] = {
          triple, Direction::kTail,
          filtered_rank(table, store, triple, Direction::kTail, options, ws)};
      report.records[2 * i + 1] = {
          triple, Direction::kHead,
          filtered_rank(table, store, triple, Direction::kHead, options, ws)};
    }
  };

  const std::size_t workers = std::min<std::size_t>(
      std::max(options.workers, 1), triples.size());
  if (workers <= 1) {
    run_range(0, triples.size());
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (triples.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          run_range(w * chunk, std::min(triples.size(), (w + 1) * chunk));
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) {
      t.join();
    }
    for (const auto& e : errors) {
      if (e) {
        std::rethrow_exception(e);
      }
    }
  }

  double sum_rank = 0.0;
  double sum_rr = 0.0;
  std::size_t h1 = 0, h3 = 0, h10 = 0;
  std::map<RelationId, std::pair<double, std::size_t>> by_relation;
  for (const QueryRecord& rec : report.records) {
    sum_rank += rec.rank;
    sum_rr += 1.0 / rec.rank;
    h1 += rec.rank <= 1.0;
    h3 += rec.rank <= 3.0;
    h10 += rec.rank <= 10.0;
    auto& [rr, count] = by_relation[rec.triple.r];
    rr += 1.0 / rec.rank;
    ++count;
  }
  const double n = static_cast<double>(report.records.size());
  report.mr = sum_rank / n;
  report.mrr = sum_rr / n;
  report.hits1 = static_cast<double>(h1) / n;
  report.hits3 = static_cast<double>(h3) / n;
  report.hits10 = static_cast<double>(h10) / n;
  for (const auto& [r, agg] : by_relation) {
    report.per_relation_mrr[r] = agg.first / static_cast<double>(agg.second);
  }
  return report;
}

std::string RankReport::to_text(bool per_relation,
                                const Vocabulary* vocab) const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "queries\t" << records.size() << '\n';
  out << "MR\t" << std::setprecision(1) << mr << std::setprecision(4) << '\n';
  out << "MRR\t" << mrr << '\n';
  out << "Hits@10\t" << hits10 << '\n';
  out << "Hits@3\t" << hits3 << '\n';
  out << "Hits@1\t" << hits1 << '\n';
  if (per_relation) {
    out << "per-relation MRR\n";
    for (const auto& [r, value] : per_relation_mrr) {
      if (vocab != nullptr) {
        out << "  " << vocab->relation_name(r);
      } else {
        out << "  " << r;
      }
      out << '\t' << value << '\n';
    }
  }
  return out.str();
}

std::uint64_t parameter_count(std::size_t num_entities,
                              std::size_t num_relations, std::size_t k,
                              ModelVariant variant, bool reciprocal) {
  std::uint64_t m_eff = num_relations;
  if (reciprocal) {
    m_eff *= 2;
  }
  if (has_tail_relations(variant)) {
    m_eff *= 2;
  }
  return (static_cast<std::uint64_t>(num_entities) + m_eff) *
         static_cast<std::uint64_t>(k) *
         static_cast<std::uint64_t>(components_for(variant));
}

}  // namespace hyperkge
