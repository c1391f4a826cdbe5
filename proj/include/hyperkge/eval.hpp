#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hyperkge/graph.hpp"
#include "hyperkge/model.hpp"

namespace hyperkge {

// Rank assigned to a candidate tied with others at the true score:
//   kAverage     1 + #higher + #ties/2 (default; ranks may be fractional)
//   kOptimistic  1 + #higher
//   kPessimistic 1 + #higher + #ties
enum class TieBreak { kAverage, kOptimistic, kPessimistic };

const char* tiebreak_name(TieBreak t);
std::optional<TieBreak> tiebreak_from_name(const std::string& name);

struct EvalOptions {
  Split split = Split::kTest;
  TieBreak ties = TieBreak::kAverage;
  // Answer head queries (?, r, t) by scoring (t, r + M, ?) with the
  // reciprocal relation block. Requires an augmented store.
  bool reciprocal = false;
  // Restrict candidates to entities observed in the queried slot of the
  // relation during training (the true answer is always kept).
  bool type_constraints = false;
  int workers = 1;
};

struct QueryRecord {
  Triple triple;
  Direction direction = Direction::kTail;  // slot being predicted
  double rank = 0.0;
};

struct RankReport {
  std::vector<QueryRecord> records;
  double mr = 0.0;
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  std::map<RelationId, double> per_relation_mrr;

  // Line-oriented metric block; adds the per-relation section when asked.
  // Relation names come from vocab when provided, ids otherwise.
  std::string to_text(bool per_relation = false,
                      const Vocabulary* vocab = nullptr) const;
};

// Filtered rank of the triple's entity in the `direction` slot: candidates
// forming an observed triple (other than this one) are removed, the rest are
// ranked by score against the true entity under the tie convention.
double filtered_rank(const EmbeddingTable& table, const TripleStore& store,
                     const Triple& triple, Direction direction,
                     const EvalOptions& options, ScoreWorkspace& ws);

// Ranks both the head and the tail query of every triple in the split and
// aggregates MR, MRR, Hits@{1,3,10} and per-relation MRR over 2 * |split|
// queries.
RankReport evaluate(const EmbeddingTable& table, const TripleStore& store,
                    const EvalOptions& options);

// Free parameters of a model: (N + M_effective) * k * components, where
// M_effective doubles under reciprocal augmentation and doubles again for
// the variant holding separate tail-side relations.
std::uint64_t parameter_count(std::size_t num_entities,
                              std::size_t num_relations, std::size_t k,
                              ModelVariant variant, bool reciprocal);

}  // namespace hyperkge
