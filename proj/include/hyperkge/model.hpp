#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hyperkge/graph.hpp"
#include "hyperkge/hypercomplex.hpp"

namespace hyperkge {

// Scoring-function variants. kQuatE is the normalized relational rotation;
// the others are the ablations and degenerations it subsumes.
enum class ModelVariant {
  kQuatE,            // inner(Q_h ⊗ normalize(W_r), Q_t)
  kQuatERaw,         // inner(Q_h ⊗ W_r, Q_t), no normalization
  kWeightedProduct,  // inner(W_r, Q_h ⊗ Q_t)
  kDualRotation,     // inner(Q_h ⊗ normalize(W_r), Q_t ⊗ normalize(V_r))
  kComplEx,          // kQuatERaw with the j, k components pinned to zero
  kDistMult,         // kQuatERaw with all imaginary components pinned to zero
  kOctonionE,        // kQuatE over octonions
};

const char* variant_name(ModelVariant v);
std::optional<ModelVariant> variant_from_name(const std::string& name);

// Number of hypercomplex components (4 or 8).
int components_for(ModelVariant v);
// Leading components that carry parameters; the rest are pinned to zero.
int active_components_for(ModelVariant v);
bool normalizes_relations(ModelVariant v);
bool has_tail_relations(ModelVariant v);

enum class Direction { kHead, kTail };

// Entity and relation embeddings for one model. Rows are stored
// component-major: row(n) is a buffer of components()*dim() doubles where
// component c occupies [c*k, (c+1)*k). Scoring never mutates the table.
class EmbeddingTable {
 public:
  EmbeddingTable(ModelVariant variant, std::size_t num_entities,
                 std::size_t num_relations, std::size_t dim);

  ModelVariant variant() const { return variant_; }
  int components() const { return components_; }
  int active_components() const { return active_components_; }
  std::size_t dim() const { return dim_; }
  std::size_t num_entities() const { return num_entities_; }
  std::size_t num_relations() const { return num_relations_; }
  std::size_t row_size() const { return components_ * dim_; }
  bool has_tail_relations() const { return !tail_relations_.empty(); }

  std::span<double> entity(EntityId id);
  std::span<const double> entity(EntityId id) const;
  std::span<double> relation(RelationId id);
  std::span<const double> relation(RelationId id) const;
  std::span<double> tail_relation(RelationId id);
  std::span<const double> tail_relation(RelationId id) const;

  // Raw buffers, used by the optimizer state and checkpoint IO.
  std::vector<double>& entity_data() { return entities_; }
  const std::vector<double>& entity_data() const { return entities_; }
  std::vector<double>& relation_data() { return relations_; }
  const std::vector<double>& relation_data() const { return relations_; }
  std::vector<double>& tail_relation_data() { return tail_relations_; }
  const std::vector<double>& tail_relation_data() const {
    return tail_relations_;
  }

 private:
  ModelVariant variant_;
  int components_;
  int active_components_;
  std::size_t dim_;
  std::size_t num_entities_;
  std::size_t num_relations_;
  std::vector<double> entities_;
  std::vector<double> relations_;
  std::vector<double> tail_relations_;
};

// Scratch buffers for scoring; reuse one per thread to keep the hot loops
// allocation-free.
struct ScoreWorkspace {
  std::vector<double> rel_normalized;
  std::vector<double> rel_norms;
  std::vector<double> tail_rel_normalized;
  std::vector<double> tail_rel_norms;
  std::vector<double> rotated;
  std::vector<double> rotated2;
  std::vector<double> query;
};

// phi(h, r, t) under the table's variant.
double score_triple(const EmbeddingTable& table, const Triple& triple,
                    ScoreWorkspace& ws);
double score_triple(const EmbeddingTable& table, const Triple& triple);

// Fills `out` (row_size doubles) with the vector B such that
// phi = inner(B, row(candidate)) when the candidate fills `candidate_slot`
// and `fixed_id` fills the other slot. Every variant's score is linear in
// each entity, so scoring a candidate list reduces to dot products with B.
void build_query(const EmbeddingTable& table, EntityId fixed_id, RelationId r,
                 Direction candidate_slot, std::span<double> out,
                 ScoreWorkspace& ws);

// Scores every candidate in one pass; equivalent to looping score_triple
// with the candidate substituted into `candidate_slot`.
std::vector<double> score_candidates(const EmbeddingTable& table,
                                     EntityId fixed_id, RelationId r,
                                     Direction candidate_slot,
                                     std::span<const EntityId> candidates,
                                     ScoreWorkspace& ws);

// d(phi)/d(coordinate) for every embedding the triple touches. Components
// pinned to zero by the variant get zero gradient.
struct TripleGradients {
  double score = 0.0;
  std::vector<double> head;
  std::vector<double> relation;
  std::vector<double> tail;
  std::vector<double> tail_relation;  // empty unless the variant uses V_r
};

TripleGradients score_gradients(const EmbeddingTable& table,
                                const Triple& triple, ScoreWorkspace& ws);

}  // namespace hyperkge
