#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hyperkge/errors.hpp"

namespace hyperkge {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

struct Triple {
  EntityId h = 0;
  RelationId r = 0;
  EntityId t = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& x) const {
    std::uint64_t v = static_cast<std::uint32_t>(x.h);
    v = v * 0x9e3779b97f4a7c15ULL + static_cast<std::uint32_t>(x.r);
    v = v * 0x9e3779b97f4a7c15ULL + static_cast<std::uint32_t>(x.t);
    v ^= v >> 29;
    v *= 0xbf58476d1ce4e5b9ULL;
    v ^= v >> 32;
    return static_cast<std::size_t>(v);
  }
};

enum class Split { kTrain, kValid, kTest };

const char* split_name(Split s);
std::optional<Split> split_from_name(const std::string& name);

// Dense name <-> id bijections for entities and relations. Ids are assigned
// in first-seen order, which makes vocabularies reproducible across runs.
class Vocabulary {
 public:
  EntityId add_entity(const std::string& name);
  RelationId add_relation(const std::string& name);

  std::optional<EntityId> entity_id(const std::string& name) const;
  std::optional<RelationId> relation_id(const std::string& name) const;

  const std::string& entity_name(EntityId id) const;
  const std::string& relation_name(RelationId id) const;

  std::size_t num_entities() const { return entity_names_.size(); }
  std::size_t num_relations() const { return relation_names_.size(); }

 private:
  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, EntityId> entity_ids_;
  std::unordered_map<std::string, RelationId> relation_ids_;
};

// Per-relation head/tail multiplicity statistics from the train split:
// tph = mean tails per distinct head, hpt = mean heads per distinct tail.
struct RelationStats {
  double tph = 0.0;
  double hpt = 0.0;
};

// Per-relation candidate sets: entities observed as head (resp. tail) of the
// relation in the train split, sorted ascending.
struct TypeConstraints {
  std::vector<std::vector<EntityId>> heads;
  std::vector<std::vector<EntityId>> tails;
};

// Integer-encoded triples with train/valid/test splits, the filter index
// (union of all three splits), per-relation statistics and type-constraint
// candidate sets. Immutable after construction/augmentation; safe for
// concurrent readers.
class TripleStore {
 public:
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;

  const std::vector<Triple>& split(Split s) const;

  // True if (h, r, t) was observed in any split.
  bool contains(const Triple& triple) const {
    return filter_.contains(triple);
  }

  const RelationStats& stats(RelationId r) const { return stats_.at(r); }
  std::span<const EntityId> head_candidates(RelationId r) const;
  std::span<const EntityId> tail_candidates(RelationId r) const;

  std::size_t num_entities() const { return num_entities_; }
  std::size_t num_relations() const { return num_relations_; }
  bool augmented() const { return augmented_; }
  // Relation count before reciprocal augmentation (equals num_relations()
  // when not augmented).
  std::size_t original_relation_count() const {
    return original_relation_count_;
  }

  // Recomputes the filter index, statistics and type constraints. Called by
  // load_tsv and add_reciprocals.
  void rebuild_indexes(std::size_t num_entities, std::size_t num_relations);
  void mark_augmented(std::size_t original_relation_count);

 private:
  std::unordered_set<Triple, TripleHash> filter_;
  std::vector<RelationStats> stats_;
  TypeConstraints constraints_;
  std::size_t num_entities_ = 0;
  std::size_t num_relations_ = 0;
  std::size_t original_relation_count_ = 0;
  bool augmented_ = false;
};

struct LoadSummary {
  std::size_t train_triples = 0;
  std::size_t valid_triples = 0;
  std::size_t test_triples = 0;
  // Entities/relations that never appear in the train split. Their
  // embeddings stay at initialization; dropping them would corrupt the
  // filtered ranking denominator.
  std::size_t entities_not_in_train = 0;
  std::size_t relations_not_in_train = 0;
  // Relations with empty type-constraint candidate sets.
  std::size_t relations_without_candidates = 0;

  std::string to_text() const;
};

struct Dataset {
  Vocabulary vocab;
  TripleStore store;
  LoadSummary summary;
};

// Reads three UTF-8 TSV files (head<TAB>relation<TAB>tail, no header), builds
// the vocabulary in first-seen order over train, then valid, then test, and
// constructs all indexes. Malformed lines raise DataError with file and line
// number.
Dataset load_tsv(const std::filesystem::path& train_path,
                 const std::filesystem::path& valid_path,
                 const std::filesystem::path& test_path);

// Convenience: directory containing train.txt, valid.txt, test.txt.
Dataset load_dir(const std::filesystem::path& dir);

// Doubles the relation vocabulary and adds (t, r + M, h) to train for every
// train triple (h, r, t). Valid/test stay untouched; reciprocal relations
// are used at evaluation time. Throws DataError if already augmented.
void add_reciprocals(Dataset& dataset);

// Standalone recomputations, also used to populate TripleStore.
std::vector<RelationStats> bernoulli_stats(const TripleStore& store);
TypeConstraints type_constraints(const TripleStore& store);

// Writes "<id><TAB><name>" dictionaries as entities.dict / relations.dict.
void write_dictionaries(const Vocabulary& vocab,
                        const std::filesystem::path& dir);

}  // namespace hyperkge
