#include "hyperkge/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace hyperkge {

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kValid:
      return "valid";
    case Split::kTest:
      return "test";
  }
  return "?";
}

std::optional<Split> split_from_name(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "valid") return Split::kValid;
  if (name == "test") return Split::kTest;
  return std::nullopt;
}

EntityId Vocabulary::add_entity(const std::string& name) {
  auto it = entity_ids_.find(name);
  if (it != entity_ids_.end()) {
    return it->second;
  }
  const EntityId id = static_cast<EntityId>(entity_names_.size());
  entity_names_.push_back(name);
  entity_ids_.emplace(name, id);
  return id;
}

RelationId Vocabulary::add_relation(const std::string& name) {
  auto it = relation_ids_.find(name);
  if (it != relation_ids_.end()) {
    return it->second;
  }
  const RelationId id = static_cast<RelationId>(relation_names_.size());
  relation_names_.push_back(name);
  relation_ids_.emplace(name, id);
  return id;
}

std::optional<EntityId> Vocabulary::entity_id(const std::string& name) const {
  auto it = entity_ids_.find(name);
  if (it == entity_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> Vocabulary::relation_id(
    const std::string& name) const {
  auto it = relation_ids_.find(name);
  if (it == relation_ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::entity_name(EntityId id) const {
  return entity_names_.at(static_cast<std::size_t>(id));
}

const std::string& Vocabulary::relation_name(RelationId id) const {
  return relation_names_.at(static_cast<std::size_t>(id));
}

const std::vector<Triple>& TripleStore::split(Split s) const {
  switch (s) {
    case Split::kTrain:
      return train;
    case Split::kValid:
      return valid;
    case Split::kTest:
      return test;
  }
  return train;
}

std::span<const EntityId> TripleStore::head_candidates(RelationId r) const {
  return constraints_.heads.at(static_cast<std::size_t>(r));
}

std::span<const EntityId> TripleStore::tail_candidates(RelationId r) const {
  return constraints_.tails.at(static_cast<std::size_t>(r));
}

void TripleStore::rebuild_indexes(std::size_t num_entities,
                                  std::size_t num_relations) {
  num_entities_ = num_entities;
  num_relations_ = num_relations;
  if (!augmented_) {
    original_relation_count_ = num_relations;
  }

  filter_.clear();
  filter_.reserve(train.size() + valid.size() + test.size());
  for (const auto* split : {&train, &valid, &test}) {
    for (const Triple& triple : *split) {
      filter_.insert(triple);
    }
  }

  stats_ = bernoulli_stats(*this);
  constraints_ = type_constraints(*this);
}

void TripleStore::mark_augmented(std::size_t original_relation_count) {
  augmented_ = true;
  original_relation_count_ = original_relation_count;
}

std::string LoadSummary::to_text() const {
  std::ostringstream out;
  out << "triples: train=" << train_triples << " valid=" << valid_triples
      << " test=" << test_triples << "\n";
  if (entities_not_in_train > 0 || relations_not_in_train > 0) {
    out << "not in train: " << entities_not_in_train << " entities, "
        << relations_not_in_train
        << " relations (embeddings stay at initialization)\n";
  }
  if (relations_without_candidates > 0) {
    out << "relations with empty type-constraint sets: "
        << relations_without_candidates << "\n";
  }
  return out.str();
}

namespace {

std::vector<Triple> read_split(const std::filesystem::path& path,
                               Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  std::vector<Triple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const std::size_t tab1 = line.find('\t');
    const std::size_t tab2 =
        tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    const std::size_t tab3 =
        tab2 == std::string::npos ? std::string::npos : line.find('\t', tab2 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos ||
        tab3 != std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected exactly 3 tab-separated fields");
    }
    const std::string head = line.substr(0, tab1);
    const std::string rel = line.substr(tab1 + 1, tab2 - tab1 - 1);
    const std::string tail = line.substr(tab2 + 1);
    if (head.empty() || rel.empty() || tail.empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": empty field");
    }
    triples.push_back(Triple{vocab.add_entity(head), vocab.add_relation(rel),
                             vocab.add_entity(tail)});
  }
  return triples;
}

}  // namespace

Dataset load_tsv(const std::filesystem::path& train_path,
                 const std::filesystem::path& valid_path,
                 const std::filesystem::path& test_path) {
  Dataset ds;
  ds.store.train = read_split(train_path, ds.vocab);
  const std::size_t entities_in_train = ds.vocab.num_entities();
  const std::size_t relations_in_train = ds.vocab.num_relations();
  ds.store.valid = read_split(valid_path, ds.vocab);
  ds.store.test = read_split(test_path, ds.vocab);

  ds.store.rebuild_indexes(ds.vocab.num_entities(), ds.vocab.num_relations());

  ds.summary.train_triples = ds.store.train.size();
  ds.summary.valid_triples = ds.store.valid.size();
  ds.summary.test_triples = ds.store.test.size();
  ds.summary.entities_not_in_train =
      ds.vocab.num_entities() - entities_in_train;
  ds.summary.relations_not_in_train =
      ds.vocab.num_relations() - relations_in_train;
  for (std::size_t r = 0; r < ds.vocab.num_relations(); ++r) {
    if (ds.store.head_candidates(static_cast<RelationId>(r)).empty()) {
      ++ds.summary.relations_without_candidates;
    }
  }
  return ds;
}

Dataset load_dir(const std::filesystem::path& dir) {
  return load_tsv(dir / "train.txt", dir / "valid.txt", dir / "test.txt");
}

void add_reciprocals(Dataset& dataset) {
  TripleStore& store = dataset.store;
  if (store.augmented()) {
    throw DataError("triple store is already reciprocal-augmented");
  }
  const std::size_t m = dataset.vocab.num_relations();
  for (std::size_t r = 0; r < m; ++r) {
    const std::string name =
        dataset.vocab.relation_name(static_cast<RelationId>(r)) +
        "_reciprocal";
    if (dataset.vocab.relation_id(name).has_value()) {
      throw DataError("relation name collision while adding reciprocals: " +
                      name);
    }
    dataset.vocab.add_relation(name);
  }

  const std::size_t original_train = store.train.size();
  store.train.reserve(2 * original_train);
  for (std::size_t i = 0; i < original_train; ++i) {
    const Triple& triple = store.train[i];
    store.train.push_back(Triple{
        triple.t, static_cast<RelationId>(triple.r + static_cast<RelationId>(m)),
        triple.h});
  }
  store.mark_augmented(m);
  store.rebuild_indexes(dataset.vocab.num_entities(),
                        dataset.vocab.num_relations());
}

std::vector<RelationStats> bernoulli_stats(const TripleStore& store) {
  const std::size_t m = store.num_relations();
  std::vector<std::size_t> count(m, 0);
  std::vector<std::unordered_set<EntityId>> heads(m);
  std::vector<std::unordered_set<EntityId>> tails(m);
  for (const Triple& triple : store.train) {
    const auto r = static_cast<std::size_t>(triple.r);
    ++count[r];
    heads[r].insert(triple.h);
    tails[r].insert(triple.t);
  }
  std::vector<RelationStats> stats(m);
  for (std::size_t r = 0; r < m; ++r) {
    if (count[r] == 0) {
      continue;  // relation absent from train; sampler never sees it
    }
    stats[r].tph =
        static_cast<double>(count[r]) / static_cast<double>(heads[r].size());
    stats[r].hpt =
        static_cast<double>(count[r]) / static_cast<double>(tails[r].size());
  }
  return stats;
}

TypeConstraints type_constraints(const TripleStore& store) {
  const std::size_t m = store.num_relations();
  TypeConstraints tc;
  tc.heads.resize(m);
  tc.tails.resize(m);
  for (const Triple& triple : store.train) {
    const auto r = static_cast<std::size_t>(triple.r);
    tc.heads[r].push_back(triple.h);
    tc.tails[r].push_back(triple.t);
  }
  for (std::size_t r = 0; r < m; ++r) {
    for (auto* v : {&tc.heads[r], &tc.tails[r]}) {
      std::sort(v->begin(), v->end());
      v->erase(std::unique(v->begin(), v->end()), v->end());
    }
  }
  return tc;
}

void write_dictionaries(const Vocabulary& vocab,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "entities.dict");
    if (!out) {
      throw DataError("cannot write " + (dir / "entities.dict").string());
    }
    for (std::size_t i = 0; i < vocab.num_entities(); ++i) {
      out << i << '\t' << vocab.entity_name(static_cast<EntityId>(i)) << '\n';
    }
  }
  {
    std::ofstream out(dir / "relations.dict");
    if (!out) {
      throw DataError("cannot write " + (dir / "relations.dict").string());
    }
    for (std::size_t i = 0; i < vocab.num_relations(); ++i) {
      out << i << '\t' << vocab.relation_name(static_cast<RelationId>(i))
          << '\n';
    }
  }
}

}  // namespace hyperkge
