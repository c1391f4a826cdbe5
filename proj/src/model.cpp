#include "hyperkge/model.hpp"

#include <algorithm>
#include <cmath>

namespace hyperkge {

const char* variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::kQuatE:
      return "quate";
    case ModelVariant::kQuatERaw:
      return "quate-raw";
    case ModelVariant::kWeightedProduct:
      return "weighted-product";
    case ModelVariant::kDualRotation:
      return "dual-rotation";
    case ModelVariant::kComplEx:
      return "complex";
    case ModelVariant::kDistMult:
      return "distmult";
    case ModelVariant::kOctonionE:
      return "octonione";
  }
  return "?";
}

std::optional<ModelVariant> variant_from_name(const std::string& name) {
  for (ModelVariant v :
       {ModelVariant::kQuatE, ModelVariant::kQuatERaw,
        ModelVariant::kWeightedProduct, ModelVariant::kDualRotation,
        ModelVariant::kComplEx, ModelVariant::kDistMult,
        ModelVariant::kOctonionE}) {
    if (name == variant_name(v)) {
      return v;
    }
  }
  return std::nullopt;
}

int components_for(ModelVariant v) {
  return v == ModelVariant::kOctonionE ? 8 : 4;
}

int active_components_for(ModelVariant v) {
  switch (v) {
    case ModelVariant::kComplEx:
      return 2;
    case ModelVariant::kDistMult:
      return 1;
    default:
      return components_for(v);
  }
}

bool normalizes_relations(ModelVariant v) {
  return v == ModelVariant::kQuatE || v == ModelVariant::kDualRotation ||
         v == ModelVariant::kOctonionE;
}

bool has_tail_relations(ModelVariant v) {
  return v == ModelVariant::kDualRotation;
}

EmbeddingTable::EmbeddingTable(ModelVariant variant, std::size_t num_entities,
                               std::size_t num_relations, std::size_t dim)
    : variant_(variant),
      components_(components_for(variant)),
      active_components_(active_components_for(variant)),
      dim_(dim),
      num_entities_(num_entities),
      num_relations_(num_relations) {
  if (dim_ == 0) {
    throw UsageError("embedding dimension must be >= 1");
  }
  entities_.assign(num_entities_ * row_size(), 0.0);
  relations_.assign(num_relations_ * row_size(), 0.0);
  if (hyperkge::has_tail_relations(variant)) {
    tail_relations_.assign(num_relations_ * row_size(), 0.0);
  }
}

namespace {

std::size_t checked_offset(std::int32_t id, std::size_t count,
                           std::size_t row_size, const char* what) {
  if (id < 0 || static_cast<std::size_t>(id) >= count) {
    throw DataError(std::string(what) + " id out of range: " +
                    std::to_string(id) + " (count " + std::to_string(count) +
                    ")");
  }
  return static_cast<std::size_t>(id) * row_size;
}

}  // namespace

std::span<double> EmbeddingTable::entity(EntityId id) {
  return {entities_.data() +
              checked_offset(id, num_entities_, row_size(), "entity"),
          row_size()};
}

std::span<const double> EmbeddingTable::entity(EntityId id) const {
  return {entities_.data() +
              checked_offset(id, num_entities_, row_size(), "entity"),
          row_size()};
}

std::span<double> EmbeddingTable::relation(RelationId id) {
  return {relations_.data() +
              checked_offset(id, num_relations_, row_size(), "relation"),
          row_size()};
}

std::span<const double> EmbeddingTable::relation(RelationId id) const {
  return {relations_.data() +
              checked_offset(id, num_relations_, row_size(), "relation"),
          row_size()};
}

std::span<double> EmbeddingTable::tail_relation(RelationId id) {
  if (tail_relations_.empty()) {
    throw UsageError("variant has no tail-relation embeddings");
  }
  return {tail_relations_.data() +
              checked_offset(id, num_relations_, row_size(), "relation"),
          row_size()};
}

std::span<const double> EmbeddingTable::tail_relation(RelationId id) const {
  if (tail_relations_.empty()) {
    throw UsageError("variant has no tail-relation embeddings");
  }
  return {tail_relations_.data() +
              checked_offset(id, num_relations_, row_size(), "relation"),
          row_size()};
}

namespace {

using algebra::MulTable;

void resize_ws(std::vector<double>& v, std::size_t n) {
  if (v.size() != n) {
    v.resize(n);
  }
}

// Normalizes `row` into `out`, throwing the degenerate error with context.
void normalize_or_throw(int comps, std::span<const double> row,
                        std::vector<double>& out, std::vector<double>& norms,
                        std::size_t k, const char* what) {
  resize_ws(out, comps * k);
  resize_ws(norms, k);
  const std::size_t bad = algebra::normalize_into(comps, row.data(),
                                                  out.data(), norms.data(), k,
                                                  kNormalizeEps);
  if (bad != algebra::kNoDegenerateDim) {
    throw DegenerateError(bad, what);
  }
}

// Resolves the relation row used on the head side: normalized or raw
// depending on the variant. Returns a pointer valid until ws changes.
const double* head_relation_row(const EmbeddingTable& table, RelationId r,
                                ScoreWorkspace& ws) {
  const auto rel = table.relation(r);
  if (!normalizes_relations(table.variant())) {
    return rel.data();
  }
  normalize_or_throw(table.components(), rel, ws.rel_normalized, ws.rel_norms,
                     table.dim(), "relation");
  return ws.rel_normalized.data();
}

const double* tail_relation_row(const EmbeddingTable& table, RelationId r,
                                ScoreWorkspace& ws) {
  const auto rel = table.tail_relation(r);
  normalize_or_throw(table.components(), rel, ws.tail_rel_normalized,
                     ws.tail_rel_norms, table.dim(), "tail relation");
  return ws.tail_rel_normalized.data();
}

}  // namespace

double score_triple(const EmbeddingTable& table, const Triple& triple,
                    ScoreWorkspace& ws) {
  const MulTable& mul = algebra::table_for(table.components());
  const std::size_t k = table.dim();
  const int comps = table.components();
  const auto head = table.entity(triple.h);
  const auto tail = table.entity(triple.t);

  switch (table.variant()) {
    case ModelVariant::kQuatE:
    case ModelVariant::kQuatERaw:
    case ModelVariant::kComplEx:
    case ModelVariant::kDistMult:
    case ModelVariant::kOctonionE: {
      const double* rel = head_relation_row(table, triple.r, ws);
      resize_ws(ws.rotated, comps * k);
      algebra::product(mul, head.data(), rel, ws.rotated.data(), k);
      return algebra::inner(comps, ws.rotated.data(), tail.data(), k);
    }
    case ModelVariant::kWeightedProduct: {
      const auto rel = table.relation(triple.r);
      resize_ws(ws.rotated, comps * k);
      algebra::product(mul, head.data(), tail.data(), ws.rotated.data(), k);
      return algebra::inner(comps, rel.data(), ws.rotated.data(), k);
    }
    case ModelVariant::kDualRotation: {
      const double* rel = head_relation_row(table, triple.r, ws);
      const double* tail_rel = tail_relation_row(table, triple.r, ws);
      resize_ws(ws.rotated, comps * k);
      resize_ws(ws.rotated2, comps * k);
      algebra::product(mul, head.data(), rel, ws.rotated.data(), k);
      algebra::product(mul, tail.data(), tail_rel, ws.rotated2.data(), k);
      return algebra::inner(comps, ws.rotated.data(), ws.rotated2.data(), k);
    }
  }
  throw UsageError("unknown model variant");
}

double score_triple(const EmbeddingTable& table, const Triple& triple) {
  ScoreWorkspace ws;
  return score_triple(table, triple, ws);
}

void build_query(const EmbeddingTable& table, EntityId fixed_id, RelationId r,
                 Direction candidate_slot, std::span<double> out,
                 ScoreWorkspace& ws) {
  const MulTable& mul = algebra::table_for(table.components());
  const std::size_t k = table.dim();
  const int comps = table.components();
  if (out.size() != table.row_size()) {
    throw UsageError("query buffer has wrong size");
  }
  std::fill(out.begin(), out.end(), 0.0);
  const auto fixed = table.entity(fixed_id);

  switch (table.variant()) {
    case ModelVariant::kQuatE:
    case ModelVariant::kQuatERaw:
    case ModelVariant::kComplEx:
    case ModelVariant::kDistMult:
    case ModelVariant::kOctonionE: {
      const double* rel = head_relation_row(table, r, ws);
      if (candidate_slot == Direction::kTail) {
        // phi = inner(fixed ⊗ rel, X)
        algebra::product(mul, fixed.data(), rel, out.data(), k);
      } else {
        // phi = inner(X ⊗ rel, fixed): gradient of the product w.r.t. X.
        algebra::product_backward(mul, nullptr, rel, fixed.data(), out.data(),
                                  nullptr, k);
      }
      return;
    }
    case ModelVariant::kWeightedProduct: {
      const auto rel = table.relation(r);
      // phi = inner(rel, H ⊗ T); B is the product-backward of the varying
      // slot with the relation as upstream.
      if (candidate_slot == Direction::kTail) {
        algebra::product_backward(mul, fixed.data(), nullptr, rel.data(),
                                  nullptr, out.data(), k);
      } else {
        algebra::product_backward(mul, nullptr, fixed.data(), rel.data(),
                                  out.data(), nullptr, k);
      }
      return;
    }
    case ModelVariant::kDualRotation: {
      const double* rel = head_relation_row(table, r, ws);
      const double* tail_rel = tail_relation_row(table, r, ws);
      resize_ws(ws.rotated, comps * k);
      if (candidate_slot == Direction::kTail) {
        // phi = inner(fixed ⊗ W', X ⊗ V') = inner over the X-product.
        algebra::product(mul, fixed.data(), rel, ws.rotated.data(), k);
        algebra::product_backward(mul, nullptr, tail_rel, ws.rotated.data(),
                                  out.data(), nullptr, k);
      } else {
        algebra::product(mul, fixed.data(), tail_rel, ws.rotated.data(), k);
        algebra::product_backward(mul, nullptr, rel, ws.rotated.data(),
                                  out.data(), nullptr, k);
      }
      return;
    }
  }
  throw UsageError("unknown model variant");
}

std::vector<double> score_candidates(const EmbeddingTable& table,
                                     EntityId fixed_id, RelationId r,
                                     Direction candidate_slot,
                                     std::span<const EntityId> candidates,
                                     ScoreWorkspace& ws) {
  resize_ws(ws.query, table.row_size());
  build_query(table, fixed_id, r, candidate_slot, ws.query, ws);
  std::vector<double> scores(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto row = table.entity(candidates[i]);
    scores[i] = algebra::inner(table.components(), ws.query.data(), row.data(),
                               table.dim());
  }
  return scores;
}

namespace {

// Zeroes gradient entries for components the variant pins to zero.
void mask_inactive(const EmbeddingTable& table, std::vector<double>& grad) {
  const int active = table.active_components();
  if (active == table.components() || grad.empty()) {
    return;
  }
  std::fill(grad.begin() + active * table.dim(), grad.end(), 0.0);
}

}  // namespace

TripleGradients score_gradients(const EmbeddingTable& table,
                                const Triple& triple, ScoreWorkspace& ws) {
  const MulTable& mul = algebra::table_for(table.components());
  const std::size_t k = table.dim();
  const int comps = table.components();
  const std::size_t rs = table.row_size();
  const auto head = table.entity(triple.h);
  const auto tail = table.entity(triple.t);

  TripleGradients g;
  g.head.assign(rs, 0.0);
  g.relation.assign(rs, 0.0);
  g.tail.assign(rs, 0.0);

  switch (table.variant()) {
    case ModelVariant::kQuatE:
    case ModelVariant::kQuatERaw:
    case ModelVariant::kComplEx:
    case ModelVariant::kDistMult:
    case ModelVariant::kOctonionE: {
      const bool normalized = normalizes_relations(table.variant());
      const double* rel = head_relation_row(table, triple.r, ws);
      resize_ws(ws.rotated, rs);
      algebra::product(mul, head.data(), rel, ws.rotated.data(), k);
      g.score = algebra::inner(comps, ws.rotated.data(), tail.data(), k);

      // phi = inner(head ⊗ rel, tail): linear in the tail.
      std::copy(ws.rotated.begin(), ws.rotated.end(), g.tail.begin());
      if (normalized) {
        resize_ws(ws.rotated2, rs);
        std::fill(ws.rotated2.begin(), ws.rotated2.end(), 0.0);
        algebra::product_backward(mul, head.data(), rel, tail.data(),
                                  g.head.data(), ws.rotated2.data(), k);
        algebra::normalize_backward(comps, rel, ws.rel_norms.data(),
                                    ws.rotated2.data(), g.relation.data(), k);
      } else {
        algebra::product_backward(mul, head.data(), rel, tail.data(),
                                  g.head.data(), g.relation.data(), k);
      }
      break;
    }
    case ModelVariant::kWeightedProduct: {
      const auto rel = table.relation(triple.r);
      resize_ws(ws.rotated, rs);
      algebra::product(mul, head.data(), tail.data(), ws.rotated.data(), k);
      g.score = algebra::inner(comps, rel.data(), ws.rotated.data(), k);
      std::copy(ws.rotated.begin(), ws.rotated.end(), g.relation.begin());
      algebra::product_backward(mul, head.data(), tail.data(), rel.data(),
                                g.head.data(), g.tail.data(), k);
      break;
    }
    case ModelVariant::kDualRotation: {
      // rel/tail_rel live in separate workspace buffers and both stay valid
      // through the backward passes below.
      const double* rel = head_relation_row(table, triple.r, ws);
      const double* tail_rel = tail_relation_row(table, triple.r, ws);
      resize_ws(ws.rotated, rs);
      resize_ws(ws.rotated2, rs);
      algebra::product(mul, head.data(), rel, ws.rotated.data(), k);
      algebra::product(mul, tail.data(), tail_rel, ws.rotated2.data(), k);
      g.score = algebra::inner(comps, ws.rotated.data(), ws.rotated2.data(), k);

      g.tail_relation.assign(rs, 0.0);
      std::vector<double> g_rel_normalized(rs, 0.0);
      std::vector<double> g_tail_rel_normalized(rs, 0.0);
      algebra::product_backward(mul, head.data(), rel, ws.rotated2.data(),
                                g.head.data(), g_rel_normalized.data(), k);
      algebra::product_backward(mul, tail.data(), tail_rel, ws.rotated.data(),
                                g.tail.data(), g_tail_rel_normalized.data(),
                                k);
      algebra::normalize_backward(comps, rel, ws.rel_norms.data(),
                                  g_rel_normalized.data(), g.relation.data(),
                                  k);
      algebra::normalize_backward(comps, tail_rel, ws.tail_rel_norms.data(),
                                  g_tail_rel_normalized.data(),
                                  g.tail_relation.data(), k);
      break;
    }
  }

  mask_inactive(table, g.head);
  mask_inactive(table, g.relation);
  mask_inactive(table, g.tail);
  mask_inactive(table, g.tail_relation);
  return g;
}

}  // namespace hyperkge
