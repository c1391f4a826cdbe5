#include "hyperkge/train.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

#include "hyperkge/eval.hpp"

namespace hyperkge {

const char* sampler_name(SamplerKind s) {
  return s == SamplerKind::kUniform ? "uniform" : "bernoulli";
}

std::optional<SamplerKind> sampler_from_name(const std::string& name) {
  if (name == "uniform") {
    return SamplerKind::kUniform;
  }
  if (name == "bernoulli") {
    return SamplerKind::kBernoulli;
  }
  return std::nullopt;
}

const char* init_name(InitScheme s) {
  switch (s) {
    case InitScheme::kAuto:
      return "auto";
    case InitScheme::kRotation:
      return "rotation";
    case InitScheme::kUniform:
      return "uniform";
  }
  return "?";
}

std::optional<InitScheme> init_from_name(const std::string& name) {
  for (InitScheme s :
       {InitScheme::kAuto, InitScheme::kRotation, InitScheme::kUniform}) {
    if (name == init_name(s)) {
      return s;
    }
  }
  return std::nullopt;
}

void TrainConfig::validate() const {
  if (k < 1) {
    throw UsageError("k must be >= 1");
  }
  if (neg_per_pos < 1) {
    throw UsageError("neg_per_pos must be >= 1");
  }
  if (lr <= 0.0) {
    throw UsageError("learning rate must be > 0");
  }
  if (batch_count < 1) {
    throw UsageError("batch_count must be >= 1");
  }
  if (lambda1 < 0.0 || lambda2 < 0.0 || n3_weight < 0.0) {
    throw UsageError("regularization rates must be >= 0");
  }
  if (epochs < 0) {
    throw UsageError("epochs must be >= 0");
  }
  if (eval_every < 0 || patience < 0) {
    throw UsageError("eval_every and patience must be >= 0");
  }
  if (workers < 1) {
    throw UsageError("workers must be >= 1");
  }
}

AdagradState::AdagradState(const EmbeddingTable& table)
    : entities(table.entity_data().size(), 0.0),
      relations(table.relation_data().size(), 0.0),
      tail_relations(table.tail_relation_data().size(), 0.0) {}

NegativeSampler::NegativeSampler(const TripleStore& store,
                                 const TrainConfig& config)
    : store_(&store),
      kind_(config.sampler),
      neg_per_pos_(config.neg_per_pos),
      strict_(config.strict_negatives),
      type_constrained_(config.type_constrained_sampling) {}

double NegativeSampler::head_probability(RelationId r) const {
  if (kind_ == SamplerKind::kUniform) {
    return 0.5;
  }
  const RelationStats& s = store_->stats(r);
  const double denom = s.tph + s.hpt;
  // Relations absent from train have no statistics; fall back to a coin.
  return denom > 0.0 ? s.tph / denom : 0.5;
}

EntityId NegativeSampler::draw_replacement(const Triple& positive,
                                           bool corrupt_head,
                                           std::mt19937_64& rng) const {
  std::span<const EntityId> pool;
  if (type_constrained_) {
    pool = corrupt_head ? store_->head_candidates(positive.r)
                        : store_->tail_candidates(positive.r);
  }
  if (pool.empty()) {
    std::uniform_int_distribution<EntityId> all(
        0, static_cast<EntityId>(store_->num_entities()) - 1);
    return all(rng);
  }
  std::uniform_int_distribution<std::size_t> idx(0, pool.size() - 1);
  return pool[idx(rng)];
}

NegativeBatch NegativeSampler::sample(std::span<const Triple> positives,
                                      std::mt19937_64& rng) const {
  NegativeBatch batch;
  batch.positives.assign(positives.begin(), positives.end());
  batch.neg_per_pos = neg_per_pos_;
  batch.negatives.reserve(positives.size() * neg_per_pos_);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (const Triple& pos : positives) {
    const double p_head = head_probability(pos.r);
    for (int n = 0; n < neg_per_pos_; ++n) {
      const bool corrupt_head = coin(rng) < p_head;
      Triple neg = pos;
      EntityId replacement = draw_replacement(pos, corrupt_head, rng);
      if (strict_) {
        // Reject corruptions that reproduce an observed triple. The cap
        // keeps pathological relations (fully connected slots) terminating;
        // the final draw is kept as-is.
        for (int tries = 0; tries < 100; ++tries) {
          (corrupt_head ? neg.h : neg.t) = replacement;
          if (!store_->contains(neg)) {
            break;
          }
          replacement = draw_replacement(pos, corrupt_head, rng);
        }
      }
      (corrupt_head ? neg.h : neg.t) = replacement;
      batch.negatives.push_back(neg);
    }
  }
  return batch;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Fills one embedding row with the angle/scale scheme: per dimension, draw
// an angle, a scale with |scale| <= 1/sqrt(2k), and a random purely
// imaginary unit; the resulting hypercomplex number has modulus |scale|.
void fill_rotation_row(std::span<double> row, int components, std::size_t k,
                       double scale_bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(-std::numbers::pi,
                                               std::numbers::pi);
  std::uniform_real_distribution<double> scale(-scale_bound, scale_bound);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  const int imag = components - 1;
  double units[7];
  for (std::size_t d = 0; d < k; ++d) {
    const double theta = angle(rng);
    const double phi = scale(rng);
    double sq = 0.0;
    do {
      sq = 0.0;
      for (int c = 0; c < imag; ++c) {
        units[c] = coord(rng);
        sq += units[c] * units[c];
      }
    } while (sq <= kNormalizeEps);
    const double inv = 1.0 / std::sqrt(sq);
    row[d] = phi * std::cos(theta);
    const double s = phi * std::sin(theta) * inv;
    for (int c = 0; c < imag; ++c) {
      row[(c + 1) * k + d] = s * units[c];
    }
  }
}

void fill_uniform_row(std::span<double> row, int components, std::size_t k,
                      double scale_bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(-scale_bound, scale_bound);
  for (int c = 0; c < components; ++c) {
    for (std::size_t d = 0; d < k; ++d) {
      row[c * k + d] = coord(rng);
    }
  }
}

void zero_pinned(std::span<double> row, int active, int components,
                 std::size_t k) {
  if (active == components) {
    return;
  }
  std::fill(row.begin() + active * k, row.end(), 0.0);
}

InitScheme resolve_init(const TrainConfig& config) {
  if (config.init != InitScheme::kAuto) {
    return config.init;
  }
  switch (config.variant) {
    case ModelVariant::kQuatE:
    case ModelVariant::kQuatERaw:
    case ModelVariant::kWeightedProduct:
    case ModelVariant::kDualRotation:
      return InitScheme::kRotation;
    default:
      return InitScheme::kUniform;
  }
}

}  // namespace

EmbeddingTable init_embeddings(const TrainConfig& config,
                               std::size_t num_entities,
                               std::size_t num_relations,
                               std::mt19937_64& rng) {
  config.validate();
  EmbeddingTable table(config.variant, num_entities, num_relations, config.k);
  const InitScheme scheme = resolve_init(config);
  const double bound = 1.0 / std::sqrt(2.0 * static_cast<double>(config.k));
  const int comps = table.components();
  const int active = table.active_components();
  const std::size_t k = table.dim();

  auto fill_all = [&](std::vector<double>& data) {
    const std::size_t rows = data.size() / table.row_size();
    for (std::size_t n = 0; n < rows; ++n) {
      std::span<double> row(data.data() + n * table.row_size(),
                            table.row_size());
      if (scheme == InitScheme::kRotation) {
        fill_rotation_row(row, comps, k, bound, rng);
      } else {
        fill_uniform_row(row, comps, k, bound, rng);
      }
      zero_pinned(row, active, comps, k);
    }
  };
  fill_all(table.entity_data());
  fill_all(table.relation_data());
  fill_all(table.tail_relation_data());
  return table;
}

double cubed_modulus_penalty(int components, std::span<const double> row,
                             double weight, std::span<double> grad,
                             std::size_t k) {
  double value = 0.0;
  for (std::size_t d = 0; d < k; ++d) {
    double sq = 0.0;
    for (int c = 0; c < components; ++c) {
      const double v = row[c * k + d];
      sq += v * v;
    }
    const double m = std::sqrt(sq);
    value += m * m * m;
    // d(m^3)/dx_c = 3 m^2 * x_c / m = 3 m x_c; continuous through m = 0.
    const double g = 3.0 * weight * m;
    for (int c = 0; c < components; ++c) {
      grad[c * k + d] += g * row[c * k + d];
    }
  }
  return weight * value;
}

namespace {

double softplus(double x) {
  // log(1 + e^x), overflow-free on both tails.
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

struct BatchView {
  const Triple* triple;
  double label;
};

std::vector<BatchView> flatten(const NegativeBatch& batch) {
  std::vector<BatchView> items;
  items.reserve(batch.positives.size() + batch.negatives.size());
  // Group order: each positive followed by its corruptions, so the sequential
  // accumulation order is independent of how the batch was produced.
  for (std::size_t i = 0; i < batch.positives.size(); ++i) {
    items.push_back({&batch.positives[i], +1.0});
    for (int n = 0; n < batch.neg_per_pos; ++n) {
      const std::size_t j = i * batch.neg_per_pos + n;
      if (j < batch.negatives.size()) {
        items.push_back({&batch.negatives[j], -1.0});
      }
    }
  }
  return items;
}

std::vector<double>& row_grad(
    std::unordered_map<std::int32_t, std::vector<double>>& map,
    std::int32_t id, std::size_t row_size) {
  auto [it, inserted] = map.try_emplace(id);
  if (inserted) {
    it->second.assign(row_size, 0.0);
  }
  return it->second;
}

void axpy(std::vector<double>& acc, double a, const std::vector<double>& x) {
  for (std::size_t i = 0; i < acc.size(); ++i) {
    acc[i] += a * x[i];
  }
}

// Loss and gradients for a contiguous range of labeled items.
double accumulate_range(const EmbeddingTable& table,
                        std::span<const BatchView> items, GradientSet& grads,
                        ScoreWorkspace& ws) {
  const std::size_t rs = table.row_size();
  double loss = 0.0;
  for (const BatchView& item : items) {
    const Triple& triple = *item.triple;
    TripleGradients g = score_gradients(table, triple, ws);
    if (!std::isfinite(g.score)) {
      throw NumericError("non-finite score for triple (" +
                         std::to_string(triple.h) + ", " +
                         std::to_string(triple.r) + ", " +
                         std::to_string(triple.t) + ")");
    }
    const double z = item.label * g.score;
    loss += softplus(-z);
    // d softplus(-y phi) / d phi = -y * sigmoid(-y phi); the denominator
    // saturates cleanly when e^z overflows.
    const double coef = -item.label / (1.0 + std::exp(z));
    axpy(row_grad(grads.entities, triple.h, rs), coef, g.head);
    axpy(row_grad(grads.entities, triple.t, rs), coef, g.tail);
    axpy(row_grad(grads.relations, triple.r, rs), coef, g.relation);
    if (!g.tail_relation.empty()) {
      axpy(row_grad(grads.tail_relations, triple.r, rs), coef,
           g.tail_relation);
    }
  }
  return loss;
}

template <typename Map>
std::vector<std::int32_t> sorted_keys(const Map& map) {
  std::vector<std::int32_t> keys;
  keys.reserve(map.size());
  for (const auto& [id, row] : map) {
    keys.push_back(id);
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

// L2 and cubed-modulus penalties over the unique embeddings already present
// in `grads`; iterates ids in sorted order so the loss sum is deterministic.
double add_regularization(const EmbeddingTable& table,
                          const TrainConfig& config, GradientSet& grads) {
  double value = 0.0;
  const std::size_t k = table.dim();
  const int comps = table.components();
  auto penalize =
      [&](std::unordered_map<std::int32_t, std::vector<double>>& map,
          double l2_rate, auto&& row_of) {
        for (std::int32_t id : sorted_keys(map)) {
          std::span<const double> row = row_of(id);
          std::vector<double>& grad = map.at(id);
          if (l2_rate > 0.0) {
            double sq = 0.0;
            for (std::size_t i = 0; i < row.size(); ++i) {
              sq += row[i] * row[i];
              grad[i] += 2.0 * l2_rate * row[i];
            }
            value += l2_rate * sq;
          }
          if (config.n3_weight > 0.0) {
            value += cubed_modulus_penalty(comps, row, config.n3_weight,
                                           std::span<double>(grad), k);
          }
        }
      };
  penalize(grads.entities, config.lambda1,
           [&](std::int32_t id) { return table.entity(id); });
  penalize(grads.relations, config.lambda2,
           [&](std::int32_t id) { return table.relation(id); });
  penalize(grads.tail_relations, config.lambda2,
           [&](std::int32_t id) { return table.tail_relation(id); });
  return value;
}

void merge_into(GradientSet& into, GradientSet&& from) {
  auto merge_map = [](auto& dst, auto&& src) {
    for (auto& [id, row] : src) {
      auto [it, inserted] = dst.try_emplace(id, std::move(row));
      if (!inserted) {
        axpy(it->second, 1.0, row);
      }
    }
  };
  merge_map(into.entities, std::move(from.entities));
  merge_map(into.relations, std::move(from.relations));
  merge_map(into.tail_relations, std::move(from.tail_relations));
}

}  // namespace

std::pair<double, GradientSet> loss_and_grad(const EmbeddingTable& table,
                                             const NegativeBatch& batch,
                                             const TrainConfig& config) {
  const std::vector<BatchView> items = flatten(batch);
  GradientSet grads;
  double loss = 0.0;

  const std::size_t max_useful = std::max<std::size_t>(items.size(), 1);
  const int workers = static_cast<int>(std::min<std::size_t>(
      static_cast<std::size_t>(config.workers), max_useful));
  if (workers <= 1) {
    ScoreWorkspace ws;
    loss = accumulate_range(table, items, grads, ws);
  } else {
    // Each worker accumulates into private buffers; reduction happens in
    // worker order so a fixed worker count gives a fixed result.
    std::vector<GradientSet> partial(workers);
    std::vector<double> partial_loss(workers, 0.0);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    const std::size_t chunk = (items.size() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          const std::size_t begin = w * chunk;
          const std::size_t end = std::min(items.size(), begin + chunk);
          if (begin >= end) {
            return;
          }
          ScoreWorkspace ws;
          partial_loss[w] = accumulate_range(
              table, std::span<const BatchView>(items).subspan(begin, end - begin),
              partial[w], ws);
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
    for (int w = 0; w < workers; ++w) {
      loss += partial_loss[w];
      merge_into(grads, std::move(partial[w]));
    }
  }

  loss += add_regularization(table, config, grads);
  return {loss, std::move(grads)};
}

namespace {

void apply_rows(std::vector<double>& params, std::vector<double>& acc,
                const std::unordered_map<std::int32_t, std::vector<double>>& map,
                std::size_t row_size, double lr) {
  for (std::int32_t id : sorted_keys(map)) {
    const std::vector<double>& grad = map.at(id);
    const std::size_t off = static_cast<std::size_t>(id) * row_size;
    for (std::size_t i = 0; i < row_size; ++i) {
      const double g = grad[i];
      if (g == 0.0) {
        continue;
      }
      acc[off + i] += g * g;
      params[off + i] -=
          lr * g / (std::sqrt(acc[off + i]) + AdagradState::kEpsilon);
    }
  }
}

}  // namespace

void adagrad_step(EmbeddingTable& table, AdagradState& state,
                  const GradientSet& gradients, double lr) {
  apply_rows(table.entity_data(), state.entities, gradients.entities,
             table.row_size(), lr);
  apply_rows(table.relation_data(), state.relations, gradients.relations,
             table.row_size(), lr);
  apply_rows(table.tail_relation_data(), state.tail_relations,
             gradients.tail_relations, table.row_size(), lr);
}

std::string format_log_line(const EpochRecord& record) {
  std::ostringstream out;
  out << record.epoch << '\t' << record.loss;
  if (record.valid_mrr.has_value()) {
    out << '\t' << *record.valid_mrr;
  }
  return out.str();
}

TrainResult train(const TripleStore& store, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  if (config.reciprocal != store.augmented()) {
    throw UsageError(
        "reciprocal flag does not match the store's augmentation state");
  }
  if (store.train.empty()) {
    throw DataError("train split is empty");
  }
  const bool do_eval = config.eval_every > 0;
  if (do_eval && store.valid.empty()) {
    throw DataError("validation split is empty but eval_every is set");
  }

  std::mt19937_64 rng(config.seed);
  EmbeddingTable table = init_embeddings(config, store.num_entities(),
                                         store.num_relations(), rng);
  AdagradState state(table);
  NegativeSampler sampler(store, config);

  EvalOptions valid_options;
  valid_options.split = Split::kValid;
  valid_options.reciprocal = config.reciprocal;
  valid_options.type_constraints = config.type_constrained_eval;
  valid_options.workers = config.workers;

  TrainResult result{std::move(table), {}, -1, -1.0};
  std::optional<EmbeddingTable> best;
  int stagnant = 0;

  std::vector<std::size_t> order(store.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  std::vector<Triple> batch_buf;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    const std::size_t total = order.size();
    const std::size_t batches =
        std::min<std::size_t>(config.batch_count, total);
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * total / batches;
      const std::size_t end = (b + 1) * total / batches;
      batch_buf.clear();
      for (std::size_t i = begin; i < end; ++i) {
        batch_buf.push_back(store.train[order[i]]);
      }
      NegativeBatch negs = sampler.sample(batch_buf, rng);
      auto [loss, grads] = loss_and_grad(result.table, negs, config);
      adagrad_step(result.table, state, grads, config.lr);
      epoch_loss += loss;
    }

    EpochRecord record{epoch, epoch_loss, std::nullopt};
    if (do_eval && epoch % config.eval_every == 0) {
      const RankReport report = evaluate(result.table, store, valid_options);
      record.valid_mrr = report.mrr;
      if (report.mrr > result.best_mrr) {
        result.best_mrr = report.mrr;
        result.best_epoch = epoch;
        best = result.table;
        stagnant = 0;
      } else {
        ++stagnant;
      }
    }
    result.log.push_back(record);
    if (on_epoch) {
      on_epoch(record);
    }
    if (do_eval && config.patience > 0 && stagnant >= config.patience) {
      break;
    }
  }

  if (best.has_value()) {
    result.table = std::move(*best);
  }
  return result;
}

}  // namespace hyperkge
