#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hyperkge/graph.hpp"
#include "hyperkge/model.hpp"

namespace hyperkge {

enum class SamplerKind { kUniform, kBernoulli };

const char* sampler_name(SamplerKind s);
std::optional<SamplerKind> sampler_from_name(const std::string& name);

// How embedding coordinates are drawn before training.
//   kRotation: angle/scale scheme producing per-dimension norm |phi_init|.
//   kUniform:  plain uniform coordinates on the same scale envelope.
//   kAuto:     kRotation for quaternion rotation variants, kUniform for the
//              octonion variant and the pinned-component degenerations.
enum class InitScheme { kAuto, kRotation, kUniform };

const char* init_name(InitScheme s);
std::optional<InitScheme> init_from_name(const std::string& name);

struct TrainConfig {
  std::size_t k = 100;
  double lambda1 = 0.0;    // entity L2 rate
  double lambda2 = 0.0;    // relation L2 rate
  double n3_weight = 0.0;  // cubed-modulus penalty rate, 0 disables
  int neg_per_pos = 1;
  double lr = 0.1;
  int epochs = 100;
  int batch_count = 10;
  SamplerKind sampler = SamplerKind::kBernoulli;
  ModelVariant variant = ModelVariant::kQuatE;
  bool reciprocal = false;
  bool type_constrained_sampling = false;
  bool type_constrained_eval = false;
  bool strict_negatives = false;
  std::uint64_t seed = 1;
  int eval_every = 0;  // validation MRR every this many epochs; 0 disables
  int patience = 0;    // stop after this many stagnant evaluations; 0 disables
  int workers = 1;

  InitScheme init = InitScheme::kAuto;

  // Throws UsageError on out-of-range values.
  void validate() const;
};

// Per-coordinate accumulated squared gradients, laid out exactly like the
// table's buffers.
struct AdagradState {
  static constexpr double kEpsilon = 1e-8;

  explicit AdagradState(const EmbeddingTable& table);

  std::vector<double> entities;
  std::vector<double> relations;
  std::vector<double> tail_relations;
};

// One batch of labeled triples: positives carry label +1, every positive is
// followed by neg_per_pos corruptions carrying label -1. A corruption
// replaces exactly one of {h, t}; the replacement may collide with the
// original entity unless strict mode is on.
struct NegativeBatch {
  std::vector<Triple> positives;
  std::vector<Triple> negatives;  // grouped: neg_per_pos per positive
  int neg_per_pos = 0;
};

class NegativeSampler {
 public:
  NegativeSampler(const TripleStore& store, const TrainConfig& config);

  NegativeBatch sample(std::span<const Triple> positives,
                       std::mt19937_64& rng) const;

  // Probability that a corruption of relation r targets the head slot.
  double head_probability(RelationId r) const;

 private:
  EntityId draw_replacement(const Triple& positive, bool corrupt_head,
                            std::mt19937_64& rng) const;

  const TripleStore* store_;
  SamplerKind kind_;
  int neg_per_pos_;
  bool strict_;
  bool type_constrained_;
};

// Sparse gradients: one dense row per touched embedding.
struct GradientSet {
  std::unordered_map<EntityId, std::vector<double>> entities;
  std::unordered_map<RelationId, std::vector<double>> relations;
  std::unordered_map<RelationId, std::vector<double>> tail_relations;
};

EmbeddingTable init_embeddings(const TrainConfig& config,
                               std::size_t num_entities,
                               std::size_t num_relations, std::mt19937_64& rng);

// Cubed per-dimension modulus penalty on one embedding row:
// weight * sum over dimensions of |row_dim|^3. Accumulates the coordinate
// gradient into grad (same layout as row).
double cubed_modulus_penalty(int components, std::span<const double> row,
                             double weight, std::span<double> grad,
                             std::size_t k);

// Logistic loss over the batch plus L2 and cubed-modulus penalties over the
// unique embeddings the batch touches. Gradients cover exactly those
// embeddings. Uses config.workers threads; workers == 1 is the deterministic
// sequential mode.
std::pair<double, GradientSet> loss_and_grad(const EmbeddingTable& table,
                                             const NegativeBatch& batch,
                                             const TrainConfig& config);

// Per coordinate with nonzero gradient g:
//   accumulator += g^2; coordinate -= lr * g / (sqrt(accumulator) + epsilon).
void adagrad_step(EmbeddingTable& table, AdagradState& state,
                  const GradientSet& gradients, double lr);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  std::optional<double> valid_mrr;
};

// "epoch<TAB>loss" with the validation MRR appended when present.
std::string format_log_line(const EpochRecord& record);

struct TrainResult {
  EmbeddingTable table;
  std::vector<EpochRecord> log;
  int best_epoch = -1;     // epoch of the best validation MRR, -1 if never run
  double best_mrr = -1.0;  // best validation MRR, -1 if never evaluated
};

// Full training loop: shuffles train triples each epoch, splits them into
// batch_count batches (the last ones may be short), samples negatives,
// applies Adagrad updates, and evaluates validation MRR every eval_every
// epochs, keeping the best table and stopping after `patience` stagnant
// evaluations. on_epoch, when set, observes each record as it is produced.
TrainResult train(const TripleStore& store, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace hyperkge
