// Teacher-forced loss with entity-marginalized likelihood, the warmup/decay
// learning-rate schedule, and the training loop with early stopping.

#ifndef RELPARSE_TRAINING_H_
#define RELPARSE_TRAINING_H_

#include <cstdint>
#include <ostream>
#include <random>
#include <span>
#include <vector>

#include "relparse/adam.h"
#include "relparse/evaluation.h"
#include "relparse/model.h"
#include "relparse/pipeline.h"

namespace relparse {

struct TrainConfig {
  int batch_size = 8;
  double lr_scale = 1.0;
  int warmup_steps = 200;
  int max_steps = 3000;
  int eval_every = 100;
  int patience = 10;
  // Stop as soon as dev accuracy reaches this value; above 1 disables it.
  double target_accuracy = 2.0;
  // Decoding limit during dev evaluation; 0 picks 2 × longest training
  // sequence + 2.
  int max_decode_len = 0;
  std::uint64_t seed = 1;

  void validate() const;
};

// scale · d^-0.5 · min(step^-0.5, step · warmup^-1.5); step ≥ 1.
double lr_schedule(int step, int d, int warmup, double scale = 1.0);

// Flat indices of every action that yields the same output symbol as the gold
// action: all candidates sharing the entity id, or all equal input tokens.
std::vector<std::vector<int>> gold_action_sets(std::span<const OutputAction> actions,
                                               const GraphInput& graph, const ActionLayout& layout);

// Mean over steps (gold actions then EOS) of the marginal negative log
// likelihood. Throws InputError for dropped examples.
Tensor sequence_loss(const Model& model, const PreparedExample& example, bool train,
                     std::mt19937_64* rng);

// Mean of per-example losses.
Tensor batch_loss(const Model& model, std::span<const PreparedExample* const> batch, bool train,
                  std::mt19937_64* rng);

struct TrainRecord {
  int step = 0;
  double loss = 0.0;  // mean training loss since the previous record
  double lr = 0.0;
  double dev_accuracy = 0.0;
};

struct TrainResult {
  int steps = 0;
  double final_dev_accuracy = 0.0;
  double best_dev_accuracy = 0.0;
  bool stopped_early = false;
  std::vector<TrainRecord> log;
  std::vector<double> step_losses;
};

// Shuffled mini-batches; evaluates on dev every eval_every steps (and at the
// end) and stops after `patience` evaluations without improvement. The model
// keeps its final parameters. Dropped examples are skipped; throws InputError
// if none remain. Each record is written as a JSON line to `metrics` if given.
TrainResult train(Model& model, std::span<const PreparedExample> train_set,
                  std::span<const PreparedExample> dev_set, const TrainConfig& cfg,
                  AdamState& adam, std::ostream* metrics = nullptr);

}  // namespace relparse

#endif  // RELPARSE_TRAINING_H_
