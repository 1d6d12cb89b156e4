#include "relparse/training.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "relparse/errors.h"

namespace relparse {

void TrainConfig::validate() const {
  if (batch_size < 1) throw InputError("batch_size must be at least 1");
  if (warmup_steps < 1) throw InputError("warmup_steps must be at least 1");
  if (max_steps < 0) throw InputError("max_steps must be non-negative");
  if (eval_every < 1) throw InputError("eval_every must be at least 1");
  if (patience < 1) throw InputError("patience must be at least 1");
  if (!(lr_scale > 0.0)) throw InputError("lr_scale must be positive");
  if (max_decode_len < 0) throw InputError("max_decode_len must be non-negative");
}

double lr_schedule(int step, int d, int warmup, double scale) {
  if (step < 1) throw InputError("lr_schedule: step must be at least 1");
  if (d < 1 || warmup < 1) throw InputError("lr_schedule: d and warmup must be positive");
  const double s = step;
  return scale / std::sqrt(static_cast<double>(d)) *
         std::min(1.0 / std::sqrt(s), s * std::pow(static_cast<double>(warmup), -1.5));
}

std::vector<std::vector<int>> gold_action_sets(std::span<const OutputAction> actions,
                                               const GraphInput& graph, const ActionLayout& layout) {
  std::vector<std::vector<int>> sets;
  sets.reserve(actions.size());
  for (const auto& a : actions) {
    std::vector<int> set;
    switch (a.kind) {
      case ActionKind::kGenerate:
        set.push_back(static_cast<int>(layout.flat(a)));
        break;
      case ActionKind::kCopyEntity: {
        const std::string& id = graph.entities.at(a.index).entity_id;
        for (std::size_t j = 0; j < graph.num_entities(); ++j)
          if (graph.entities[j].entity_id == id)
            set.push_back(static_cast<int>(layout.flat(OutputAction::copy_entity(static_cast<int>(j)))));
        break;
      }
      case ActionKind::kCopyToken: {
        const std::string& tok = graph.token_strings.at(a.index);
        for (std::size_t j = 0; j < graph.num_tokens(); ++j)
          if (graph.token_strings[j] == tok)
            set.push_back(static_cast<int>(layout.flat(OutputAction::copy_token(static_cast<int>(j)))));
        break;
      }
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

Tensor sequence_loss(const Model& model, const PreparedExample& example, bool train,
                     std::mt19937_64* rng) {
  if (example.dropped) throw InputError("sequence_loss: example was dropped during preprocessing");
  const GraphInput& g = example.graph;
  const Decoder& dec = model.decoder();
  const EncoderOutput enc = model.encode(g, train, rng);
  const Tensor z = dec.states(example.actions, enc, g, model.encoder().embeddings(), train, rng);
  const ActionLayout layout = dec.layout(g);
  auto sets = gold_action_sets(example.actions, g, layout);
  sets.push_back({static_cast<int>(layout.flat(OutputAction::generate(Vocab::kEos)))});
  return ops::marginal_nll(dec.action_logits(z, enc, g), dec.enabled_mask(layout, z.rows()), sets);
}

Tensor batch_loss(const Model& model, std::span<const PreparedExample* const> batch, bool train,
                  std::mt19937_64* rng) {
  if (batch.empty()) throw InputError("batch_loss: empty batch");
  Tensor total;
  for (const PreparedExample* ex : batch) {
    const Tensor l = sequence_loss(model, *ex, train, rng);
    total = total.defined() ? ops::add(total, l) : l;
  }
  return ops::scale(total, 1.0 / static_cast<double>(batch.size()));
}

TrainResult train(Model& model, std::span<const PreparedExample> train_set,
                  std::span<const PreparedExample> dev_set, const TrainConfig& cfg,
                  AdamState& adam, std::ostream* metrics) {
  cfg.validate();
  std::vector<const PreparedExample*> pool;
  std::size_t longest = 0;
  for (const auto& ex : train_set) {
    if (ex.dropped) continue;
    pool.push_back(&ex);
    longest = std::max(longest, ex.actions.size());
  }
  if (pool.empty()) throw InputError("no training examples left after dropping");

  EvalOptions eval_options;
  eval_options.max_decode_len =
      cfg.max_decode_len > 0 ? cfg.max_decode_len : static_cast<int>(2 * longest + 2);

  std::mt19937_64 order_rng(cfg.seed);
  std::mt19937_64 dropout_rng(cfg.seed * 0x9E3779B97F4A7C15ULL + 1);
  std::vector<std::size_t> order(pool.size());
  std::size_t cursor = order.size();

  TrainResult result;
  double window_sum = 0.0;
  int window_n = 0;
  double lr = 0.0;
  auto record = [&](int step) {
    const double acc = dev_set.empty() ? 0.0 : evaluate(model, dev_set, eval_options).accuracy;
    TrainRecord r{step, window_n > 0 ? window_sum / window_n : 0.0, lr, acc};
    if (metrics) {
      *metrics << nlohmann::json{{"step", r.step}, {"loss", r.loss}, {"lr", r.lr}, {"dev_accuracy", r.dev_accuracy}}
                      .dump()
               << '\n';
      metrics->flush();
    }
    result.log.push_back(r);
    window_sum = 0.0;
    window_n = 0;
    return acc;
  };

  const int d = model.config().d;
  const double inv_b = 1.0 / static_cast<double>(cfg.batch_size);
  double best = -1.0;
  int stale = 0;
  int step = 0;
  while (step < cfg.max_steps) {
    ++step;
    lr = lr_schedule(static_cast<int>(adam.step_count) + 1, d, cfg.warmup_steps, cfg.lr_scale);
    double total = 0.0;
    for (int b = 0; b < cfg.batch_size; ++b) {
      if (cursor == order.size()) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), order_rng);
        cursor = 0;
      }
      const Tensor loss = sequence_loss(model, *pool[order[cursor++]], true, &dropout_rng);
      total += loss.item();
      ops::scale(loss, inv_b).backward();
    }
    adam_step(model.params(), adam, lr);
    result.step_losses.push_back(total * inv_b);
    window_sum += total * inv_b;
    ++window_n;

    if (step % cfg.eval_every == 0) {
      const double acc = record(step);
      if (acc > best) {
        best = acc;
        stale = 0;
      } else {
        ++stale;
      }
      if (acc >= cfg.target_accuracy || stale >= cfg.patience) {
        result.stopped_early = step < cfg.max_steps;
        break;
      }
    }
  }
  if (result.log.empty() || result.log.back().step != step) record(step);

  result.steps = step;
  result.final_dev_accuracy = result.log.back().dev_accuracy;
  for (const auto& r : result.log) result.best_dev_accuracy = std::max(result.best_dev_accuracy, r.dev_accuracy);
  return result;
}

}  // namespace relparse
