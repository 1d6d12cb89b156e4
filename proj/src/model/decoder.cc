#include "relparse/decoder.h"

#include <algorithm>
#include <cmath>

#include "relparse/errors.h"

namespace relparse {

std::string action_string(const OutputAction& action) {
  switch (action.kind) {
    case ActionKind::kGenerate:
      return "Generate[" + std::to_string(action.index) + "]";
    case ActionKind::kCopyEntity:
      return "CopyEntity[" + std::to_string(action.index) + "]";
    case ActionKind::kCopyToken:
      return "CopyToken[" + std::to_string(action.index) + "]";
  }
  return "?";
}

void DecoderConfig::validate() const {
  if (n_layers < 1) throw InputError("decoder needs at least one layer");
  AttentionConfig{d, n_heads, formulation, 2 * clip_distance + 1}.validate();
}

std::size_t ActionLayout::flat(const OutputAction& a) const {
  const auto i = static_cast<std::size_t>(a.index);
  switch (a.kind) {
    case ActionKind::kGenerate:
      if (a.index < 0 || i >= n_generate) break;
      return i;
    case ActionKind::kCopyEntity:
      if (a.index < 0 || i >= n_entity) break;
      return n_generate + i;
    case ActionKind::kCopyToken:
      if (a.index < 0 || i >= n_token) break;
      return n_generate + n_entity + i;
  }
  throw InputError("action " + action_string(a) + " out of range for this example");
}

OutputAction ActionLayout::action(std::size_t flat) const {
  if (flat < n_generate) return OutputAction::generate(static_cast<int>(flat));
  flat -= n_generate;
  if (flat < n_entity) return OutputAction::copy_entity(static_cast<int>(flat));
  flat -= n_entity;
  if (flat < n_token) return OutputAction::copy_token(static_cast<int>(flat));
  throw InputError("flat action index out of range");
}

std::vector<double> ActionDistribution::probabilities() const {
  const Tensor p = ops::softmax_rows(logits, &enabled);
  return {p.data().begin(), p.data().end()};
}

OutputAction ActionDistribution::argmax() const {
  std::size_t best = layout.size();
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (!enabled[i]) continue;
    if (best == layout.size() || logits[i] > logits[best]) best = i;
  }
  if (best == layout.size()) throw InvalidMaskError("argmax: no enabled action");
  return layout.action(best);
}

std::vector<int> decoder_time_labels(std::size_t steps, int clip_distance) {
  std::vector<int> labels(steps * steps);
  for (std::size_t i = 0; i < steps; ++i)
    for (std::size_t j = 0; j < steps; ++j) {
      const int rel = static_cast<int>(j) - static_cast<int>(i);
      labels[i * steps + j] = std::clamp(rel, -clip_distance, clip_distance) + clip_distance;
    }
  return labels;
}

ops::Mask causal_mask(std::size_t steps) {
  ops::Mask mask(steps * steps, 0);
  for (std::size_t i = 0; i < steps; ++i)
    for (std::size_t j = 0; j <= i; ++j) mask[i * steps + j] = 1;
  return mask;
}

Decoder::Decoder(ParamStore& params, DecoderConfig cfg, std::size_t output_vocab)
    : cfg_(cfg), output_vocab_(output_vocab) {
  cfg_.validate();
  const auto d = static_cast<std::size_t>(cfg_.d);
  output_embed_ = params.add_uniform("decoder.output_embed", {output_vocab, d});
  bos_ = params.add_uniform("decoder.bos", {1, d});
  copy_entity_proj_ = params.add_uniform("decoder.copy_entity_proj", {d, d});
  copy_token_proj_ = params.add_uniform("decoder.copy_token_proj", {d, d});
  w_out_ = params.add_uniform("decoder.w_out", {output_vocab, d});
  w_entity_ = params.add_uniform("decoder.W_e", {d, d});
  w_token_ = params.add_uniform("decoder.W_x", {d, d});
  const AttentionConfig self{cfg_.d, cfg_.n_heads, cfg_.formulation, 2 * cfg_.clip_distance + 1,
                             cfg_.dropout_p};
  const AttentionConfig cross{cfg_.d, cfg_.n_heads, Formulation::kVanilla, 1, cfg_.dropout_p};
  for (int n = 0; n < cfg_.n_layers; ++n) {
    const std::string prefix = "decoder.layer" + std::to_string(n);
    Layer layer;
    layer.self_attn = RelationalAttention(params, prefix + ".attn", self);
    layer.norm1 = LayerNorm(params, prefix + ".norm1", cfg_.d);
    layer.cross_attn = RelationalAttention(params, prefix + ".cross", cross);
    layer.norm2 = LayerNorm(params, prefix + ".norm2", cfg_.d);
    layer.ffn = FeedForward(params, prefix + ".ffn", cfg_.d, cfg_.ff_width());
    layer.norm3 = LayerNorm(params, prefix + ".norm3", cfg_.d);
    layers_.push_back(std::move(layer));
  }
}

Tensor Decoder::embed_action(const OutputAction& action, const GraphInput& graph,
                             const InputEmbeddings& embeddings) const {
  const auto i = static_cast<std::size_t>(action.index);
  switch (action.kind) {
    case ActionKind::kGenerate: {
      if (action.index < 0 || i >= output_vocab_) break;
      const int id[] = {action.index};
      return ops::gather_rows(output_embed_, id);
    }
    case ActionKind::kCopyEntity:
      if (action.index < 0 || i >= graph.attribute_ids.size()) break;
      return ops::matmul_t(embeddings.attribute_mean(graph.attribute_ids[i]), copy_entity_proj_);
    case ActionKind::kCopyToken: {
      if (action.index < 0 || i >= graph.token_ids.size()) break;
      const int id[] = {graph.token_ids[i]};
      return ops::matmul_t(embeddings.tokens(id), copy_token_proj_);
    }
  }
  throw InputError("embed_action: " + action_string(action) + " out of range for this example");
}

Tensor Decoder::states(std::span<const OutputAction> prefix, const EncoderOutput& enc,
                       const GraphInput& graph, const InputEmbeddings& embeddings, bool train,
                       std::mt19937_64* rng) const {
  if (!enc.nodes.defined() || enc.nodes.rows() == 0) {
    throw InputError("decoder: empty encoder output");
  }
  std::vector<Tensor> inputs;
  inputs.reserve(prefix.size() + 1);
  inputs.push_back(bos_);
  for (const auto& a : prefix) inputs.push_back(embed_action(a, graph, embeddings));
  Tensor u = ops::concat_rows(inputs);
  const std::size_t steps = u.rows();
  const std::vector<int> labels = decoder_time_labels(steps, cfg_.clip_distance);
  const ops::Mask mask = causal_mask(steps);
  for (const Layer& layer : layers_) {
    u = residual_norm(u, layer.self_attn.self_attention(u, labels, &mask, train, rng), layer.norm1,
                      cfg_.dropout_p, train, rng);
    u = residual_norm(u, layer.cross_attn.forward(u, enc.nodes, {}, nullptr, train, rng),
                      layer.norm2, cfg_.dropout_p, train, rng);
    u = residual_norm(u, layer.ffn(u), layer.norm3, cfg_.dropout_p, train, rng);
  }
  return u;
}

ActionLayout Decoder::layout(const GraphInput& graph) const {
  return {output_vocab_, graph.num_entities(), graph.num_tokens()};
}

ops::Mask Decoder::enabled_mask(const ActionLayout& layout, std::size_t rows) const {
  ops::Mask row(layout.size(), 0);
  std::fill_n(row.begin(), layout.n_generate, 1);
  if (cfg_.allow_copy_entity)
    std::fill_n(row.begin() + layout.n_generate, layout.n_entity, 1);
  if (cfg_.allow_copy_token)
    std::fill_n(row.begin() + layout.n_generate + layout.n_entity, layout.n_token, 1);
  ops::Mask mask;
  mask.reserve(rows * row.size());
  for (std::size_t r = 0; r < rows; ++r) mask.insert(mask.end(), row.begin(), row.end());
  return mask;
}

Tensor Decoder::action_logits(const Tensor& z, const EncoderOutput& enc,
                              const GraphInput& graph) const {
  std::vector<Tensor> blocks;
  blocks.push_back(ops::matmul_t(z, w_out_));
  if (graph.num_entities() > 0) {
    blocks.push_back(cfg_.allow_copy_entity
                         ? ops::matmul_t(ops::matmul(z, w_entity_), enc.entity_reprs)
                         : Tensor::zeros({z.rows(), graph.num_entities()}));
  }
  if (graph.num_tokens() > 0) {
    blocks.push_back(cfg_.allow_copy_token
                         ? ops::matmul_t(ops::matmul(z, w_token_), enc.token_reprs)
                         : Tensor::zeros({z.rows(), graph.num_tokens()}));
  }
  return blocks.size() == 1 ? blocks.front() : ops::concat_cols(blocks);
}

ActionDistribution Decoder::step(std::span<const OutputAction> prefix, const EncoderOutput& enc,
                                 const GraphInput& graph, const InputEmbeddings& embeddings) const {
  const Tensor z = states(prefix, enc, graph, embeddings, false, nullptr);
  const Tensor last = ops::slice_rows(z, z.rows() - 1, z.rows());
  ActionDistribution dist;
  dist.layout = layout(graph);
  dist.logits = action_logits(last, enc, graph);
  dist.enabled = enabled_mask(dist.layout, 1);
  return dist;
}

std::vector<OutputAction> Decoder::greedy_decode(const EncoderOutput& enc, const GraphInput& graph,
                                                 const InputEmbeddings& embeddings,
                                                 int max_len) const {
  std::vector<OutputAction> actions;
  const OutputAction eos = OutputAction::generate(Vocab::kEos);
  while (static_cast<int>(actions.size()) < max_len) {
    const OutputAction next = step(actions, enc, graph, embeddings).argmax();
    if (next == eos) break;
    actions.push_back(next);
  }
  return actions;
}

std::vector<std::string> actions_to_logical_form(std::span<const OutputAction> actions,
                                                 const GraphInput& graph,
                                                 const Vocab& output_vocab) {
  std::vector<std::string> symbols;
  symbols.reserve(actions.size());
  for (const auto& a : actions) {
    switch (a.kind) {
      case ActionKind::kGenerate:
        symbols.push_back(output_vocab.symbol(a.index));
        break;
      case ActionKind::kCopyEntity:
        symbols.push_back(graph.entities.at(a.index).entity_id);
        break;
      case ActionKind::kCopyToken:
        symbols.push_back(graph.token_strings.at(a.index));
        break;
    }
  }
  return symbols;
}

}  // namespace relparse
