#include "relparse/encoder.h"

#include "relparse/errors.h"

namespace relparse {

void EncoderConfig::validate() const {
  if (n_layers < 1) throw InputError("encoder needs at least one layer");
  if (d_type < 1) throw InputError("node-type embedding width must be positive");
  AttentionConfig{d, n_heads, formulation, edge_label_count(clip_distance)}.validate();
}

InputEmbeddings::InputEmbeddings(ParamStore& params, const EncoderConfig& cfg,
                                 std::size_t token_vocab, std::size_t attribute_vocab) {
  const auto d = static_cast<std::size_t>(cfg.d), dt = static_cast<std::size_t>(cfg.d_type);
  tokens_ = params.add_uniform("embed.tokens", {token_vocab, d});
  attributes_ = params.add_uniform("embed.attributes", {attribute_vocab, d});
  node_type_ = params.add_uniform("embed.node_type", {2, dt});
  projection_ = params.add_uniform("embed.projection", {d, d + dt});
}

Tensor InputEmbeddings::attribute_mean(std::span<const int> attribute_ids) const {
  if (attribute_ids.empty()) throw InputError("entity without attributes");
  return ops::mean_rows(ops::gather_rows(attributes_, attribute_ids));
}

Tensor InputEmbeddings::embed_nodes(const GraphInput& graph) const {
  if (graph.token_ids.size() != graph.num_tokens() ||
      graph.attribute_ids.size() != graph.num_entities()) {
    throw InputError("embed_nodes: token/attribute ids not assigned");
  }
  std::vector<Tensor> rows;
  if (graph.num_tokens() > 0) {
    const std::vector<int> type(graph.num_tokens(), 0);
    const Tensor parts[] = {tokens(graph.token_ids), ops::gather_rows(node_type_, type)};
    rows.push_back(ops::concat_cols(parts));
  }
  if (graph.num_entities() > 0) {
    std::vector<Tensor> means;
    for (const auto& ids : graph.attribute_ids) means.push_back(attribute_mean(ids));
    const std::vector<int> type(graph.num_entities(), 1);
    const Tensor parts[] = {ops::concat_rows(means), ops::gather_rows(node_type_, type)};
    rows.push_back(ops::concat_cols(parts));
  }
  if (rows.empty()) throw InputError("embed_nodes: graph has no nodes");
  return ops::matmul_t(ops::concat_rows(rows), projection_);
}

Encoder::Encoder(ParamStore& params, EncoderConfig cfg, std::size_t token_vocab,
                 std::size_t attribute_vocab)
    : cfg_(cfg), embeddings_(params, cfg_, token_vocab, attribute_vocab) {
  cfg_.validate();
  const AttentionConfig attn{cfg_.d, cfg_.n_heads, cfg_.formulation,
                             edge_label_count(cfg_.clip_distance), cfg_.dropout_p};
  for (int n = 0; n < cfg_.n_layers; ++n) {
    const std::string prefix = "encoder.layer" + std::to_string(n);
    Layer layer;
    layer.attention = RelationalAttention(params, prefix + ".attn", attn);
    layer.norm1 = LayerNorm(params, prefix + ".norm1", cfg_.d);
    layer.ffn = FeedForward(params, prefix + ".ffn", cfg_.d, cfg_.ff_width());
    layer.norm2 = LayerNorm(params, prefix + ".norm2", cfg_.d);
    layers_.push_back(std::move(layer));
  }
}

EncoderOutput Encoder::encode(const GraphInput& graph, bool train, std::mt19937_64* rng) const {
  if (graph.clip_distance != cfg_.clip_distance) {
    throw InputError("graph clip distance " + std::to_string(graph.clip_distance) +
                     " does not match encoder clip distance " + std::to_string(cfg_.clip_distance));
  }
  const std::vector<int> labels = graph.label_indices();
  Tensor u = embeddings_.embed_nodes(graph);
  for (const Layer& layer : layers_) {
    u = residual_norm(u, layer.attention.self_attention(u, labels, nullptr, train, rng), layer.norm1,
                      cfg_.dropout_p, train, rng);
    u = residual_norm(u, layer.ffn(u), layer.norm2, cfg_.dropout_p, train, rng);
  }
  EncoderOutput out;
  out.nodes = u;
  out.num_tokens = graph.num_tokens();
  out.num_entities = graph.num_entities();
  if (out.num_tokens > 0) out.token_reprs = ops::slice_rows(u, 0, out.num_tokens);
  if (out.num_entities > 0) out.entity_reprs = ops::slice_rows(u, out.num_tokens, u.rows());
  return out;
}

}  // namespace relparse
