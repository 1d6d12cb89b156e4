// Auto-regressive decoder with a joint action space.
//
// Each decoder layer applies relational self-attention over previous steps
// (relative-timestep labels, causal mask), attention over the concatenated
// encoder outputs [tokens ‖ entities] with one softmax, and a feed-forward
// block. The final state z_j scores three action families:
//   Generate[i]   z_j · w_out_i
//   CopyEntity[i] (z_j W_e) · enc_entity_i
//   CopyToken[i]  (z_j W_x) · enc_token_i
// normalized together by a single softmax.

#ifndef RELPARSE_DECODER_H_
#define RELPARSE_DECODER_H_

#include <compare>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "relparse/encoder.h"

namespace relparse {

enum class ActionKind { kGenerate, kCopyEntity, kCopyToken };

struct OutputAction {
  ActionKind kind = ActionKind::kGenerate;
  int index = 0;

  static OutputAction generate(int i) { return {ActionKind::kGenerate, i}; }
  static OutputAction copy_entity(int i) { return {ActionKind::kCopyEntity, i}; }
  static OutputAction copy_token(int i) { return {ActionKind::kCopyToken, i}; }
  bool operator==(const OutputAction&) const = default;
};

std::string action_string(const OutputAction& action);

struct DecoderConfig {
  int n_layers = 2;
  int d = 64;  // also the width of z_j
  int d_ff = 0;
  int n_heads = 8;
  double dropout_p = 0.1;
  Formulation formulation = Formulation::kEdgeVector;
  int clip_distance = kDefaultClipDistance;
  bool allow_copy_entity = true;
  bool allow_copy_token = false;

  int ff_width() const { return d_ff > 0 ? d_ff : 4 * d; }
  void validate() const;
};

// Flat action layout: [Generate 0..V) [CopyEntity 0..E) [CopyToken 0..X).
struct ActionLayout {
  std::size_t n_generate = 0;
  std::size_t n_entity = 0;
  std::size_t n_token = 0;

  std::size_t size() const { return n_generate + n_entity + n_token; }
  std::size_t flat(const OutputAction& a) const;
  OutputAction action(std::size_t flat) const;
};

struct ActionDistribution {
  Tensor logits;  // 1×A
  ops::Mask enabled;
  ActionLayout layout;

  std::vector<double> probabilities() const;
  // Highest enabled logit; ties go to the lowest flat index.
  OutputAction argmax() const;
};

class Decoder {
 public:
  Decoder() = default;
  Decoder(ParamStore& params, DecoderConfig cfg, std::size_t output_vocab);

  const DecoderConfig& config() const { return cfg_; }
  std::size_t output_vocab_size() const { return output_vocab_; }
  const RelationalAttention& self_attention(int layer) const { return layers_.at(layer).self_attn; }
  const RelationalAttention& cross_attention(int layer) const { return layers_.at(layer).cross_attn; }

  // Decoder input for the step after `action`.
  Tensor embed_action(const OutputAction& action, const GraphInput& graph,
                      const InputEmbeddings& embeddings) const;
  Tensor embed_bos() const { return bos_; }

  // States z for inputs [BOS, prefix...]; one row per input position.
  Tensor states(std::span<const OutputAction> prefix, const EncoderOutput& enc,
                const GraphInput& graph, const InputEmbeddings& embeddings, bool train,
                std::mt19937_64* rng) const;

  ActionLayout layout(const GraphInput& graph) const;
  // Per-row enabled flags for `rows` steps.
  ops::Mask enabled_mask(const ActionLayout& layout, std::size_t rows) const;
  // Logits (rows × A) for a block of decoder states.
  Tensor action_logits(const Tensor& z, const EncoderOutput& enc, const GraphInput& graph) const;

  // Distribution over the next action after `prefix`.
  ActionDistribution step(std::span<const OutputAction> prefix, const EncoderOutput& enc,
                          const GraphInput& graph, const InputEmbeddings& embeddings) const;

  // Greedy search until Generate(EOS) or max_len actions. EOS is not returned.
  std::vector<OutputAction> greedy_decode(const EncoderOutput& enc, const GraphInput& graph,
                                          const InputEmbeddings& embeddings, int max_len) const;

 private:
  struct Layer {
    RelationalAttention self_attn;
    LayerNorm norm1;
    RelationalAttention cross_attn;
    LayerNorm norm2;
    FeedForward ffn;
    LayerNorm norm3;
  };

  DecoderConfig cfg_;
  std::size_t output_vocab_ = 0;
  Tensor output_embed_, bos_, copy_entity_proj_, copy_token_proj_;
  Tensor w_out_, w_entity_, w_token_;
  std::vector<Layer> layers_;
};

// Relative-timestep labels (clipped j−i shifted into [0, 2δ]) and the causal
// mask for a decoder block of `steps` positions.
std::vector<int> decoder_time_labels(std::size_t steps, int clip_distance);
ops::Mask causal_mask(std::size_t steps);

// Maps actions to output symbols: vocabulary symbol, entity id, or token.
std::vector<std::string> actions_to_logical_form(std::span<const OutputAction> actions,
                                                 const GraphInput& graph, const Vocab& output_vocab);

}  // namespace relparse

#endif  // RELPARSE_DECODER_H_
