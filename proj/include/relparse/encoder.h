// Graph encoder: node embeddings followed by stacked layers of
//   u <- LayerNorm(u + Dropout(RelationalAttention(u, edges)))
//   u <- LayerNorm(u + Dropout(FFN(u)))

#ifndef RELPARSE_ENCODER_H_
#define RELPARSE_ENCODER_H_

#include <random>
#include <span>
#include <vector>

#include "relparse/graph_input.h"
#include "relparse/layers.h"
#include "relparse/relational_attention.h"

namespace relparse {

struct EncoderConfig {
  int n_layers = 2;
  int d = 64;
  int d_ff = 0;  // 0 selects 4·d
  int n_heads = 8;
  double dropout_p = 0.1;
  int d_type = 8;
  Formulation formulation = Formulation::kEdgeVector;
  int clip_distance = kDefaultClipDistance;

  int ff_width() const { return d_ff > 0 ? d_ff : 4 * d; }
  void validate() const;
};

struct EncoderOutput {
  Tensor nodes;          // (|x|+|e|)×d, tokens first
  Tensor token_reprs;    // |x|×d (undefined when |x| = 0)
  Tensor entity_reprs;   // |e|×d (undefined when |e| = 0)
  std::size_t num_tokens = 0;
  std::size_t num_entities = 0;
};

// Learned lookup tables for input tokens, entity attributes and node types,
// plus the projection of [embedding ‖ type] back to width d.
class InputEmbeddings {
 public:
  InputEmbeddings() = default;
  InputEmbeddings(ParamStore& params, const EncoderConfig& cfg, std::size_t token_vocab,
                  std::size_t attribute_vocab);

  Tensor tokens(std::span<const int> ids) const { return ops::gather_rows(tokens_, ids); }
  // 1×d mean of the attribute embeddings.
  Tensor attribute_mean(std::span<const int> attribute_ids) const;
  // Projected node representations, tokens then entities.
  Tensor embed_nodes(const GraphInput& graph) const;

 private:
  Tensor tokens_, attributes_, node_type_, projection_;
};

class Encoder {
 public:
  Encoder() = default;
  Encoder(ParamStore& params, EncoderConfig cfg, std::size_t token_vocab,
          std::size_t attribute_vocab);

  const EncoderConfig& config() const { return cfg_; }
  const InputEmbeddings& embeddings() const { return embeddings_; }
  const RelationalAttention& attention(int layer) const { return layers_.at(layer).attention; }

  // Requires token_ids and attribute_ids to be assigned on the graph.
  EncoderOutput encode(const GraphInput& graph, bool train, std::mt19937_64* rng) const;

 private:
  struct Layer {
    RelationalAttention attention;
    LayerNorm norm1;
    FeedForward ffn;
    LayerNorm norm2;
  };

  EncoderConfig cfg_;
  InputEmbeddings embeddings_;
  std::vector<Layer> layers_;
};

}  // namespace relparse

#endif  // RELPARSE_ENCODER_H_
