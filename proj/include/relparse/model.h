#ifndef RELPARSE_MODEL_H_
#define RELPARSE_MODEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "relparse/decoder.h"
#include "relparse/encoder.h"
#include "relparse/param_store.h"

namespace relparse {

struct ModelConfig {
  int d = 64;
  int n_heads = 8;
  int n_enc = 2;
  int n_dec = 2;
  int d_ff = 0;  // 0 selects 4·d
  int d_type = 8;
  double dropout_p = 0.1;
  Formulation formulation = Formulation::kEdgeVector;
  int clip_distance = kDefaultClipDistance;
  bool allow_copy_entity = true;
  bool allow_copy_token = false;
  std::uint64_t seed = 1;

  EncoderConfig encoder() const;
  DecoderConfig decoder() const;
  void validate() const;
};

struct Vocabularies {
  Vocab tokens;
  Vocab attributes;
  Vocab outputs;
};

// Encoder, decoder, their parameters and the vocabularies they index.
class Model {
 public:
  Model(ModelConfig cfg, Vocabularies vocabs);
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return cfg_; }
  const Vocabularies& vocabs() const { return vocabs_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const Encoder& encoder() const { return encoder_; }
  const Decoder& decoder() const { return decoder_; }

  // Assigns token and attribute ids from this model's vocabularies.
  void prepare(GraphInput& graph) const;

  EncoderOutput encode(const GraphInput& graph, bool train, std::mt19937_64* rng) const;
  // Greedy decode without recording gradients. `graph` must be prepared.
  std::vector<OutputAction> parse(const GraphInput& graph, int max_len) const;

  // Writes <dir>/model.json (config and vocabularies) and <dir>/model.ckpt.
  void save(const std::string& dir) const;
  static Model load(const std::string& dir);

 private:
  ModelConfig cfg_;
  Vocabularies vocabs_;
  ParamStore params_;
  Encoder encoder_;
  Decoder decoder_;
};

}  // namespace relparse

#endif  // RELPARSE_MODEL_H_
