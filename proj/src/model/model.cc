#include "relparse/model.h"

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "relparse/checkpoint.h"
#include "relparse/errors.h"

namespace relparse {

using json = nlohmann::json;

EncoderConfig ModelConfig::encoder() const {
  EncoderConfig e;
  e.n_layers = n_enc;
  e.d = d;
  e.d_ff = d_ff;
  e.n_heads = n_heads;
  e.dropout_p = dropout_p;
  e.d_type = d_type;
  e.formulation = formulation;
  e.clip_distance = clip_distance;
  return e;
}

DecoderConfig ModelConfig::decoder() const {
  DecoderConfig c;
  c.n_layers = n_dec;
  c.d = d;
  c.d_ff = d_ff;
  c.n_heads = n_heads;
  c.dropout_p = dropout_p;
  c.formulation = formulation;
  c.clip_distance = clip_distance;
  c.allow_copy_entity = allow_copy_entity;
  c.allow_copy_token = allow_copy_token;
  return c;
}

void ModelConfig::validate() const {
  encoder().validate();
  decoder().validate();
  if (dropout_p < 0.0 || dropout_p >= 1.0) throw InputError("dropout must lie in [0, 1)");
}

Model::Model(ModelConfig cfg, Vocabularies vocabs)
    : cfg_(cfg), vocabs_(std::move(vocabs)), params_(cfg.seed) {
  cfg_.validate();
  encoder_ = Encoder(params_, cfg_.encoder(), vocabs_.tokens.size(), vocabs_.attributes.size());
  decoder_ = Decoder(params_, cfg_.decoder(), vocabs_.outputs.size());
}

void Model::prepare(GraphInput& graph) const {
  assign_token_ids(graph, vocabs_.tokens);
  assign_attribute_ids(graph, vocabs_.attributes);
}

EncoderOutput Model::encode(const GraphInput& graph, bool train, std::mt19937_64* rng) const {
  return encoder_.encode(graph, train, rng);
}

std::vector<OutputAction> Model::parse(const GraphInput& graph, int max_len) const {
  NoGradGuard no_grad;
  const EncoderOutput enc = encoder_.encode(graph, false, nullptr);
  return decoder_.greedy_decode(enc, graph, encoder_.embeddings(), max_len);
}

namespace {

json config_to_json(const ModelConfig& c) {
  return {{"d", c.d},
          {"n_heads", c.n_heads},
          {"n_enc", c.n_enc},
          {"n_dec", c.n_dec},
          {"d_ff", c.d_ff},
          {"d_type", c.d_type},
          {"dropout_p", c.dropout_p},
          {"formulation", std::string(formulation_name(c.formulation))},
          {"clip_distance", c.clip_distance},
          {"allow_copy_entity", c.allow_copy_entity},
          {"allow_copy_token", c.allow_copy_token},
          {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.d = j.at("d");
  c.n_heads = j.at("n_heads");
  c.n_enc = j.at("n_enc");
  c.n_dec = j.at("n_dec");
  c.d_ff = j.at("d_ff");
  c.d_type = j.at("d_type");
  c.dropout_p = j.at("dropout_p");
  c.formulation = formulation_from_name(j.at("formulation").get<std::string>());
  c.clip_distance = j.at("clip_distance");
  c.allow_copy_entity = j.at("allow_copy_entity");
  c.allow_copy_token = j.at("allow_copy_token");
  c.seed = j.at("seed");
  return c;
}

json vocab_to_json(const Vocab& v) { return {{"min_count", v.min_count()}, {"symbols", v.symbols()}}; }

Vocab vocab_from_json(const json& j) {
  return Vocab::from_symbols(j.at("symbols").get<std::vector<std::string>>(), j.at("min_count"));
}

}  // namespace

void Model::save(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  const json meta = {{"config", config_to_json(cfg_)},
                     {"vocab", {{"tokens", vocab_to_json(vocabs_.tokens)},
                                {"attributes", vocab_to_json(vocabs_.attributes)},
                                {"outputs", vocab_to_json(vocabs_.outputs)}}}};
  std::ofstream out(std::filesystem::path(dir) / "model.json");
  if (!out) throw InputError("cannot write model metadata in " + dir);
  out << meta.dump(2) << '\n';
  save_checkpoint((std::filesystem::path(dir) / "model.ckpt").string(), params_);
}

Model Model::load(const std::string& dir) {
  const auto meta_path = std::filesystem::path(dir) / "model.json";
  std::ifstream in(meta_path);
  if (!in) throw InputError("missing model metadata: " + meta_path.string());
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("bad model metadata " + meta_path.string() + ": " + e.what());
  }
  Vocabularies vocabs{vocab_from_json(meta.at("vocab").at("tokens")),
                      vocab_from_json(meta.at("vocab").at("attributes")),
                      vocab_from_json(meta.at("vocab").at("outputs"))};
  Model model(config_from_json(meta.at("config")), std::move(vocabs));
  load_checkpoint((std::filesystem::path(dir) / "model.ckpt").string(), model.params_);
  return model;
}

}  // namespace relparse
