// Examples and their JSONL encoding.
//
// Raw lines need "utterance" (or "tokens") and "output" (string or array).
// Annotated lines add "entities", "entity_relations", "actions" and
// "dropped", as written by the candidate generator.

#ifndef RELPARSE_DATASET_H_
#define RELPARSE_DATASET_H_

#include <span>
#include <string>
#include <vector>

#include "relparse/decoder.h"
#include "relparse/graph_input.h"

namespace relparse {

struct Example {
  std::string utterance;
  std::vector<std::string> tokens;
  std::vector<std::string> output;
  std::vector<EntityCandidate> entities;
  std::vector<EntityRelation> relations;
  bool annotated = false;
  bool dropped = false;
  // Symbolic actions as written by the generator: {"generate": sym},
  // {"copy_entity": i} or {"copy_token": i}. Kept as text for inspection.
  std::vector<std::string> action_strings;

  GraphInput graph(int clip_distance) const;
};

Example parse_example(const std::string& json_line);
std::string example_to_json(const Example& example);

std::vector<Example> read_examples(const std::string& path);
void write_examples(const std::string& path, std::span<const Example> examples);

// Text form of actions for the annotated file.
std::vector<std::string> describe_actions(std::span<const OutputAction> actions,
                                          const Vocab& output_vocab);

}  // namespace relparse

#endif  // RELPARSE_DATASET_H_
