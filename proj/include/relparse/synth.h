// Synthetic tasks for desk-scale end-to-end runs.
//
// "flights": utterances naming an origin and a destination city in varied
// templates; gold is ( flight ( from A ) ( to B ) ). Every city candidate has
// the single attribute "city", so only span edges tell the two apart. A
// fraction of examples mention an alias that also names an airport.
//
// "schema": questions over a fixed database whose tables share column names;
// gold is select T.c from T. Columns with equal names are told apart only by
// their column-of edge to the table mentioned in the question.

#ifndef RELPARSE_SYNTH_H_
#define RELPARSE_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "relparse/dataset.h"
#include "relparse/entity_gen.h"

namespace relparse {

struct SynthConfig {
  std::string task = "flights";  // or "schema"
  int n_train = 500;
  int n_dev = 100;
  double ambiguity_rate = 0.3;  // flights only
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthData {
  std::vector<Example> train;
  std::vector<Example> dev;
  Lexicon lexicon;  // flights
  Schema schema;    // schema
  bool uses_schema = false;
};

// Raw (unannotated) examples; deterministic per config. In the flights task
// exactly round(rate · n) examples of each split contain one ambiguous alias,
// and the same fraction of aliases (rounded) is ambiguous.
SynthData synth_dataset(const SynthConfig& cfg);

// Schema used by the "schema" task.
Schema synth_schema();
std::string schema_to_json(const Schema& schema);

}  // namespace relparse

#endif  // RELPARSE_SYNTH_H_
