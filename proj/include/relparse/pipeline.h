// Glue between raw examples, candidate generators and the model: annotation,
// vocabulary construction, and conversion to graph inputs with gold actions.

#ifndef RELPARSE_PIPELINE_H_
#define RELPARSE_PIPELINE_H_

#include <set>
#include <span>
#include <string>
#include <vector>

#include "relparse/dataset.h"
#include "relparse/entity_gen.h"
#include "relparse/model.h"

namespace relparse {

struct CandidateSource {
  const Lexicon* lexicon = nullptr;
  const Schema* schema = nullptr;
  double threshold = kSchemaAlignThreshold;

  std::set<std::string> known_entities() const;
  std::vector<EntityCandidate> candidates(std::span<const std::string> tokens,
                                          std::vector<EntityRelation>& relations) const;
};

struct AnnotationStats {
  std::size_t n_examples = 0;
  std::size_t n_ambiguous = 0;  // some span claimed by ≥2 candidates
  std::size_t n_dropped = 0;
  std::size_t n_candidates = 0;

  double ambiguous_fraction() const {
    return n_examples == 0 ? 0.0 : static_cast<double>(n_ambiguous) / static_cast<double>(n_examples);
  }
};

// Fills entities, relations (span overlaps, then schema relations, which win
// on conflicting pairs), gold actions and the dropped flag.
void annotate_example(Example& example, const CandidateSource& source);
AnnotationStats annotate_examples(std::vector<Example>& examples, const CandidateSource& source);

struct Ablation {
  bool span_edges = false;
  bool entity_relation_edges = false;
};

void apply_ablation(GraphInput& graph, const Ablation& ablation);

// Input tokens with at least token_min_count occurrences, every attribute,
// and every gold symbol of kept examples that is not a candidate id.
Vocabularies build_vocabularies(std::span<const Example> train, int token_min_count = 2);

struct PreparedExample {
  GraphInput graph;  // ids assigned, ablation applied
  std::vector<std::string> gold;
  std::vector<OutputAction> actions;  // empty when dropped
  bool dropped = false;
};

PreparedExample prepare_example(const Model& model, const Example& example,
                                const Ablation& ablation = {});
std::vector<PreparedExample> prepare_examples(const Model& model, std::span<const Example> examples,
                                              const Ablation& ablation = {});

}  // namespace relparse

#endif  // RELPARSE_PIPELINE_H_
