#include "relparse/pipeline.h"

#include <algorithm>

#include "relparse/errors.h"

namespace relparse {

std::set<std::string> CandidateSource::known_entities() const {
  std::set<std::string> ids;
  if (lexicon) ids = lexicon->entity_ids();
  if (schema) ids.merge(schema->entity_ids());
  return ids;
}

std::vector<EntityCandidate> CandidateSource::candidates(
    std::span<const std::string> tokens, std::vector<EntityRelation>& relations) const {
  std::vector<EntityCandidate> out;
  std::vector<EntityRelation> structural;
  if (lexicon) out = lexicon_match(tokens, *lexicon);
  if (schema) {
    SchemaAlignment aligned = schema_align(tokens, *schema, threshold);
    const int offset = static_cast<int>(out.size());
    for (auto r : aligned.relations) {
      r.from += offset;
      r.to += offset;
      structural.push_back(r);
    }
    out.insert(out.end(), aligned.candidates.begin(), aligned.candidates.end());
  }
  relations = overlap_relations(out);
  relations.insert(relations.end(), structural.begin(), structural.end());
  return out;
}

void annotate_example(Example& example, const CandidateSource& source) {
  example.entities = source.candidates(example.tokens, example.relations);
  example.annotated = true;

  const std::set<std::string> known = source.known_entities();
  Vocab local;
  for (const auto& s : example.output) {
    const bool is_candidate =
        std::any_of(example.entities.begin(), example.entities.end(),
                    [&](const EntityCandidate& c) { return c.entity_id == s; });
    if (!is_candidate && !known.count(s)) local.add(s);
  }
  const PreprocessedOutput pre = preprocess_output(example.output, example.entities, known, local);
  example.dropped = pre.dropped;
  example.action_strings = describe_actions(pre.actions, local);
}

AnnotationStats annotate_examples(std::vector<Example>& examples, const CandidateSource& source) {
  AnnotationStats stats;
  for (auto& ex : examples) {
    annotate_example(ex, source);
    ++stats.n_examples;
    stats.n_candidates += ex.entities.size();
    if (has_ambiguous_span(ex.entities)) ++stats.n_ambiguous;
    if (ex.dropped) ++stats.n_dropped;
  }
  return stats;
}

void apply_ablation(GraphInput& graph, const Ablation& ablation) {
  if (ablation.span_edges) ablate_span_edges(graph);
  if (ablation.entity_relation_edges) ablate_entity_relation_edges(graph);
}

namespace {

Vocab build_or_empty(const std::vector<std::vector<std::string>>& corpus, int min_count) {
  const bool any = std::any_of(corpus.begin(), corpus.end(), [](const auto& v) { return !v.empty(); });
  return any ? Vocab::build(corpus, min_count) : Vocab::from_symbols(Vocab().symbols(), min_count);
}

}  // namespace

Vocabularies build_vocabularies(std::span<const Example> train, int token_min_count) {
  std::vector<std::vector<std::string>> tokens, attributes, outputs;
  std::set<std::string> candidate_ids;
  for (const auto& ex : train)
    for (const auto& c : ex.entities) candidate_ids.insert(c.entity_id);
  for (const auto& ex : train) {
    tokens.push_back(ex.tokens);
    for (const auto& c : ex.entities) attributes.push_back(c.attributes);
    if (ex.dropped) continue;
    std::vector<std::string> symbols;
    for (const auto& s : ex.output)
      if (!candidate_ids.count(s)) symbols.push_back(s);
    outputs.push_back(std::move(symbols));
  }
  return {build_or_empty(tokens, token_min_count), build_or_empty(attributes, 1),
          build_or_empty(outputs, 1)};
}

PreparedExample prepare_example(const Model& model, const Example& example,
                                const Ablation& ablation) {
  PreparedExample p;
  p.graph = example.graph(model.config().clip_distance);
  model.prepare(p.graph);
  apply_ablation(p.graph, ablation);
  p.gold = example.output;
  p.dropped = example.dropped;
  if (!p.dropped) {
    const PreprocessedOutput pre =
        preprocess_output(example.output, example.entities, {}, model.vocabs().outputs,
                          example.tokens, model.config().allow_copy_token);
    p.actions = pre.actions;
  }
  return p;
}

std::vector<PreparedExample> prepare_examples(const Model& model, std::span<const Example> examples,
                                              const Ablation& ablation) {
  std::vector<PreparedExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(prepare_example(model, ex, ablation));
  return out;
}

}  // namespace relparse
