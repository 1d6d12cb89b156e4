// The input graph for one example: utterance tokens, entity candidates and
// a total edge-label matrix over the combined node sequence (tokens first,
// then entities).

#ifndef RELPARSE_GRAPH_INPUT_H_
#define RELPARSE_GRAPH_INPUT_H_

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "relparse/vocab.h"

namespace relparse {

inline constexpr int kDefaultClipDistance = 8;

// Entity-entity relation registry.
enum Relation : int {
  kGeneric = 0,
  kSpanOverlap = 1,
  kColumnOf = 2,
  kTableOf = 3,
  kForeignKey = 4,
  kForeignKeyReverse = 5,
};
inline constexpr int kNumRelations = 6;

std::string_view relation_name(int relation_id);
// Throws InputError for unknown names.
int relation_from_name(std::string_view name);

// Half-open token range [start, end).
struct Span {
  int start = 0;
  int end = 0;
  bool contains(int token) const { return token >= start && token < end; }
  bool operator==(const Span&) const = default;
  auto operator<=>(const Span&) const = default;
};

struct EntityCandidate {
  std::string entity_id;
  std::vector<std::string> attributes;
  std::vector<Span> spans;

  bool covers(int token) const;
  bool operator==(const EntityCandidate&) const = default;
};

struct TokTok {
  int rel_pos = 0;
  bool operator==(const TokTok&) const = default;
};
struct TokEnt {
  bool in_span = false;
  bool operator==(const TokEnt&) const = default;
};
struct EntTok {
  bool in_span = false;
  bool operator==(const EntTok&) const = default;
};
struct EntEnt {
  int relation_id = kGeneric;
  bool operator==(const EntEnt&) const = default;
};
using EdgeLabel = std::variant<TokTok, TokEnt, EntTok, EntEnt>;

// Dense label ids: TokTok(-δ..δ), TokEnt(no/yes), EntTok(no/yes), EntEnt(relations).
int edge_label_count(int clip_distance);
int edge_label_index(const EdgeLabel& label, int clip_distance);
std::string edge_label_string(const EdgeLabel& label);

// Directed entity-entity relation between candidate indices.
struct EntityRelation {
  int from = 0;
  int to = 0;
  int relation = kGeneric;
  bool operator==(const EntityRelation&) const = default;
};

struct GraphInput {
  std::vector<int> token_ids;                   // filled by assign_token_ids
  std::vector<std::vector<int>> attribute_ids;  // filled by assign_attribute_ids
  std::vector<std::string> token_strings;
  std::vector<EntityCandidate> entities;
  std::vector<EntityRelation> relations;
  int clip_distance = kDefaultClipDistance;
  std::vector<EdgeLabel> edges;  // row-major, node_count() squared

  std::size_t num_tokens() const { return token_strings.size(); }
  std::size_t num_entities() const { return entities.size(); }
  std::size_t node_count() const { return num_tokens() + num_entities(); }
  const EdgeLabel& edge(std::size_t i, std::size_t j) const { return edges[i * node_count() + j]; }
  // Dense label ids for the whole matrix.
  std::vector<int> label_indices() const;
};

// Whitespace split with lowercasing.
std::vector<std::string> tokenize(std::string_view utterance);

// Builds the total edge matrix. Throws InputError for spans outside the
// utterance or relations naming missing candidates.
GraphInput build_graph(std::vector<std::string> tokens, std::vector<EntityCandidate> entities,
                       int clip_distance, std::vector<EntityRelation> relations = {});

void assign_token_ids(GraphInput& graph, const Vocab& vocab);
void assign_attribute_ids(GraphInput& graph, const Vocab& vocab);

// Orders candidates by (first span start, entity_id); spanless candidates last.
// Spans inside each candidate are sorted.
void sort_candidates(std::vector<EntityCandidate>& candidates);

// Replace span-membership labels with the not-in-span label.
void ablate_span_edges(GraphInput& graph);
// Replace every entity-entity label with the generic relation.
void ablate_entity_relation_edges(GraphInput& graph);

std::map<std::string, int> edge_label_histogram(const GraphInput& graph);

}  // namespace relparse

#endif  // RELPARSE_GRAPH_INPUT_H_
