#include "relparse/graph_input.h"

#include <algorithm>
#include <cctype>
#include <climits>

#include "relparse/errors.h"

namespace relparse {
namespace {

constexpr std::array<std::string_view, kNumRelations> kRelationNames = {
    "generic", "span-overlap", "column-of", "table-of", "foreign-key", "foreign-key-reverse"};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view relation_name(int relation_id) {
  if (relation_id < 0 || relation_id >= kNumRelations) {
    throw InputError("unknown relation id " + std::to_string(relation_id));
  }
  return kRelationNames[relation_id];
}

int relation_from_name(std::string_view name) {
  for (int i = 0; i < kNumRelations; ++i)
    if (kRelationNames[i] == name) return i;
  throw InputError("unknown relation name '" + std::string(name) + "'");
}

bool EntityCandidate::covers(int token) const {
  return std::any_of(spans.begin(), spans.end(), [token](const Span& s) { return s.contains(token); });
}

int edge_label_count(int clip_distance) { return 2 * clip_distance + 1 + 4 + kNumRelations; }

int edge_label_index(const EdgeLabel& label, int clip_distance) {
  const int tok_tok = 2 * clip_distance + 1;
  return std::visit(
      Overloaded{
          [&](const TokTok& l) {
            if (l.rel_pos < -clip_distance || l.rel_pos > clip_distance) {
              throw InputError("TokTok offset " + std::to_string(l.rel_pos) + " exceeds clip distance");
            }
            return l.rel_pos + clip_distance;
          },
          [&](const TokEnt& l) { return tok_tok + (l.in_span ? 1 : 0); },
          [&](const EntTok& l) { return tok_tok + 2 + (l.in_span ? 1 : 0); },
          [&](const EntEnt& l) {
            if (l.relation_id < 0 || l.relation_id >= kNumRelations) {
              throw InputError("unknown relation id " + std::to_string(l.relation_id));
            }
            return tok_tok + 4 + l.relation_id;
          },
      },
      label);
}

std::string edge_label_string(const EdgeLabel& label) {
  return std::visit(
      Overloaded{
          [](const TokTok& l) { return "tok-tok:" + std::to_string(l.rel_pos); },
          [](const TokEnt& l) { return std::string(l.in_span ? "tok-ent:span" : "tok-ent:none"); },
          [](const EntTok& l) { return std::string(l.in_span ? "ent-tok:span" : "ent-tok:none"); },
          [](const EntEnt& l) { return "ent-ent:" + std::string(relation_name(l.relation_id)); },
      },
      label);
}

std::vector<int> GraphInput::label_indices() const {
  std::vector<int> out(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) out[i] = edge_label_index(edges[i], clip_distance);
  return out;
}

std::vector<std::string> tokenize(std::string_view utterance) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : utterance) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

GraphInput build_graph(std::vector<std::string> tokens, std::vector<EntityCandidate> entities,
                       int clip_distance, std::vector<EntityRelation> relations) {
  if (clip_distance < 0) throw InputError("clip distance must be non-negative");
  const int n_tok = static_cast<int>(tokens.size());
  const int n_ent = static_cast<int>(entities.size());
  for (const auto& e : entities) {
    for (const Span& s : e.spans) {
      if (s.start < 0 || s.end > n_tok || s.start >= s.end) {
        throw InputError("entity " + e.entity_id + " has span [" + std::to_string(s.start) + "," +
                         std::to_string(s.end) + ") outside " + std::to_string(n_tok) + " tokens");
      }
    }
  }
  std::vector<int> ent_rel(static_cast<std::size_t>(n_ent) * n_ent, kGeneric);
  for (const auto& r : relations) {
    if (r.from < 0 || r.from >= n_ent || r.to < 0 || r.to >= n_ent) {
      throw InputError("entity relation references candidate outside [0," + std::to_string(n_ent) + ")");
    }
    relation_name(r.relation);  // validates
    ent_rel[r.from * n_ent + r.to] = r.relation;
  }

  GraphInput g;
  g.token_strings = std::move(tokens);
  g.entities = std::move(entities);
  g.relations = std::move(relations);
  g.clip_distance = clip_distance;
  const std::size_t n = g.node_count();
  g.edges.resize(n * n);
  for (int i = 0; i < n_tok; ++i)
    for (int j = 0; j < n_tok; ++j)
      g.edges[i * n + j] = TokTok{std::clamp(j - i, -clip_distance, clip_distance)};
  for (int e = 0; e < n_ent; ++e) {
    const std::size_t node = n_tok + e;
    for (int t = 0; t < n_tok; ++t) {
      const bool in = g.entities[e].covers(t);
      g.edges[t * n + node] = TokEnt{in};
      g.edges[node * n + t] = EntTok{in};
    }
    for (int f = 0; f < n_ent; ++f) g.edges[node * n + (n_tok + f)] = EntEnt{ent_rel[e * n_ent + f]};
    // Self-edges always carry the generic label.
    g.edges[node * n + node] = EntEnt{kGeneric};
  }
  return g;
}

void assign_token_ids(GraphInput& graph, const Vocab& vocab) {
  graph.token_ids.clear();
  for (const auto& t : graph.token_strings) graph.token_ids.push_back(vocab.index(t));
}

void assign_attribute_ids(GraphInput& graph, const Vocab& vocab) {
  graph.attribute_ids.clear();
  for (const auto& e : graph.entities) {
    std::vector<int> ids;
    for (const auto& a : e.attributes) ids.push_back(vocab.index(a));
    if (ids.empty()) ids.push_back(Vocab::kOov);
    graph.attribute_ids.push_back(std::move(ids));
  }
}

void sort_candidates(std::vector<EntityCandidate>& candidates) {
  for (auto& c : candidates) std::sort(c.spans.begin(), c.spans.end());
  std::sort(candidates.begin(), candidates.end(), [](const EntityCandidate& a, const EntityCandidate& b) {
    const int sa = a.spans.empty() ? INT_MAX : a.spans.front().start;
    const int sb = b.spans.empty() ? INT_MAX : b.spans.front().start;
    if (sa != sb) return sa < sb;
    return a.entity_id < b.entity_id;
  });
}

void ablate_span_edges(GraphInput& graph) {
  for (auto& label : graph.edges) {
    if (auto* te = std::get_if<TokEnt>(&label)) te->in_span = false;
    if (auto* et = std::get_if<EntTok>(&label)) et->in_span = false;
  }
}

void ablate_entity_relation_edges(GraphInput& graph) {
  for (auto& label : graph.edges)
    if (auto* ee = std::get_if<EntEnt>(&label)) ee->relation_id = kGeneric;
}

std::map<std::string, int> edge_label_histogram(const GraphInput& graph) {
  std::map<std::string, int> hist;
  for (const auto& label : graph.edges) ++hist[edge_label_string(label)];
  return hist;
}

}  // namespace relparse
