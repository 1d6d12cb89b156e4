// Entity-candidate generators: lexicon n-gram matching, schema alignment by
// normalized Levenshtein score, entity-entity relations, and the rewrite of
// gold output symbols into decoder actions.

#ifndef RELPARSE_ENTITY_GEN_H_
#define RELPARSE_ENTITY_GEN_H_

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relparse/decoder.h"
#include "relparse/graph_input.h"
#include "relparse/vocab.h"

namespace relparse {

struct LexiconEntry {
  std::string entity_id;
  std::vector<std::string> attributes;
  bool operator==(const LexiconEntry&) const = default;
};

// alias -> entries. Aliases are lowercased with single-space separators.
class Lexicon {
 public:
  // Throws InputError for an empty alias, empty entity id or no attributes.
  // Re-adding an (alias, entity_id) pair merges attributes.
  void add(std::string_view alias, LexiconEntry entry);

  const std::vector<LexiconEntry>* find(const std::string& alias) const;
  int max_ngram() const { return max_ngram_; }
  std::size_t alias_count() const { return entries_.size(); }
  std::set<std::string> entity_ids() const;
  const std::map<std::string, std::vector<LexiconEntry>>& entries() const { return entries_; }

 private:
  std::map<std::string, std::vector<LexiconEntry>> entries_;
  int max_ngram_ = 0;
};

// JSONL, one {"alias", "entity_id", "attributes"} object per line.
Lexicon load_lexicon(const std::string& path);
void save_lexicon(const Lexicon& lexicon, const std::string& path);

// All n-grams (n ≤ max_ngram, longest first) equal to an alias. One
// candidate per entity id, holding every matched span and the union of the
// attributes of its entries. Result is ordered by sort_candidates.
std::vector<EntityCandidate> lexicon_match(std::span<const std::string> tokens,
                                           const Lexicon& lexicon);

std::size_t edit_distance(std::string_view a, std::string_view b);
// 1 − edit_distance / max(|a|, |b|); two empty strings score 1.
double normalized_levenshtein(std::string_view a, std::string_view b);

struct SchemaColumn {
  std::string id;
  std::string name;
  std::string type;
  std::optional<std::string> foreign_key;  // target column id
};

struct SchemaTable {
  std::string id;
  std::string name;
  std::vector<SchemaColumn> columns;
};

struct Schema {
  std::vector<SchemaTable> tables;
  // Unique ids and existing foreign-key targets; throws InputError.
  void validate() const;
  std::set<std::string> entity_ids() const;
};

// Accepts {"tables": [{"id", "name", "columns": [{"id", "name", "type",
// "foreign_key"?}]}]} or a single-database tables.json record with
// table_names_original / column_names_original / column_types / foreign_keys.
Schema parse_schema(std::string_view json_text);
Schema load_schema(const std::string& path);

// Lowercase, underscores to spaces.
std::string normalize_schema_name(std::string_view name);

struct SchemaAlignment {
  std::vector<EntityCandidate> candidates;  // tables first, then columns
  std::vector<EntityRelation> relations;
};

inline constexpr double kSchemaAlignThreshold = 0.75;

// Every table and column becomes a candidate. The best unigram or bigram with
// score > threshold (first on ties) gives its span. Attributes are the name
// words, "@table" or "@<column type>", and "@aligned" or "@unaligned".
SchemaAlignment schema_align(std::span<const std::string> tokens, const Schema& schema,
                             double threshold = kSchemaAlignThreshold);

// Span-overlap relations in both directions for every pair of candidates
// whose spans share a token.
std::vector<EntityRelation> overlap_relations(const std::vector<EntityCandidate>& candidates);

// Entity-per-span ambiguity: some exact span is claimed by two or more
// candidates.
bool has_ambiguous_span(const std::vector<EntityCandidate>& candidates);

struct PreprocessedOutput {
  bool dropped = false;
  std::string missing_entity;  // set when dropped
  std::vector<OutputAction> actions;
};

// Rewrites gold symbols: a candidate id becomes CopyEntity (lowest index),
// a known entity without a candidate drops the example, a vocabulary symbol
// becomes Generate, an input token becomes CopyToken when copy_tokens is set,
// anything else is Generate(<unk>).
PreprocessedOutput preprocess_output(std::span<const std::string> gold,
                                     const std::vector<EntityCandidate>& candidates,
                                     const std::set<std::string>& known_entities,
                                     const Vocab& output_vocab,
                                     std::span<const std::string> tokens = {},
                                     bool copy_tokens = false);

}  // namespace relparse

#endif  // RELPARSE_ENTITY_GEN_H_
