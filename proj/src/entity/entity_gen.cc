#include "relparse/entity_gen.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "relparse/errors.h"

namespace relparse {

using json = nlohmann::json;

namespace {

std::string join(std::span<const std::string> words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::string normalize_alias(std::string_view alias) {
  std::vector<std::string> words = tokenize(alias);
  return join(words);
}

void merge_attributes(std::vector<std::string>& into, const std::vector<std::string>& from) {
  for (const auto& a : from)
    if (std::find(into.begin(), into.end(), a) == into.end()) into.push_back(a);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void Lexicon::add(std::string_view alias, LexiconEntry entry) {
  const std::string key = normalize_alias(alias);
  if (key.empty()) throw InputError("lexicon alias is empty");
  if (entry.entity_id.empty()) throw InputError("lexicon entry for '" + key + "' has no entity id");
  if (entry.attributes.empty()) {
    throw InputError("lexicon entry " + entry.entity_id + " has no attributes");
  }
  auto& list = entries_[key];
  auto it = std::find_if(list.begin(), list.end(),
                         [&](const LexiconEntry& e) { return e.entity_id == entry.entity_id; });
  if (it == list.end()) {
    list.push_back(std::move(entry));
  } else {
    merge_attributes(it->attributes, entry.attributes);
  }
  max_ngram_ = std::max(max_ngram_, static_cast<int>(std::count(key.begin(), key.end(), ' ')) + 1);
}

const std::vector<LexiconEntry>* Lexicon::find(const std::string& alias) const {
  auto it = entries_.find(alias);
  return it == entries_.end() ? nullptr : &it->second;
}

std::set<std::string> Lexicon::entity_ids() const {
  std::set<std::string> ids;
  for (const auto& [alias, list] : entries_)
    for (const auto& e : list) ids.insert(e.entity_id);
  return ids;
}

Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open lexicon " + path);
  Lexicon lex;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      lex.add(j.at("alias").get<std::string>(),
              {j.at("entity_id").get<std::string>(),
               j.at("attributes").get<std::vector<std::string>>()});
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return lex;
}

void save_lexicon(const Lexicon& lexicon, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write lexicon " + path);
  for (const auto& [alias, list] : lexicon.entries())
    for (const auto& e : list)
      out << json{{"alias", alias}, {"entity_id", e.entity_id}, {"attributes", e.attributes}}.dump()
          << '\n';
}

std::vector<EntityCandidate> lexicon_match(std::span<const std::string> tokens,
                                           const Lexicon& lexicon) {
  std::vector<std::string> lowered;
  lowered.reserve(tokens.size());
  for (const auto& t : tokens) lowered.push_back(normalize_alias(t));

  std::vector<EntityCandidate> out;
  std::map<std::string, std::size_t> by_id;
  const int n_tokens = static_cast<int>(tokens.size());
  for (int n = std::min(lexicon.max_ngram(), n_tokens); n >= 1; --n) {
    for (int start = 0; start + n <= n_tokens; ++start) {
      const auto* entries =
          lexicon.find(join(std::span<const std::string>(lowered).subspan(start, n)));
      if (entries == nullptr) continue;
      const Span span{start, start + n};
      for (const auto& e : *entries) {
        auto [it, fresh] = by_id.try_emplace(e.entity_id, out.size());
        if (fresh) out.push_back({e.entity_id, {}, {}});
        EntityCandidate& c = out[it->second];
        merge_attributes(c.attributes, e.attributes);
        if (std::find(c.spans.begin(), c.spans.end(), span) == c.spans.end()) c.spans.push_back(span);
      }
    }
  }
  sort_candidates(out);
  return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double normalized_levenshtein(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(a, b)) / static_cast<double>(longest);
}

void Schema::validate() const {
  std::set<std::string> ids;
  for (const auto& t : tables) {
    if (t.id.empty()) throw InputError("schema table without id");
    if (!ids.insert(t.id).second) throw InputError("duplicate schema id " + t.id);
    for (const auto& c : t.columns) {
      if (c.id.empty()) throw InputError("schema column without id in table " + t.id);
      if (!ids.insert(c.id).second) throw InputError("duplicate schema id " + c.id);
    }
  }
  for (const auto& t : tables)
    for (const auto& c : t.columns)
      if (c.foreign_key && !ids.count(*c.foreign_key)) {
        throw InputError("foreign key of " + c.id + " names missing column " + *c.foreign_key);
      }
}

std::set<std::string> Schema::entity_ids() const {
  std::set<std::string> ids;
  for (const auto& t : tables) {
    ids.insert(t.id);
    for (const auto& c : t.columns) ids.insert(c.id);
  }
  return ids;
}

namespace {

Schema schema_from_native(const json& j) {
  Schema s;
  for (const auto& jt : j.at("tables")) {
    SchemaTable t;
    t.id = jt.at("id").get<std::string>();
    t.name = jt.value("name", t.id);
    for (const auto& jc : jt.at("columns")) {
      SchemaColumn c;
      c.id = jc.at("id").get<std::string>();
      c.name = jc.value("name", c.id);
      c.type = jc.value("type", "text");
      if (jc.contains("foreign_key") && !jc.at("foreign_key").is_null()) {
        c.foreign_key = jc.at("foreign_key").get<std::string>();
      }
      t.columns.push_back(std::move(c));
    }
    s.tables.push_back(std::move(t));
  }
  return s;
}

Schema schema_from_tables_json(const json& j) {
  Schema s;
  const auto table_names = j.at("table_names_original").get<std::vector<std::string>>();
  const auto display = j.value("table_names", table_names);
  for (std::size_t i = 0; i < table_names.size(); ++i) {
    s.tables.push_back({normalize_alias(table_names[i]), display.at(i), {}});
  }
  const auto& cols = j.at("column_names_original");
  const auto& col_display = j.contains("column_names") ? j.at("column_names") : cols;
  const auto types = j.at("column_types").get<std::vector<std::string>>();
  std::vector<std::pair<int, int>> position(cols.size(), {-1, -1});  // (table, column)
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const int table = cols[c].at(0).get<int>();
    if (table < 0) continue;  // the "*" column
    auto& t = s.tables.at(static_cast<std::size_t>(table));
    const std::string name = cols[c].at(1).get<std::string>();
    position[c] = {table, static_cast<int>(t.columns.size())};
    t.columns.push_back({t.id + "." + normalize_alias(name), col_display[c].at(1).get<std::string>(),
                         types.at(c), std::nullopt});
  }
  for (const auto& fk : j.value("foreign_keys", json::array())) {
    const auto from = position.at(fk.at(0).get<std::size_t>());
    const auto to = position.at(fk.at(1).get<std::size_t>());
    if (from.first < 0 || to.first < 0) continue;
    s.tables[from.first].columns[from.second].foreign_key = s.tables[to.first].columns[to.second].id;
  }
  return s;
}

}  // namespace

Schema parse_schema(std::string_view json_text) {
  Schema s;
  try {
    json j = json::parse(json_text);
    if (j.is_array()) {
      if (j.size() != 1) throw ParseError("schema file must describe exactly one database");
      j = j.front();
    }
    s = j.contains("tables") ? schema_from_native(j) : schema_from_tables_json(j);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad schema: ") + e.what());
  }
  s.validate();
  return s;
}

Schema load_schema(const std::string& path) { return parse_schema(read_file(path)); }

std::string normalize_schema_name(std::string_view name) {
  std::string out(name);
  for (char& ch : out) {
    ch = ch == '_' ? ' ' : static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  return normalize_alias(out);
}

SchemaAlignment schema_align(std::span<const std::string> tokens, const Schema& schema,
                             double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw InputError("alignment threshold must lie in (0, 1]");
  std::vector<std::pair<Span, std::string>> grams;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    grams.push_back({{static_cast<int>(i), static_cast<int>(i) + 1}, tokens[i]});
  }
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    grams.push_back({{static_cast<int>(i), static_cast<int>(i) + 2}, tokens[i] + ' ' + tokens[i + 1]});
  }

  SchemaAlignment out;
  auto make = [&](const std::string& id, const std::string& name, const std::string& kind) {
    const std::string norm = normalize_schema_name(name);
    EntityCandidate c{id, tokenize(norm), {}};
    double best = threshold;
    for (const auto& [span, text] : grams) {
      const double score = normalized_levenshtein(text, norm);
      if (score > best) {
        best = score;
        c.spans = {span};
      }
    }
    c.attributes.push_back(kind);
    c.attributes.push_back(c.spans.empty() ? "@unaligned" : "@aligned");
    out.candidates.push_back(std::move(c));
  };

  std::map<std::string, int> index;
  for (const auto& t : schema.tables) {
    index[t.id] = static_cast<int>(out.candidates.size());
    make(t.id, t.name, "@table");
  }
  for (const auto& t : schema.tables)
    for (const auto& c : t.columns) {
      index[c.id] = static_cast<int>(out.candidates.size());
      make(c.id, c.name, "@" + normalize_schema_name(c.type));
    }
  for (const auto& t : schema.tables)
    for (const auto& c : t.columns) {
      const int ci = index.at(c.id), ti = index.at(t.id);
      out.relations.push_back({ci, ti, kColumnOf});
      out.relations.push_back({ti, ci, kTableOf});
      if (c.foreign_key) {
        const int fi = index.at(*c.foreign_key);
        out.relations.push_back({ci, fi, kForeignKey});
        out.relations.push_back({fi, ci, kForeignKeyReverse});
      }
    }
  return out;
}

std::vector<EntityRelation> overlap_relations(const std::vector<EntityCandidate>& candidates) {
  std::vector<EntityRelation> out;
  const int n = static_cast<int>(candidates.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      bool overlap = false;
      for (const Span& a : candidates[i].spans)
        for (const Span& b : candidates[j].spans)
          overlap = overlap || (a.start < b.end && b.start < a.end);
      if (overlap) out.push_back({i, j, kSpanOverlap});
    }
  return out;
}

bool has_ambiguous_span(const std::vector<EntityCandidate>& candidates) {
  std::set<Span> seen;
  for (const auto& c : candidates)
    for (const Span& s : c.spans)
      if (!seen.insert(s).second) return true;
  return false;
}

PreprocessedOutput preprocess_output(std::span<const std::string> gold,
                                     const std::vector<EntityCandidate>& candidates,
                                     const std::set<std::string>& known_entities,
                                     const Vocab& output_vocab,
                                     std::span<const std::string> tokens, bool copy_tokens) {
  PreprocessedOutput out;
  for (const auto& symbol : gold) {
    auto cand = std::find_if(candidates.begin(), candidates.end(),
                             [&](const EntityCandidate& c) { return c.entity_id == symbol; });
    if (cand != candidates.end()) {
      out.actions.push_back(OutputAction::copy_entity(static_cast<int>(cand - candidates.begin())));
      continue;
    }
    if (known_entities.count(symbol)) {
      out.dropped = true;
      out.missing_entity = symbol;
      out.actions.clear();
      return out;
    }
    if (output_vocab.contains(symbol)) {
      out.actions.push_back(OutputAction::generate(output_vocab.index(symbol)));
      continue;
    }
    auto tok = std::find(tokens.begin(), tokens.end(), symbol);
    if (copy_tokens && tok != tokens.end()) {
      out.actions.push_back(OutputAction::copy_token(static_cast<int>(tok - tokens.begin())));
      continue;
    }
    out.actions.push_back(OutputAction::generate(Vocab::kOov));
  }
  return out;
}

}  // namespace relparse
