#include "relparse/dataset.h"

#include <fstream>

#include "json.hpp"
#include "relparse/errors.h"

namespace relparse {

using json = nlohmann::json;

GraphInput Example::graph(int clip_distance) const {
  return build_graph(tokens, entities, clip_distance, relations);
}

namespace {

std::vector<std::string> split_symbols(const json& j) {
  if (j.is_array()) return j.get<std::vector<std::string>>();
  std::vector<std::string> out;
  const std::string s = j.get<std::string>();
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t start = s.find_first_not_of(" \t\r\n", i);
    if (start == std::string::npos) break;
    const std::size_t end = std::min(s.find_first_of(" \t\r\n", start), s.size());
    out.push_back(s.substr(start, end - start));
    i = end;
  }
  return out;
}

}  // namespace

Example parse_example(const std::string& json_line) {
  Example ex;
  const json j = json::parse(json_line);
  ex.utterance = j.value("utterance", "");
  if (j.contains("tokens")) {
    ex.tokens = j.at("tokens").get<std::vector<std::string>>();
  } else if (j.contains("utterance")) {
    ex.tokens = tokenize(ex.utterance);
  } else {
    throw InputError("example needs \"utterance\" or \"tokens\"");
  }
  if (j.contains("output")) ex.output = split_symbols(j.at("output"));
  if (j.contains("entities")) {
    ex.annotated = true;
    for (const auto& je : j.at("entities")) {
      EntityCandidate c;
      c.entity_id = je.at("id").get<std::string>();
      c.attributes = je.at("attributes").get<std::vector<std::string>>();
      for (const auto& js : je.value("spans", json::array())) {
        c.spans.push_back({js.at(0).get<int>(), js.at(1).get<int>()});
      }
      ex.entities.push_back(std::move(c));
    }
  }
  for (const auto& jr : j.value("entity_relations", json::array())) {
    ex.relations.push_back({jr.at(0).get<int>(), jr.at(1).get<int>(),
                            relation_from_name(jr.at(2).get<std::string>())});
  }
  ex.dropped = j.value("dropped", false);
  for (const auto& ja : j.value("actions", json::array())) ex.action_strings.push_back(ja.dump());
  return ex;
}

std::string example_to_json(const Example& ex) {
  json j;
  if (!ex.utterance.empty()) j["utterance"] = ex.utterance;
  j["tokens"] = ex.tokens;
  j["output"] = ex.output;
  if (ex.annotated) {
    json ents = json::array();
    for (const auto& c : ex.entities) {
      json spans = json::array();
      for (const Span& s : c.spans) spans.push_back({s.start, s.end});
      ents.push_back({{"id", c.entity_id}, {"attributes", c.attributes}, {"spans", spans}});
    }
    j["entities"] = ents;
    json rels = json::array();
    for (const auto& r : ex.relations) rels.push_back({r.from, r.to, std::string(relation_name(r.relation))});
    j["entity_relations"] = rels;
    json actions = json::array();
    for (const auto& a : ex.action_strings) actions.push_back(json::parse(a));
    j["actions"] = actions;
    j["dropped"] = ex.dropped;
  }
  return j.dump();
}

std::vector<Example> read_examples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::vector<Example> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_example(line));
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_examples(const std::string& path, std::span<const Example> examples) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  for (const auto& ex : examples) out << example_to_json(ex) << '\n';
}

std::vector<std::string> describe_actions(std::span<const OutputAction> actions,
                                          const Vocab& output_vocab) {
  std::vector<std::string> out;
  for (const auto& a : actions) {
    switch (a.kind) {
      case ActionKind::kGenerate:
        out.push_back(json{{"generate", output_vocab.symbol(a.index)}}.dump());
        break;
      case ActionKind::kCopyEntity:
        out.push_back(json{{"copy_entity", a.index}}.dump());
        break;
      case ActionKind::kCopyToken:
        out.push_back(json{{"copy_token", a.index}}.dump());
        break;
    }
  }
  return out;
}

}  // namespace relparse
