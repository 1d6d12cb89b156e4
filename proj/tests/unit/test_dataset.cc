#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "relparse/errors.h"
#include "relparse/pipeline.h"
#include "relparse/synth.h"

using namespace relparse;
namespace fs = std::filesystem;

namespace {

std::string data_path(const std::string& rel) { return std::string(RELPARSE_SOURCE_DIR) + "/data/" + rel; }

}  // namespace

TEST_CASE("raw lines accept string or array outputs") {
  const Example a = parse_example(R"j({"utterance": "Flights to Boston", "output": "( to b )"})j");
  CHECK(a.tokens == std::vector<std::string>{"flights", "to", "boston"});
  CHECK(a.output == std::vector<std::string>{"(", "to", "b", ")"});
  CHECK_FALSE(a.annotated);
  const Example b = parse_example(R"j({"tokens": ["x"], "output": ["(", "y", ")"]})j");
  CHECK(b.output.size() == 3);
  CHECK_THROWS_AS(parse_example(R"j({"output": "x"})j"), InputError);
}

TEST_CASE("annotated examples round-trip through JSON") {
  Example ex = parse_example(R"j({"utterance": "which states border the mississippi", "output": "answer x"})j");
  Lexicon lex;
  lex.add("mississippi", {"mississippi-river", {"river"}});
  lex.add("mississippi", {"mississippi-state", {"state"}});
  CandidateSource src;
  src.lexicon = &lex;
  annotate_example(ex, src);
  const Example back = parse_example(example_to_json(ex));
  CHECK(back.annotated);
  CHECK(back.entities == ex.entities);
  CHECK(back.relations == ex.relations);
  CHECK(back.action_strings == ex.action_strings);
  CHECK(back.output == ex.output);
  CHECK(example_to_json(back) == example_to_json(ex));
}

TEST_CASE("unknown relation names and malformed lines are reported with a line number") {
  const auto dir = fs::temp_directory_path() / "relparse_dataset_test";
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "bad.jsonl");
    f << R"j({"utterance": "a", "output": "b"})j" << "\n\n{not json\n";
  }
  try {
    read_examples((dir / "bad.jsonl").string());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  {
    std::ofstream f(dir / "rel.jsonl");
    f << R"j({"tokens": ["a"], "output": [], "entities": [], "entity_relations": [[0, 1, "sibling"]]})j" << "\n";
  }
  CHECK_THROWS_AS(read_examples((dir / "rel.jsonl").string()), InputError);
  CHECK_THROWS_AS(read_examples((dir / "missing.jsonl").string()), InputError);
  fs::remove_all(dir);
}

TEST_CASE("shipped lexicon datasets annotate without drops and keep both readings") {
  for (const std::string task : {"geo", "atis"}) {
    const Lexicon lex = load_lexicon(data_path(task + "/lexicon.jsonl"));
    auto examples = read_examples(data_path(task + "/sample.jsonl"));
    CandidateSource src;
    src.lexicon = &lex;
    const AnnotationStats stats = annotate_examples(examples, src);
    CHECK(stats.n_dropped == 0);
    CHECK(stats.n_ambiguous > 0);
  }
}

TEST_CASE("geo mississippi example emits river and state candidates") {
  const Lexicon lex = load_lexicon(data_path("geo/lexicon.jsonl"));
  auto examples = read_examples(data_path("geo/sample.jsonl"));
  CandidateSource src;
  src.lexicon = &lex;
  annotate_example(examples[0], src);
  REQUIRE(examples[0].entities.size() == 2);
  CHECK(examples[0].entities[0].attributes == std::vector<std::string>{"river"});
  CHECK(examples[0].entities[1].attributes == std::vector<std::string>{"state"});
}

TEST_CASE("spider schema sample aligns tables and keeps foreign keys") {
  const Schema schema = load_schema(data_path("spider/game_injury.tables.json"));
  CHECK(schema.tables.size() == 3);
  auto examples = read_examples(data_path("spider/sample.jsonl"));
  CandidateSource src;
  src.schema = &schema;
  const AnnotationStats stats = annotate_examples(examples, src);
  CHECK(stats.n_dropped == 0);
  const auto& ex = examples[0];
  auto find = [&](const std::string& id) {
    for (std::size_t i = 0; i < ex.entities.size(); ++i)
      if (ex.entities[i].entity_id == id) return static_cast<int>(i);
    return -1;
  };
  CHECK(ex.entities[find("game")].spans == std::vector<Span>{{2, 3}});
  CHECK(ex.entities[find("stadium")].spans == std::vector<Span>{{5, 6}});
  const EntityRelation fk{find("game.stadium_id"), find("stadium.id"), kForeignKey};
  CHECK(std::find(ex.relations.begin(), ex.relations.end(), fk) != ex.relations.end());
}

TEST_CASE("vocabularies exclude candidate ids and dropped examples") {
  std::vector<Example> ex(2);
  ex[0] = parse_example(R"j({"tokens": ["to", "b", "to"], "output": "( to b-id )"})j");
  ex[0].entities = {{"b-id", {"city"}, {{1, 2}}}};
  ex[1] = parse_example(R"j({"tokens": ["x"], "output": "secret"})j");
  ex[1].dropped = true;
  const Vocabularies v = build_vocabularies(ex, 2);
  CHECK(v.outputs.contains("to"));
  CHECK_FALSE(v.outputs.contains("b-id"));
  CHECK_FALSE(v.outputs.contains("secret"));
  CHECK(v.tokens.contains("to"));
  CHECK_FALSE(v.tokens.contains("b"));
  CHECK(v.attributes.contains("city"));
  CHECK((build_vocabularies({}, 2).outputs.size() == Vocab::kNumSpecial));
}

TEST_CASE("synthetic flights: deterministic, no drops, exact ambiguity rate") {
  SynthConfig cfg;
  cfg.n_train = 200;
  cfg.n_dev = 50;
  cfg.ambiguity_rate = 0.2;
  const SynthData a = synth_dataset(cfg), b = synth_dataset(cfg);
  REQUIRE(a.train.size() == 200);
  for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(example_to_json(a.train[i]) == example_to_json(b.train[i]));
  auto train = a.train;
  CandidateSource src;
  src.lexicon = &a.lexicon;
  const AnnotationStats stats = annotate_examples(train, src);
  CHECK(stats.n_dropped == 0);
  // Counting oracle: examples with some span claimed twice.
  std::size_t ambiguous = 0;
  for (const auto& ex : train) {
    std::map<std::pair<int, int>, int> claims;
    bool hit = false;
    for (const auto& c : ex.entities)
      for (const auto& s : c.spans) hit = hit || ++claims[{s.start, s.end}] > 1;
    ambiguous += hit;
  }
  CHECK(ambiguous == stats.n_ambiguous);
  CHECK(std::abs(static_cast<double>(ambiguous) / 200.0 - 0.2) <= 0.02);

  SynthConfig none = cfg;
  none.ambiguity_rate = 0.0;
  const SynthData clean = synth_dataset(none);
  for (const auto& [alias, entries] : clean.lexicon.entries()) CHECK(entries.size() == 1);
}

TEST_CASE("synthetic schema task uses the shared-name schema") {
  SynthConfig cfg;
  cfg.task = "schema";
  cfg.n_train = 40;
  cfg.n_dev = 10;
  const SynthData d = synth_dataset(cfg);
  CHECK(d.uses_schema);
  const Schema back = parse_schema(schema_to_json(d.schema));
  CHECK(back.entity_ids() == d.schema.entity_ids());
  auto train = d.train;
  CandidateSource src;
  src.schema = &d.schema;
  CHECK(annotate_examples(train, src).n_dropped == 0);
  cfg.task = "trains";
  CHECK_THROWS_AS(synth_dataset(cfg), InputError);
}
