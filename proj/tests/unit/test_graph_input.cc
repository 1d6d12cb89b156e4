#include <random>
#include <set>

#include "doctest.h"
#include "generators.h"
#include "relparse/errors.h"
#include "relparse/graph_input.h"
#include "relparse/vocab.h"

using namespace relparse;

TEST_CASE("label count and index layout for clip distance 8") {
  CHECK(edge_label_count(8) == 27);
  CHECK(edge_label_index(TokTok{-8}, 8) == 0);
  CHECK(edge_label_index(TokTok{0}, 8) == 8);
  CHECK(edge_label_index(TokTok{8}, 8) == 16);
  CHECK(edge_label_index(TokEnt{false}, 8) == 17);
  CHECK(edge_label_index(TokEnt{true}, 8) == 18);
  CHECK(edge_label_index(EntTok{false}, 8) == 19);
  CHECK(edge_label_index(EntTok{true}, 8) == 20);
  CHECK(edge_label_index(EntEnt{kGeneric}, 8) == 21);
  CHECK(edge_label_index(EntEnt{kForeignKeyReverse}, 8) == 26);
  CHECK_THROWS_AS(edge_label_index(TokTok{9}, 8), InputError);
}

TEST_CASE("three-token utterance with one entity over the middle token") {
  const GraphInput g = build_graph({"a", "b", "c"}, {{"e", {"t"}, {{1, 2}}}}, 8);
  REQUIRE(g.node_count() == 4);
  CHECK(g.edge(0, 2) == EdgeLabel{TokTok{2}});
  CHECK(g.edge(2, 0) == EdgeLabel{TokTok{-2}});
  CHECK(g.edge(1, 1) == EdgeLabel{TokTok{0}});
  CHECK(g.edge(1, 3) == EdgeLabel{TokEnt{true}});
  CHECK(g.edge(0, 3) == EdgeLabel{TokEnt{false}});
  CHECK(g.edge(3, 1) == EdgeLabel{EntTok{true}});
  CHECK(g.edge(3, 2) == EdgeLabel{EntTok{false}});
  CHECK(g.edge(3, 3) == EdgeLabel{EntEnt{kGeneric}});
}

TEST_CASE("offsets beyond the clip distance are clipped") {
  std::vector<std::string> tokens(12, "x");
  const GraphInput g = build_graph(tokens, {}, 3);
  CHECK(g.edge(0, 11) == EdgeLabel{TokTok{3}});
  CHECK(g.edge(11, 0) == EdgeLabel{TokTok{-3}});
  std::set<int> labels;
  for (int l : g.label_indices()) labels.insert(l);
  CHECK(labels.size() == 7);
}

TEST_CASE("token-token labels are antisymmetric") {
  std::mt19937_64 rng(5);
  testgen::GraphShape shape;
  shape.max_tokens = 14;
  shape.clip_distance = 4;
  for (int trial = 0; trial < 30; ++trial) {
    const GraphInput g = testgen::random_graph(rng, shape);
    for (std::size_t i = 0; i < g.num_tokens(); ++i)
      for (std::size_t j = 0; j < g.num_tokens(); ++j)
        CHECK(std::get<TokTok>(g.edge(i, j)).rel_pos == -std::get<TokTok>(g.edge(j, i)).rel_pos);
  }
}

TEST_CASE("relations land on the entity block and later ones win") {
  const std::vector<EntityCandidate> ents = {{"x", {"a"}, {}}, {"y", {"a"}, {}}};
  const GraphInput g =
      build_graph({"t"}, ents, 8, {{0, 1, kSpanOverlap}, {0, 1, kColumnOf}, {1, 0, kTableOf}});
  CHECK(g.edge(1, 2) == EdgeLabel{EntEnt{kColumnOf}});
  CHECK(g.edge(2, 1) == EdgeLabel{EntEnt{kTableOf}});
}

TEST_CASE("invalid spans and relations are rejected") {
  CHECK_THROWS_AS(build_graph({"a"}, {{"e", {"t"}, {{0, 2}}}}, 8), InputError);
  CHECK_THROWS_AS(build_graph({"a"}, {{"e", {"t"}, {{1, 1}}}}, 8), InputError);
  CHECK_THROWS_AS(build_graph({"a"}, {{"e", {"t"}, {}}}, 8, {{0, 1, kGeneric}}), InputError);
  CHECK_THROWS_AS(build_graph({"a"}, {}, 8, {{0, 0, 99}}), InputError);
}

TEST_CASE("empty utterance with entities still builds") {
  const GraphInput g = build_graph({}, {{"e", {"t"}, {}}, {"f", {"t"}, {}}}, 8);
  CHECK(g.node_count() == 2);
  CHECK(g.edge(0, 1) == EdgeLabel{EntEnt{kGeneric}});
}

TEST_CASE("ablations rewrite only their own labels") {
  const std::vector<EntityCandidate> ents = {{"x", {"a"}, {{0, 1}}}, {"y", {"a"}, {{0, 1}}}};
  GraphInput g = build_graph({"t", "u"}, ents, 8, {{0, 1, kColumnOf}});
  GraphInput spans = g;
  ablate_span_edges(spans);
  auto hist = edge_label_histogram(spans);
  CHECK(hist.count("tok-ent:span") == 0);
  CHECK(hist.count("ent-tok:span") == 0);
  CHECK(hist["ent-ent:column-of"] == 1);
  GraphInput rels = g;
  ablate_entity_relation_edges(rels);
  hist = edge_label_histogram(rels);
  CHECK(hist.count("ent-ent:column-of") == 0);
  CHECK(hist["tok-ent:span"] == 2);
}

TEST_CASE("graph construction is a pure function of its inputs") {
  std::mt19937_64 a(17), b(17);
  for (int trial = 0; trial < 20; ++trial) {
    const GraphInput ga = testgen::random_graph(a, {}), gb = testgen::random_graph(b, {});
    CHECK(ga.edges == gb.edges);
    CHECK(ga.token_ids == gb.token_ids);
    CHECK(ga.attribute_ids == gb.attribute_ids);
  }
}

TEST_CASE("tokenize lowercases and splits on whitespace") {
  CHECK(tokenize("  Flights  from\tBoston\n") == std::vector<std::string>{"flights", "from", "boston"});
  CHECK(tokenize("").empty());
}

TEST_CASE("sort_candidates orders by first span then id") {
  std::vector<EntityCandidate> c = {
      {"z", {"a"}, {}}, {"b", {"a"}, {{3, 4}, {1, 2}}}, {"a", {"a"}, {{1, 3}}}};
  sort_candidates(c);
  CHECK(c[0].entity_id == "a");
  CHECK(c[1].entity_id == "b");
  CHECK(c[1].spans.front() == Span{1, 2});
  CHECK(c[2].entity_id == "z");
}

TEST_CASE("vocabulary build orders by frequency and applies min count") {
  const std::vector<std::vector<std::string>> corpus = {{"b", "a", "b"}, {"c", "a", "b"}};
  const Vocab v = Vocab::build(corpus, 2);
  CHECK(v.size() == Vocab::kNumSpecial + 2);
  CHECK(v.index("b") == Vocab::kNumSpecial);
  CHECK(v.index("a") == Vocab::kNumSpecial + 1);
  CHECK(v.index("c") == Vocab::kOov);
  const std::vector<std::vector<std::string>> empty;
  CHECK_THROWS_AS(Vocab::build(empty, 1), InputError);
}

TEST_CASE("unknown tokens and attributes map to the OOV id") {
  GraphInput g = build_graph({"known", "unknown"}, {{"e", {"zzz"}, {}}}, 8);
  Vocab tokens;
  tokens.add("known");
  assign_token_ids(g, tokens);
  assign_attribute_ids(g, Vocab{});
  CHECK(g.token_ids == std::vector<int>{Vocab::kNumSpecial, Vocab::kOov});
  CHECK(g.attribute_ids == std::vector<std::vector<int>>{{Vocab::kOov}});
}
