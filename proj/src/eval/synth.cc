#include "relparse/synth.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "json.hpp"
#include "relparse/errors.h"

namespace relparse {

namespace {

constexpr std::array<const char*, 60> kCities = {
    "seattle",     "boston",       "denver",       "atlanta",     "chicago",      "dallas",
    "houston",     "phoenix",      "miami",        "orlando",     "detroit",      "portland",
    "austin",      "nashville",    "memphis",      "baltimore",   "pittsburgh",   "cleveland",
    "cincinnati",  "columbus",     "indianapolis", "milwaukee",   "minneapolis",  "omaha",
    "tulsa",       "albuquerque",  "tucson",       "sacramento",  "oakland",      "fresno",
    "charlotte",   "raleigh",      "richmond",     "philadelphia", "newark",      "buffalo",
    "toronto",     "montreal",     "vancouver",    "calgary",     "honolulu",     "anchorage",
    "boise",       "reno",         "spokane",      "tampa",       "jacksonville", "louisville",
    "new york",    "san francisco", "los angeles", "las vegas",   "salt lake city", "kansas city",
    "san diego",   "san jose",     "st louis",     "fort worth",  "new orleans",  "oklahoma city"};

constexpr std::array<const char*, 10> kFlightTemplates = {
    "flights {A} to {B}",
    "flights from {A} to {B}",
    "show me flights from {A} to {B}",
    "nonstop flights {A} to {B}",
    "flights to {B} from {A}",
    "i want to fly from {A} to {B}",
    "what flights go to {B} from {A}",
    "list flights leaving {A} arriving in {B}",
    "flights arriving in {B} leaving {A}",
    "from {A} to {B} please show flights"};

std::string entity_name(const std::string& city) {
  std::string out = city;
  std::replace(out.begin(), out.end(), ' ', '_');
  return out;
}

std::string fill(std::string text, const std::string& a, const std::string& b) {
  const auto put = [&](const std::string& key, const std::string& value) {
    const auto pos = text.find(key);
    if (pos != std::string::npos) text.replace(pos, key.size(), value);
  };
  put("{A}", a);
  put("{B}", b);
  return text;
}

Example make_example(const std::string& utterance, std::vector<std::string> output) {
  Example ex;
  ex.utterance = utterance;
  ex.tokens = tokenize(utterance);
  ex.output = std::move(output);
  return ex;
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::vector<Example> flights_split(int n, double rate, const std::vector<std::string>& ambiguous,
                                   const std::vector<std::string>& plain, std::mt19937_64& rng) {
  const int n_ambiguous = static_cast<int>(std::lround(rate * n));
  std::vector<int> flags(n, 0);
  std::fill_n(flags.begin(), n_ambiguous, 1);
  std::shuffle(flags.begin(), flags.end(), rng);

  std::vector<Example> out;
  for (int i = 0; i < n; ++i) {
    std::string a, b;
    if (flags[i]) {
      a = ambiguous[pick(rng, ambiguous.size())];
      const auto& other_pool = plain.empty() ? ambiguous : plain;
      do {
        b = other_pool[pick(rng, other_pool.size())];
      } while (b == a);
      if (rng() & 1) std::swap(a, b);
    } else {
      a = plain[pick(rng, plain.size())];
      do {
        b = plain[pick(rng, plain.size())];
      } while (b == a);
    }
    const std::string text = fill(kFlightTemplates[pick(rng, kFlightTemplates.size())], a, b);
    out.push_back(make_example(text, {"(", "flight", "(", "from", entity_name(a) + "-id", ")", "(",
                                      "to", entity_name(b) + "-id", ")", ")"}));
  }
  return out;
}

SynthData synth_flights(const SynthConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::string> cities(kCities.begin(), kCities.end());
  std::shuffle(cities.begin(), cities.end(), rng);
  auto n_amb = static_cast<std::size_t>(std::lround(cfg.ambiguity_rate * cities.size()));
  if (cfg.ambiguity_rate < 1.0) n_amb = std::min(n_amb, cities.size() - 2);
  if (cfg.ambiguity_rate > 0.0) n_amb = std::max<std::size_t>(n_amb, 1);

  SynthData data;
  std::vector<std::string> ambiguous(cities.begin(), cities.begin() + static_cast<long>(n_amb));
  std::vector<std::string> plain(cities.begin() + static_cast<long>(n_amb), cities.end());
  for (const auto& c : cities) data.lexicon.add(c, {entity_name(c) + "-id", {"city"}});
  for (const auto& c : ambiguous) data.lexicon.add(c, {entity_name(c) + "-airport", {"airport"}});

  data.train = flights_split(cfg.n_train, cfg.ambiguity_rate, ambiguous, plain, rng);
  data.dev = flights_split(cfg.n_dev, cfg.ambiguity_rate, ambiguous, plain, rng);
  return data;
}

std::vector<Example> schema_split(int n, std::mt19937_64& rng, const Schema& schema) {
  static constexpr std::array<const char*, 6> kTemplates = {
      "show the {C} of every {T}",
      "what is the {C} of each {T}",
      "list the {C} for all {T}",
      "give me the {C} of the {T}",
      "for each {T} return the {C}",
      "{T} with their {C}"};
  std::vector<std::pair<const SchemaTable*, const SchemaColumn*>> targets;
  for (const auto& t : schema.tables)
    for (const auto& c : t.columns)
      if (c.name.find("_id") == std::string::npos) targets.push_back({&t, &c});
  std::vector<Example> out;
  for (int i = 0; i < n; ++i) {
    const auto [table, column] = targets[pick(rng, targets.size())];
    std::string table_word = normalize_schema_name(table->name);
    if (rng() & 1) table_word += 's';
    std::string text = kTemplates[pick(rng, kTemplates.size())];
    text.replace(text.find("{C}"), 3, normalize_schema_name(column->name));
    text.replace(text.find("{T}"), 3, table_word);
    out.push_back(make_example(text, {"select", column->id, "from", table->id}));
  }
  return out;
}

}  // namespace

void SynthConfig::validate() const {
  if (task != "flights" && task != "schema") throw InputError("unknown synthetic task '" + task + "'");
  if (n_train < 1 || n_dev < 1) throw InputError("synthetic splits need at least one example");
  if (ambiguity_rate < 0.0 || ambiguity_rate > 1.0) throw InputError("ambiguity_rate must lie in [0, 1]");
}

Schema synth_schema() {
  Schema s;
  const auto col = [](const std::string& table, const std::string& name, const std::string& type,
                      std::optional<std::string> fk = std::nullopt) {
    return SchemaColumn{table + "." + name, name, type, std::move(fk)};
  };
  s.tables.push_back({"singer", "singer",
                      {col("singer", "singer_id", "number"), col("singer", "name", "text"),
                       col("singer", "age", "number"), col("singer", "country", "text")}});
  s.tables.push_back({"stadium", "stadium",
                      {col("stadium", "stadium_id", "number"), col("stadium", "name", "text"),
                       col("stadium", "capacity", "number"), col("stadium", "location", "text")}});
  s.tables.push_back({"concert", "concert",
                      {col("concert", "concert_id", "number"), col("concert", "name", "text"),
                       col("concert", "year", "number"),
                       col("concert", "stadium_id", "number", "stadium.stadium_id")}});
  s.tables.push_back({"album", "album",
                      {col("album", "album_id", "number"), col("album", "name", "text"),
                       col("album", "year", "number"),
                       col("album", "singer_id", "number", "singer.singer_id")}});
  s.validate();
  return s;
}

std::string schema_to_json(const Schema& schema) {
  nlohmann::json tables = nlohmann::json::array();
  for (const auto& t : schema.tables) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : t.columns) {
      nlohmann::json jc = {{"id", c.id}, {"name", c.name}, {"type", c.type}};
      if (c.foreign_key) jc["foreign_key"] = *c.foreign_key;
      cols.push_back(jc);
    }
    tables.push_back({{"id", t.id}, {"name", t.name}, {"columns", cols}});
  }
  return nlohmann::json{{"tables", tables}}.dump(2);
}

SynthData synth_dataset(const SynthConfig& cfg) {
  cfg.validate();
  if (cfg.task == "flights") return synth_flights(cfg);
  SynthData data;
  data.uses_schema = true;
  data.schema = synth_schema();
  std::mt19937_64 rng(cfg.seed);
  data.train = schema_split(cfg.n_train, rng, data.schema);
  data.dev = schema_split(cfg.n_dev, rng, data.schema);
  return data;
}

}  // namespace relparse
