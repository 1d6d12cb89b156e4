#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "property_case.h"
#include "relparse/cli.h"
#include "relparse/evaluation.h"

namespace relparse::bench {
namespace {

using testgen::uniform_int;
using Form = std::vector<std::string>;
namespace fs = std::filesystem;

Form random_form(std::mt19937_64& rng, int depth) {
  static const Form heads = {"_and", "_or", "flight", "from", "to", "lambda", "exists"};
  static const Form atoms = {"$0", "$1", "$2", "$3", "a", "b", "c", "e", "denver:_ci"};
  if (depth == 0 || uniform_int(rng, 0, 2) == 0) return {atoms[uniform_int(rng, 0, static_cast<int>(atoms.size()) - 1)]};
  Form f = {"(", heads[uniform_int(rng, 0, static_cast<int>(heads.size()) - 1)]};
  const int n = uniform_int(rng, 1, 4);
  for (int i = 0; i < n; ++i) {
    const Form k = random_form(rng, depth - 1);
    f.insert(f.end(), k.begin(), k.end());
  }
  f.push_back(")");
  return f;
}

Form random_forest(std::mt19937_64& rng) {
  Form f;
  const int n = uniform_int(rng, 1, 2);
  for (int i = 0; i < n; ++i) {
    const Form t = random_form(rng, uniform_int(rng, 0, 5));
    f.insert(f.end(), t.begin(), t.end());
  }
  return f;
}

std::string normalize_idempotent(std::uint64_t seed, double) {
  std::mt19937_64 rng(seed);
  const Form f = random_forest(rng);
  const Form once = normalize_lambda(f);
  if (normalize_lambda(once) != once) return "normalize(normalize(f)) != normalize(f)";
  return {};
}

std::string normalize_keeps_symbols(std::uint64_t seed, double) {
  std::mt19937_64 rng(seed);
  const Form f = random_forest(rng);
  auto non_vars = [](Form x) {
    std::erase_if(x, [](const std::string& s) { return s.size() > 1 && s[0] == '$'; });
    std::sort(x.begin(), x.end());
    return x;
  };
  if (non_vars(normalize_lambda(f)) != non_vars(f)) return "non-variable multiset changed";
  return {};
}

std::string exact_match_properties(std::uint64_t seed, double) {
  std::mt19937_64 rng(seed);
  const Form a = random_forest(rng);
  const Form b = uniform_int(rng, 0, 2) == 0 ? a : random_forest(rng);
  if (!exact_match(a, a)) return "not reflexive";
  if (exact_match(a, b) != exact_match(b, a)) return "not symmetric";
  if (exact_match(a, b) != (a == b)) return "disagrees with sequence equality";
  return {};
}

const Register v1({"evaluation.normalize_idempotent", "evaluation",
                   "canonical form: rename variables by first use, sort commutative arguments", 1, 300, 0.0,
                   "exact", normalize_idempotent});
const Register v2({"evaluation.normalize_keeps_symbols", "evaluation",
                   "normalization only renames variables and reorders arguments", 1, 300, 0.0, "exact",
                   normalize_keeps_symbols});
const Register v3({"evaluation.exact_match_properties", "evaluation", "exact match is sequence equality", 1, 300,
                   0.0, "exact", exact_match_properties});

struct CliRun {
  int code = 0;
  std::string out;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("relparse_docsbench_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
  std::string operator/(const std::string& rel) const { return (path / rel).string(); }
};

// synth -> gen-candidates -> train -> parse, returning every artifact as text.
std::string pipeline_transcript(const ScratchDir& dir, std::uint64_t seed) {
  const std::string s = std::to_string(seed);
  std::string transcript;
  auto step = [&](const std::vector<std::string>& args) {
    const CliRun r = cli(args);
    transcript += std::to_string(r.code) + ":" + r.out;
    return r.code;
  };
  if (step({"synth", "--n-train", "12", "--n-dev", "4", "--seed", s, "--out-dir", dir / "raw"})) return transcript;
  step({"gen-candidates", "--input", dir / "raw/train.jsonl", "--output", dir / "train.jsonl", "--lexicon",
        dir / "raw/lexicon.jsonl"});
  step({"gen-candidates", "--input", dir / "raw/dev.jsonl", "--output", dir / "dev.jsonl", "--lexicon",
        dir / "raw/lexicon.jsonl"});
  step({"train", "--train", dir / "train.jsonl", "--dev", dir / "dev.jsonl", "--model-dir", dir / "model",
        "--max-steps", "2", "--eval-every", "1", "--d", "8", "--heads", "2", "--enc-layers", "1", "--dec-layers",
        "1", "--dropout", "0.2", "--seed", s});
  step({"parse", "--model-dir", dir / "model", "--lexicon", dir / "raw/lexicon.jsonl", "--max-len", "6",
        "--utterance", "flights from boston to denver"});
  for (const std::string f : {"train.jsonl", "dev.jsonl", "model/metrics.jsonl", "model/model.ckpt"})
    transcript += slurp(dir.path / f);
  return transcript;
}

std::string cli_deterministic(std::uint64_t seed, double) {
  ScratchDir a("det_a_" + std::to_string(seed)), b("det_b_" + std::to_string(seed));
  const std::string ta = pipeline_transcript(a, seed), tb = pipeline_transcript(b, seed);
  if (ta.size() != tb.size() || ta != tb) return "two runs with the same seed produced different artifacts";
  if (ta.find("0:{") != 0) return "pipeline did not run";
  return {};
}

std::string cli_exit_codes(std::uint64_t seed, double) {
  std::mt19937_64 rng(seed);
  ScratchDir dir("codes_" + std::to_string(seed));
  const std::string missing = dir / ("missing_" + std::to_string(rng()) + ".jsonl");
  const std::vector<std::vector<std::string>> usage_errors = {
      {},
      {"subcommand_" + std::to_string(rng() % 1000)},
      {"gen-candidates", "--input", missing, "--output", dir / "o.jsonl", "--lexicon", missing},
      {"train", "--train", missing, "--model-dir", dir / "m"},
      {"eval", "--model-dir", dir / "nowhere", "--data", missing},
      {"parse", "--model-dir", dir / "nowhere", "--utterance", "x"},
      {"synth", "--out-dir", dir / "s", "--n-train", std::to_string(-uniform_int(rng, 0, 5))},
      {"synth", "--out-dir", dir / "s", "--ambiguity-rate", std::to_string(1.0 + uniform_int(rng, 1, 9) / 10.0)},
      {"synth", "--out-dir", dir / "s", "--task", "task" + std::to_string(uniform_int(rng, 0, 99))},
      {"synth", "--out-dir", dir / "s", "--seed", "1", "--seed", "2"},
      {"train", "--config", missing},
  };
  const auto& args = usage_errors[uniform_int(rng, 0, static_cast<int>(usage_errors.size()) - 1)];
  const CliRun bad = cli(args);
  if (bad.code != kExitUsage) {
    std::string joined;
    for (const auto& a : args) joined += a + " ";
    return describe("exit ", bad.code, " for usage error: ", joined);
  }
  const CliRun ok = cli({"synth", "--n-train", std::to_string(uniform_int(rng, 1, 5)), "--n-dev", "1", "--seed",
                         std::to_string(seed), "--out-dir", dir / "ok"});
  if (ok.code != kExitOk) return describe("exit ", ok.code, " for a valid synth run");
  return {};
}

const Register c1({"cli.deterministic", "cli", "every command is a function of config and seed", 1, 100, 0.0,
                   "byte-identical artifacts", cli_deterministic});
const Register c2({"cli.exit_codes", "cli", "exit 0 on success, 2 on usage or config errors", 1, 100, 0.0, "exact",
                   cli_exit_codes});

// Bullets of the invariant map that name a case, grouped by module heading.
std::map<std::string, std::vector<std::string>> documented_cases() {
  std::ifstream in(std::string(RELPARSE_SOURCE_DIR) + "/docs/invariants.md");
  std::map<std::string, std::vector<std::string>> out;
  std::string line, module;
  const std::regex heading("^## (\\w+)");
  const std::regex bullet("^- .*`([a-z_]+\\.[a-z_0-9]+)`");
  std::smatch m;
  while (std::getline(in, line)) {
    if (std::regex_search(line, m, heading)) module = m[1];
    else if (std::regex_search(line, m, bullet)) out[module].push_back(m[1]);
  }
  return out;
}

std::string coverage(std::uint64_t seed, double) {
  static const auto documented = documented_cases();
  if (documented.empty()) return "docs/invariants.md missing or empty";
  std::mt19937_64 rng(seed);
  const auto& modules = module_names();
  const std::string& module = modules[uniform_int(rng, 0, static_cast<int>(modules.size()) - 1)];
  std::multiset<std::string> registered;
  for (const auto& pc : registry())
    if (pc.module == module) registered.insert(pc.name);
  const auto it = documented.find(module);
  if (it == documented.end()) return describe("no documented invariants for ", module);
  for (const auto& name : it->second)
    if (registered.count(name) != 1) return describe(name, " has ", registered.count(name), " property cases");
  if (registered.size() < it->second.size()) return describe(module, ": fewer cases than invariants");
  for (const auto& pc : registry()) {
    if (pc.n_seeds < 100) return describe(pc.name, " runs only ", pc.n_seeds, " seeds");
    if (pc.reference.empty()) return describe(pc.name, " has no reference");
  }
  return {};
}

const Register k1({"docsbench.coverage", "docsbench",
                   "one property case per documented invariant, each over at least 100 seeds", 1, 100, 0.0, "exact",
                   coverage});

}  // namespace
}  // namespace relparse::bench
