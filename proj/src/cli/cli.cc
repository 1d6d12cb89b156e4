#include "relparse/cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "relparse/checkpoint.h"
#include "relparse/errors.h"
#include "relparse/evaluation.h"
#include "relparse/pipeline.h"
#include "relparse/synth.h"
#include "relparse/training.h"

namespace relparse {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int line_no = 0;
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    out.push_back({key, trim(line.substr(eq + 1))});
  }
  return out;
}

namespace {

struct ModelOptions {
  ModelConfig cfg;
  std::string formulation = "edge_vector";
  bool copy_entity = true;
  bool copy_token = false;

  void add(CLI::App* app) {
    app->add_option("--d", cfg.d, "model width");
    app->add_option("--heads", cfg.n_heads, "attention heads");
    app->add_option("--enc-layers", cfg.n_enc, "encoder layers (searched over 1-4)");
    app->add_option("--dec-layers", cfg.n_dec, "decoder layers (searched over 1-4)");
    app->add_option("--d-ff", cfg.d_ff, "feed-forward width; 0 means 4*d");
    app->add_option("--d-type", cfg.d_type, "node-type embedding width");
    app->add_option("--dropout", cfg.dropout_p, "dropout probability");
    app->add_option("--clip-distance", cfg.clip_distance, "relative-position clipping distance");
    app->add_option("--formulation", formulation, "vanilla, edge_matrix or edge_vector");
    app->add_option("--copy-entity", copy_entity, "enable CopyEntity actions");
    app->add_option("--copy-token", copy_token, "enable CopyToken actions");
  }

  ModelConfig resolve() {
    cfg.formulation = formulation_from_name(formulation);
    cfg.allow_copy_entity = copy_entity;
    cfg.allow_copy_token = copy_token;
    return cfg;
  }
};

struct CandidateOptions {
  std::string lexicon;
  std::string schema;
  double threshold = kSchemaAlignThreshold;
  Lexicon lexicon_data;
  Schema schema_data;

  void add(CLI::App* app) {
    app->add_option("--lexicon", lexicon, "lexicon JSONL");
    app->add_option("--schema", schema, "schema JSON");
    app->add_option("--threshold", threshold, "schema alignment threshold");
  }

  CandidateSource load() {
    if (lexicon.empty() && schema.empty()) throw InputError("one of --lexicon or --schema is required");
    CandidateSource src;
    src.threshold = threshold;
    if (!lexicon.empty()) {
      lexicon_data = load_lexicon(lexicon);
      src.lexicon = &lexicon_data;
    }
    if (!schema.empty()) {
      schema_data = load_schema(schema);
      src.schema = &schema_data;
    }
    return src;
  }
};

Ablation ablation_from(bool span, bool relation) { return {span, relation}; }

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw InputError(what + " is required");
  if (!fs::exists(path)) throw InputError(what + " not found: " + path);
}

int cmd_gen_candidates(const std::string& input, const std::string& output, CandidateOptions& cands,
                       std::ostream& out) {
  require_file(input, "--input");
  const CandidateSource src = cands.load();
  std::vector<Example> examples = read_examples(input);
  const AnnotationStats stats = annotate_examples(examples, src);
  write_examples(output, examples);
  out << json{{"n_examples", stats.n_examples},
              {"n_candidates", stats.n_candidates},
              {"n_ambiguous", stats.n_ambiguous},
              {"ambiguous_fraction", stats.ambiguous_fraction()},
              {"n_dropped", stats.n_dropped}}
             .dump()
      << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::string train_path, dev_path, model_dir, metrics_path;
  int token_min_count = 2;
  bool ablate_span = false, ablate_relation = false;
};

int cmd_train(TrainArgs& a, ModelOptions& mopt, TrainConfig tcfg, std::ostream& out) {
  require_file(a.train_path, "--train");
  if (!a.dev_path.empty()) require_file(a.dev_path, "--dev");
  if (a.model_dir.empty()) throw InputError("--model-dir is required");
  tcfg.validate();
  const ModelConfig mcfg = mopt.resolve();
  mcfg.validate();

  const std::vector<Example> train_ex = read_examples(a.train_path);
  const std::vector<Example> dev_ex =
      a.dev_path.empty() ? std::vector<Example>{} : read_examples(a.dev_path);
  Model model(mcfg, build_vocabularies(train_ex, a.token_min_count));
  const Ablation ablation = ablation_from(a.ablate_span, a.ablate_relation);
  const auto train_set = prepare_examples(model, train_ex, ablation);
  const auto dev_set = prepare_examples(model, dev_ex, ablation);

  fs::create_directories(a.model_dir);
  const std::string metrics_path =
      a.metrics_path.empty() ? (fs::path(a.model_dir) / "metrics.jsonl").string() : a.metrics_path;
  std::ofstream metrics(metrics_path);
  if (!metrics) throw InputError("cannot write " + metrics_path);
  AdamState adam;
  const TrainResult result = train(model, train_set, dev_set, tcfg, adam, &metrics);
  model.save(a.model_dir);
  save_adam_state((fs::path(a.model_dir) / "model.ckpt.opt").string(), adam);
  out << json{{"steps", result.steps},
              {"final_dev_accuracy", result.final_dev_accuracy},
              {"best_dev_accuracy", result.best_dev_accuracy},
              {"stopped_early", result.stopped_early},
              {"parameters", model.params().scalar_count()}}
             .dump()
      << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string model_dir, data, report, records, mode = "raw", commutative = "_and,_or";
  int max_len = 100;
  bool ablate_span = false, ablate_relation = false;
};

std::set<std::string> split_commas(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.insert(item);
  return out;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  if (a.model_dir.empty()) throw InputError("--model-dir is required");
  require_file((fs::path(a.model_dir) / "model.json").string(), "checkpoint");
  require_file(a.data, "--data");
  const Model model = Model::load(a.model_dir);
  const auto examples = read_examples(a.data);
  const auto prepared =
      prepare_examples(model, examples, ablation_from(a.ablate_span, a.ablate_relation));
  EvalOptions opts;
  opts.mode = eval_mode_from_name(a.mode);
  opts.max_decode_len = a.max_len;
  opts.commutative_ops = split_commas(a.commutative);
  const EvalReport report = evaluate(model, prepared, opts);
  if (!a.report.empty()) report.write_json(a.report);
  if (!a.records.empty()) report.write_records_jsonl(a.records);
  out << json::parse(report.summary_json()).dump() << '\n';
  return kExitOk;
}

int cmd_parse(const std::string& model_dir, const std::string& utterance, int max_len,
              CandidateOptions& cands, std::ostream& out) {
  if (model_dir.empty()) throw InputError("--model-dir is required");
  require_file((fs::path(model_dir) / "model.json").string(), "checkpoint");
  Example ex;
  ex.utterance = utterance;
  ex.tokens = tokenize(utterance);
  if (ex.tokens.empty()) throw InputError("empty utterance");
  const CandidateSource src = cands.load();
  ex.entities = src.candidates(ex.tokens, ex.relations);
  ex.annotated = true;
  const Model model = Model::load(model_dir);
  const PreparedExample p = prepare_example(model, ex);
  const auto actions = model.parse(p.graph, max_len);
  const auto symbols = actions_to_logical_form(actions, p.graph, model.vocabs().outputs);
  for (std::size_t i = 0; i < symbols.size(); ++i) out << (i ? " " : "") << symbols[i];
  out << '\n';
  return kExitOk;
}

int cmd_synth(const SynthConfig& cfg, const std::string& out_dir, std::ostream& out) {
  if (out_dir.empty()) throw InputError("--out-dir is required");
  const SynthData data = synth_dataset(cfg);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_examples((dir / "train.jsonl").string(), data.train);
  write_examples((dir / "dev.jsonl").string(), data.dev);
  if (data.uses_schema) {
    std::ofstream f(dir / "schema.json");
    f << schema_to_json(data.schema) << '\n';
  } else {
    save_lexicon(data.lexicon, (dir / "lexicon.jsonl").string());
  }
  out << json{{"task", cfg.task}, {"n_train", data.train.size()}, {"n_dev", data.dev.size()}}.dump()
      << '\n';
  return kExitOk;
}

// Inserts config-file values, right after the subcommand name, for options
// absent from the command line.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  std::string config_path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) return args;
  static const std::set<std::string> kCommands = {"gen-candidates", "train", "eval", "parse", "synth"};
  auto cmd = std::find_if(rest.begin(), rest.end(),
                          [](const std::string& a) { return kCommands.count(a) > 0; });
  if (cmd == rest.end()) return rest;
  std::vector<std::string> injected;
  for (const auto& [key, value] : read_config_file(config_path)) {
    const std::string flag = "--" + key;
    const bool given = std::any_of(rest.begin(), rest.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!given) injected.push_back(flag + "=" + value);
  }
  rest.insert(cmd + 1, injected.begin(), injected.end());
  return rest;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relation-aware semantic parser"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  std::string config_unused;
  app.add_option("--config", config_unused, "key=value file; flags override it");

  // gen-candidates
  auto* gen = app.add_subcommand("gen-candidates", "annotate examples with entity candidates");
  std::string gen_input, gen_output;
  CandidateOptions gen_cands;
  gen->add_option("--input", gen_input, "raw examples JSONL");
  gen->add_option("--output", gen_output, "annotated JSONL")->required();
  gen_cands.add(gen);

  // train
  auto* tr = app.add_subcommand("train", "train a model");
  TrainArgs targs;
  ModelOptions train_model;
  TrainConfig tcfg;
  tr->add_option("--train", targs.train_path, "annotated training JSONL");
  tr->add_option("--dev", targs.dev_path, "annotated dev JSONL");
  tr->add_option("--model-dir", targs.model_dir, "output directory");
  tr->add_option("--metrics", targs.metrics_path, "metrics JSONL (default <model-dir>/metrics.jsonl)");
  tr->add_option("--token-min-count", targs.token_min_count, "input tokens rarer than this map to <unk>");
  tr->add_flag("--ablate-span-edges", targs.ablate_span, "replace span edges with the generic label");
  tr->add_flag("--ablate-entity-relation-edges", targs.ablate_relation,
               "replace entity-entity relations with the generic label");
  tr->add_option("--batch-size", tcfg.batch_size);
  tr->add_option("--lr-scale", tcfg.lr_scale);
  tr->add_option("--warmup", tcfg.warmup_steps, "warmup steps");
  tr->add_option("--max-steps", tcfg.max_steps);
  tr->add_option("--eval-every", tcfg.eval_every);
  tr->add_option("--patience", tcfg.patience);
  tr->add_option("--target-accuracy", tcfg.target_accuracy, "stop once dev accuracy reaches this");
  tr->add_option("--max-decode-len", tcfg.max_decode_len);
  tr->add_option("--seed", tcfg.seed);
  train_model.add(tr);

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a trained model");
  EvalArgs eargs;
  ev->add_option("--model-dir", eargs.model_dir);
  ev->add_option("--data", eargs.data, "annotated JSONL");
  ev->add_option("--report", eargs.report, "report JSON path");
  ev->add_option("--records", eargs.records, "per-example JSONL path");
  ev->add_option("--mode", eargs.mode, "raw or lambda");
  ev->add_option("--commutative", eargs.commutative, "comma-separated unordered operators");
  ev->add_option("--max-len", eargs.max_len);
  ev->add_flag("--ablate-span-edges", eargs.ablate_span);
  ev->add_flag("--ablate-entity-relation-edges", eargs.ablate_relation);

  // parse
  auto* pa = app.add_subcommand("parse", "parse one utterance");
  std::string parse_dir, utterance;
  int parse_max_len = 100;
  CandidateOptions parse_cands;
  pa->add_option("--model-dir", parse_dir);
  pa->add_option("--utterance,utterance", utterance, "text to parse");
  pa->add_option("--max-len", parse_max_len);
  parse_cands.add(pa);

  // synth
  auto* sy = app.add_subcommand("synth", "write a synthetic dataset");
  SynthConfig scfg;
  std::string synth_dir;
  sy->add_option("--task", scfg.task, "flights or schema");
  sy->add_option("--n-train", scfg.n_train);
  sy->add_option("--n-dev", scfg.n_dev);
  sy->add_option("--ambiguity-rate", scfg.ambiguity_rate);
  sy->add_option("--seed", scfg.seed);
  sy->add_option("--out-dir", synth_dir);

  try {
    std::vector<std::string> args = merge_config(raw_args);
    std::vector<char*> argv;
    std::string prog = "relparse";
    argv.push_back(prog.data());
    for (auto& a : args) argv.push_back(a.data());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    }

    if (*gen) return cmd_gen_candidates(gen_input, gen_output, gen_cands, out);
    if (*tr) return cmd_train(targs, train_model, tcfg, out);
    if (*ev) return cmd_eval(eargs, out);
    if (*pa) return cmd_parse(parse_dir, utterance, parse_max_len, parse_cands, out);
    if (*sy) return cmd_synth(scfg, synth_dir, out);
    err << "error: no subcommand\n";
    return kExitUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace relparse
