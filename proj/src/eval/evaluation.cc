#include "relparse/evaluation.h"

#include <algorithm>
#include <fstream>
#include <map>

#include "json.hpp"
#include "relparse/errors.h"

namespace relparse {

using json = nlohmann::json;

bool exact_match(std::span<const std::string> pred, std::span<const std::string> gold) {
  return std::equal(pred.begin(), pred.end(), gold.begin(), gold.end());
}

namespace {

struct Form {
  std::string atom;  // empty for a parenthesized list
  std::vector<Form> kids;
  bool is_list() const { return atom.empty(); }
};

bool is_variable(const std::string& s) { return s.size() > 1 && s[0] == '$'; }

std::vector<Form> parse_forest(std::span<const std::string> symbols) {
  std::vector<std::vector<Form>> stack(1);
  for (const auto& s : symbols) {
    if (s == "(") {
      stack.emplace_back();
    } else if (s == ")") {
      if (stack.size() == 1) throw ParseError("normalize_lambda: unmatched ')'");
      Form list;
      list.kids = std::move(stack.back());
      stack.pop_back();
      stack.back().push_back(std::move(list));
    } else {
      stack.back().push_back({s, {}});
    }
  }
  if (stack.size() != 1) throw ParseError("normalize_lambda: unmatched '('");
  return std::move(stack.front());
}

void serialize(const Form& f, bool mask_vars, std::vector<std::string>& out) {
  if (!f.is_list()) {
    out.push_back(mask_vars && is_variable(f.atom) ? "$" : f.atom);
    return;
  }
  out.push_back("(");
  for (const auto& k : f.kids) serialize(k, mask_vars, out);
  out.push_back(")");
}

std::string key(const Form& f, bool mask_vars) {
  std::vector<std::string> parts;
  serialize(f, mask_vars, parts);
  std::string s;
  for (const auto& p : parts) s += p + ' ';
  return s;
}

void rename(Form& f, std::map<std::string, std::string>& names) {
  if (!f.is_list()) {
    if (is_variable(f.atom)) {
      auto [it, fresh] = names.try_emplace(f.atom, "");
      if (fresh) it->second = "$v" + std::to_string(names.size() - 1);
      f.atom = it->second;
    }
    return;
  }
  for (auto& k : f.kids) rename(k, names);
}

void sort_commutative(Form& f, const std::set<std::string>& ops) {
  if (!f.is_list()) return;
  for (auto& k : f.kids) sort_commutative(k, ops);
  if (f.kids.size() > 2 && !f.kids[0].is_list() && ops.count(f.kids[0].atom)) {
    std::vector<std::pair<std::pair<std::string, std::string>, Form>> keyed;
    for (std::size_t i = 1; i < f.kids.size(); ++i)
      keyed.push_back({{key(f.kids[i], true), key(f.kids[i], false)}, std::move(f.kids[i])});
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < keyed.size(); ++i) f.kids[i + 1] = std::move(keyed[i].second);
  }
}

}  // namespace

std::vector<std::string> normalize_lambda(std::span<const std::string> form,
                                          const std::set<std::string>& commutative_ops) {
  std::vector<Form> forest = parse_forest(form);
  std::vector<std::string> current(form.begin(), form.end());
  for (int round = 0; round < 8; ++round) {
    std::map<std::string, std::string> names;
    for (auto& f : forest) rename(f, names);
    for (auto& f : forest) sort_commutative(f, commutative_ops);
    std::vector<std::string> next;
    for (const auto& f : forest) serialize(f, false, next);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

EvalMode eval_mode_from_name(const std::string& name) {
  if (name == "raw") return EvalMode::kRaw;
  if (name == "lambda") return EvalMode::kLambda;
  throw InputError("unknown eval mode '" + name + "' (expected raw or lambda)");
}

std::string EvalReport::summary_json() const {
  return json{{"n_examples", n_examples},
              {"n_correct", n_correct},
              {"n_dropped_as_incorrect", n_dropped_as_incorrect},
              {"accuracy", accuracy}}
      .dump(2);
}

void EvalReport::write_json(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << summary_json() << '\n';
}

void EvalReport::write_records_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  for (const auto& r : records) {
    out << json{{"predicted", r.predicted}, {"gold", r.gold}, {"match", r.match}, {"dropped", r.dropped}}
               .dump()
        << '\n';
  }
}

EvalReport score_predictions(std::span<const PreparedExample> examples,
                             const std::vector<std::vector<std::string>>& predictions,
                             const EvalOptions& options) {
  if (predictions.size() != examples.size()) {
    throw InputError("score_predictions: one prediction per example required");
  }
  EvalReport report;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    EvalRecord r;
    r.predicted = predictions[i];
    r.gold = examples[i].gold;
    r.dropped = examples[i].dropped;
    if (!r.dropped) {
      if (options.mode == EvalMode::kLambda) {
        const auto gold = normalize_lambda(r.gold, options.commutative_ops);
        try {
          r.match = exact_match(normalize_lambda(r.predicted, options.commutative_ops), gold);
        } catch (const ParseError&) {
          r.match = false;  // malformed prediction
        }
      } else {
        r.match = exact_match(r.predicted, r.gold);
      }
    }
    ++report.n_examples;
    if (r.match) ++report.n_correct;
    if (r.dropped) ++report.n_dropped_as_incorrect;
    report.records.push_back(std::move(r));
  }
  report.accuracy = report.n_examples == 0 ? 0.0
                                           : static_cast<double>(report.n_correct) /
                                                 static_cast<double>(report.n_examples);
  return report;
}

EvalReport evaluate(const Model& model, std::span<const PreparedExample> examples,
                    const EvalOptions& options) {
  std::vector<std::vector<std::string>> predictions;
  predictions.reserve(examples.size());
  for (const auto& ex : examples) {
    const auto actions = model.parse(ex.graph, options.max_decode_len);
    predictions.push_back(actions_to_logical_form(actions, ex.graph, model.vocabs().outputs));
  }
  return score_predictions(examples, predictions, options);
}

}  // namespace relparse
