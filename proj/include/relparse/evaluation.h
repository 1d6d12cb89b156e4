// Exact-match scoring, lambda-form normalization and evaluation reports.

#ifndef RELPARSE_EVALUATION_H_
#define RELPARSE_EVALUATION_H_

#include <set>
#include <span>
#include <string>
#include <vector>

#include "relparse/model.h"
#include "relparse/pipeline.h"

namespace relparse {

bool exact_match(std::span<const std::string> pred, std::span<const std::string> gold);

inline const std::set<std::string>& default_commutative_ops() {
  static const std::set<std::string> ops = {"_and", "_or"};
  return ops;
}

// Renames variables ($-prefixed symbols) to $v0, $v1, ... by first
// occurrence and sorts the arguments of commutative operators by their
// serialized form, bottom-up. Repeats until stable, so the result is a
// fixed point. Throws ParseError on unbalanced parentheses.
std::vector<std::string> normalize_lambda(std::span<const std::string> form,
                                          const std::set<std::string>& commutative_ops =
                                              default_commutative_ops());

enum class EvalMode { kRaw, kLambda };
EvalMode eval_mode_from_name(const std::string& name);  // "raw" or "lambda"

struct EvalRecord {
  std::vector<std::string> predicted;
  std::vector<std::string> gold;
  bool match = false;
  bool dropped = false;
};

struct EvalReport {
  std::size_t n_examples = 0;
  std::size_t n_correct = 0;
  std::size_t n_dropped_as_incorrect = 0;
  double accuracy = 0.0;
  std::vector<EvalRecord> records;

  std::string summary_json() const;
  void write_json(const std::string& path) const;
  void write_records_jsonl(const std::string& path) const;
};

struct EvalOptions {
  EvalMode mode = EvalMode::kRaw;
  int max_decode_len = 100;
  std::set<std::string> commutative_ops = default_commutative_ops();
};

// Scores predicted symbol sequences against gold; dropped examples count as
// incorrect whatever was predicted.
EvalReport score_predictions(std::span<const PreparedExample> examples,
                             const std::vector<std::vector<std::string>>& predictions,
                             const EvalOptions& options);

// Greedy-decodes every example and scores it.
EvalReport evaluate(const Model& model, std::span<const PreparedExample> examples,
                    const EvalOptions& options = {});

}  // namespace relparse

#endif  // RELPARSE_EVALUATION_H_
