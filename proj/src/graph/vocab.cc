#include "relparse/vocab.h"

#include <algorithm>
#include <map>

#include "relparse/errors.h"

namespace relparse {
namespace {

const std::vector<std::string>& special_symbols() {
  static const std::vector<std::string> kSpecial = {"<pad>", "<unk>", "<s>", "</s>"};
  return kSpecial;
}

}  // namespace

Vocab::Vocab() {
  for (const auto& s : special_symbols()) add(s);
}

Vocab Vocab::build(std::span<const std::vector<std::string>> corpus, int min_count) {
  if (corpus.empty()) throw InputError("Vocab::build: empty corpus");
  std::map<std::string, int> counts;
  for (const auto& seq : corpus)
    for (const auto& tok : seq) ++counts[tok];
  std::vector<std::pair<std::string, int>> kept;
  for (const auto& [sym, n] : counts)
    if (n >= min_count) kept.emplace_back(sym, n);
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab vocab;
  vocab.min_count_ = min_count;
  for (const auto& [sym, n] : kept) vocab.add(sym);
  return vocab;
}

int Vocab::index(const std::string& symbol) const {
  auto it = index_.find(symbol);
  return it == index_.end() ? kOov : it->second;
}

const std::string& Vocab::symbol(int index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= symbols_.size()) {
    throw InputError("Vocab::symbol: index " + std::to_string(index) + " out of range");
  }
  return symbols_[index];
}

int Vocab::add(const std::string& symbol) {
  auto [it, inserted] = index_.emplace(symbol, static_cast<int>(symbols_.size()));
  if (inserted) symbols_.push_back(symbol);
  return it->second;
}

Vocab Vocab::from_symbols(const std::vector<std::string>& symbols, int min_count) {
  const auto& special = special_symbols();
  if (symbols.size() < special.size() || !std::equal(special.begin(), special.end(), symbols.begin())) {
    throw InputError("Vocab::from_symbols: missing reserved symbols");
  }
  Vocab vocab;
  vocab.min_count_ = min_count;
  for (const auto& s : symbols) vocab.add(s);
  return vocab;
}

}  // namespace relparse
