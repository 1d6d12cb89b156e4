#ifndef RELPARSE_VOCAB_H_
#define RELPARSE_VOCAB_H_

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace relparse {

// Symbol table with four reserved indices. Unknown symbols map to kOov.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kOov = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kNumSpecial = 4;

  Vocab();

  // Symbols seen at least min_count times, ordered by descending frequency
  // with lexicographic tie-breaks. Throws InputError on an empty corpus.
  static Vocab build(std::span<const std::vector<std::string>> corpus, int min_count);

  int index(const std::string& symbol) const;
  bool contains(const std::string& symbol) const { return index_.count(symbol) > 0; }
  const std::string& symbol(int index) const;
  std::size_t size() const { return symbols_.size(); }
  int min_count() const { return min_count_; }
  const std::vector<std::string>& symbols() const { return symbols_; }

  // Appends a symbol if absent; returns its index either way.
  int add(const std::string& symbol);

  static Vocab from_symbols(const std::vector<std::string>& symbols, int min_count);

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
  int min_count_ = 1;
};

}  // namespace relparse

#endif  // RELPARSE_VOCAB_H_
