#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace synprime {

using Sentence = std::vector<std::string>;
using Corpus = std::vector<Sentence>;

// Bijection between tokens and dense ids. Ids 0 and 1 are always <unk> and <eos>.
class Vocabulary {
 public:
  static constexpr std::string_view kUnk = "<unk>";
  static constexpr std::string_view kEos = "<eos>";

  Vocabulary();

  // Tokens occurring at least `min_count` times, ordered by descending count and
  // then lexicographically.
  static Vocabulary build(const Corpus& corpus, int min_count = 2);
  // Restores a vocabulary from its id-ordered token list; throws DataError unless
  // the list starts with <unk>, <eos> and has no duplicates.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }
  int unk_id() const { return 0; }
  int eos_id() const { return 1; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<int> encode(std::span<const std::string> sentence) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  struct EmptyTag {};
  explicit Vocabulary(EmptyTag) {}

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

// Stream layout used for training: <eos> w1 ... wn <eos> w1 ... <eos>.
std::vector<int> encode_stream(const Vocabulary& vocab, const Corpus& corpus);

std::size_t token_count(const Corpus& corpus);

}  // namespace synprime
