#include "synprime/vocabulary.hpp"

#include <algorithm>
#include <map>

#include "synprime/error.hpp"

namespace synprime {

Vocabulary::Vocabulary() : Vocabulary(from_tokens({std::string(kUnk), std::string(kEos)})) {}

Vocabulary Vocabulary::build(const Corpus& corpus, int min_count) {
  std::map<std::string, long> counts;
  for (const auto& sentence : corpus) {
    for (const auto& t : sentence) ++counts[t];
  }
  std::vector<std::pair<std::string, long>> kept;
  for (auto& [token, count] : counts) {
    if (count >= min_count && token != kUnk && token != kEos) kept.emplace_back(token, count);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens = {std::string(kUnk), std::string(kEos)};
  for (auto& [token, count] : kept) tokens.push_back(token);
  return from_tokens(std::move(tokens));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[0] != kUnk || tokens[1] != kEos) {
    throw DataError("vocabulary must begin with <unk> and <eos>");
  }
  Vocabulary v{EmptyTag{}};
  v.tokens_ = std::move(tokens);
  v.ids_.reserve(v.tokens_.size());
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.ids_.emplace(v.tokens_[i], static_cast<int>(i)).second) {
      throw DataError("duplicate vocabulary token '" + v.tokens_[i] + "'");
    }
  }
  return v;
}

int Vocabulary::id(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  return it == ids_.end() ? unk_id() : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.contains(std::string(token));
}

std::vector<int> Vocabulary::encode(std::span<const std::string> sentence) const {
  std::vector<int> ids;
  ids.reserve(sentence.size());
  for (const auto& t : sentence) ids.push_back(id(t));
  return ids;
}

std::vector<int> encode_stream(const Vocabulary& vocab, const Corpus& corpus) {
  std::vector<int> stream;
  stream.reserve(token_count(corpus) + corpus.size() + 1);
  stream.push_back(vocab.eos_id());
  for (const auto& sentence : corpus) {
    for (const auto& t : sentence) stream.push_back(vocab.id(t));
    stream.push_back(vocab.eos_id());
  }
  return stream;
}

std::size_t token_count(const Corpus& corpus) {
  std::size_t n = 0;
  for (const auto& s : corpus) n += s.size();
  return n;
}

}  // namespace synprime
