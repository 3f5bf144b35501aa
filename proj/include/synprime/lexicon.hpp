#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace synprime {

enum class PartOfSpeech { Noun, Verb, Adverb, Adjective, Intensifier, Function };

enum class Form { Singular, Plural, ActivePast, PassiveParticiple, Surface };

std::string_view to_string(PartOfSpeech pos);

struct LexiconEntry {
  std::string lemma;
  PartOfSpeech pos = PartOfSpeech::Function;
  std::string subclass;
  std::map<Form, std::string> forms;

  // Throws DataError when the form is missing.
  const std::string& form(Form f) const;
  bool has_form(Form f) const { return forms.contains(f); }

  // Nouns, verbs, adverbs and adjectives; intensifiers and function words are exempt
  // from the adaptation/test disjointness constraint.
  bool is_content() const;

  friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;
};

// Which subclasses may combine. Keys and values are subclass labels.
struct CompatibilityMatrix {
  using Table = std::map<std::string, std::set<std::string>>;
  Table verb_subject;    // verb subclass -> subject noun subclasses
  Table verb_object;     // verb subclass -> object noun subclasses
  Table noun_adjective;  // noun subclass -> adjective subclasses
  Table verb_adverb;     // verb subclass -> adverb subclasses

  bool allows_subject(const LexiconEntry& verb, const LexiconEntry& noun) const;
  bool allows_object(const LexiconEntry& verb, const LexiconEntry& noun) const;
  bool allows_adjective(const LexiconEntry& noun, const LexiconEntry& adjective) const;
  bool allows_adverb(const LexiconEntry& verb, const LexiconEntry& adverb) const;
};

// An immutable list of entries with per-part-of-speech indices.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::vector<LexiconEntry> entries);

  const std::vector<LexiconEntry>& entries() const { return entries_; }
  const LexiconEntry& operator[](std::size_t i) const { return entries_[i]; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::span<const std::size_t> indices(PartOfSpeech pos) const;
  std::set<std::string> subclasses(PartOfSpeech pos) const;
  std::optional<std::size_t> find(std::string_view lemma, PartOfSpeech pos) const;

  // Entries for which keep(entry) holds, in original order.
  Lexicon filter(const std::function<bool(const LexiconEntry&)>& keep) const;

 private:
  std::vector<LexiconEntry> entries_;
  std::map<PartOfSpeech, std::vector<std::size_t>> by_pos_;
};

struct LexiconCounts {
  std::size_t nouns = 0, verbs = 0, adverbs = 0, adjectives = 0, intensifiers = 0;
};

LexiconCounts count_entries(const Lexicon& lexicon);

// Checks every entry and compatibility invariant; throws DataError naming the
// first violation (missing forms, dangling subclass references, verbs without a
// subject or object subclass).
void validate_lexicon(const Lexicon& lexicon, const CompatibilityMatrix& compat);

// Parses the JSON lexicon schema documented in README.md and validates it.
std::pair<Lexicon, CompatibilityMatrix> parse_lexicon(std::string_view json_text);
std::pair<Lexicon, CompatibilityMatrix> load_lexicon(const std::filesystem::path& path);

// Fixed function words emitted by the templates.
const std::set<std::string>& function_words();

}  // namespace synprime
