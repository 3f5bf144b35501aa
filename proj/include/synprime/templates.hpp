#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "synprime/lexicon.hpp"
#include "synprime/random.hpp"
#include "synprime/structure.hpp"

namespace synprime {

// Lexical material shared by the seven structural variants of one item.
//
// `agent_mc_verb` is the main verb used when the agent noun heads the main
// clause (ActiveSubjectRC, CoordASRC); it must accept `subject` as its subject,
// whereas `mc_verb` must accept `rc_object`.
struct SlotFill {
  LexiconEntry subject;
  LexiconEntry rc_object;
  LexiconEntry mc_object;
  LexiconEntry rc_verb;
  LexiconEntry mc_verb;
  LexiconEntry agent_mc_verb;
  std::optional<LexiconEntry> mc_adverb;
  std::optional<LexiconEntry> rc_adverb;

  friend bool operator==(const SlotFill&, const SlotFill&) = default;
};

struct NoiseConfig {
  double p_plural = 0.40;
  double p_adjective = 0.50;
  double p_intensifier = 0.40;
  double p_adverb_present = 0.50;
  double p_postverbal = 0.50;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

struct NounNoise {
  bool plural = false;
  std::optional<std::string> adjective;
  std::optional<std::string> intensifier;
  friend bool operator==(const NounNoise&, const NounNoise&) = default;
};

struct AdverbNoise {
  bool present = false;
  bool postverbal = false;
  friend bool operator==(const AdverbNoise&, const AdverbNoise&) = default;
};

// Sampled noise outcomes; together with the fill they determine the surface string.
struct NoiseFlags {
  NounNoise subject;
  NounNoise rc_object;
  NounNoise mc_object;
  AdverbNoise rc_adverb;
  AdverbNoise mc_adverb;

  std::string to_string() const;
  friend bool operator==(const NoiseFlags&, const NoiseFlags&) = default;
};

struct GeneratedSentence {
  std::vector<std::string> tokens;
  StructureId structure = StructureId::UnreducedObjectRC;
  SlotFill fill;
  NoiseFlags noise_flags;
  int list_id = -1;
  int sentence_id = -1;
};

struct ListSizes {
  int adaptation = 20;
  int test = 50;
};

struct ExperimentList {
  int list_id = 0;
  std::array<std::vector<GeneratedSentence>, kNumStructures> adaptation;
  std::array<std::vector<GeneratedSentence>, kNumStructures> test;
};

// Draws one fill, uniformly at each slot among the choices compatible with the
// slots drawn before it (order: rc_verb, subject, rc_object, mc_verb, mc_object,
// agent_mc_verb, rc_adverb, mc_adverb); dead ends restart the draw. Throws
// DataError naming the blocking slot when no completion is found.
SlotFill sample_slot_fill(const Lexicon& lexicon, const CompatibilityMatrix& compat, Rng& rng);

// Draws plural/adjective/intensifier/adverb outcomes for a fill. Adjectives come
// from `lexicon` and respect the noun-adjective compatibility table.
NoiseFlags sample_noise(const SlotFill& fill, const Lexicon& lexicon,
                        const CompatibilityMatrix& compat, const NoiseConfig& noise, Rng& rng);

// Pure: identical inputs give identical tokens. Lowercase tokens, final ".".
GeneratedSentence realize(const SlotFill& fill, StructureId structure, const NoiseFlags& flags);

// Content lemmas (nouns, verbs, adverbs, adjectives) that appear in the sentence.
std::set<std::string> content_lemmas(const GeneratedSentence& sentence);

// Builds `n_lists` lists. Within a list every content lemma is assigned either to
// the adaptation pool or to the test pool, so the two sets never share content
// words; lemmas may recur across lists.
std::vector<ExperimentList> generate_lists(const Lexicon& lexicon,
                                           const CompatibilityMatrix& compat, int n_lists,
                                           const NoiseConfig& noise, ListSizes sizes = {},
                                           double adaptation_share = 0.4);

std::string join_tokens(const std::vector<std::string>& tokens);
// Sentence-cased rendering: "The conspiracy ... country ."
std::string display_text(const std::vector<std::string>& tokens);

enum class ListRole { Adaptation, Test };
std::string_view to_string(ListRole role);

// One line of the lists file.
struct ListRow {
  int sentence_id = 0;
  int list_id = 0;
  StructureId structure = StructureId::UnreducedObjectRC;
  ListRole role = ListRole::Adaptation;
  std::vector<std::string> tokens;
  std::string noise_flags;
};

inline constexpr std::string_view kListsSchema = "synprime-lists\t1";

// Tab-separated: sentence_id, list_id, structure, role, tokens, noise_flags,
// after a schema line and a header line. Rows ordered by list, role, structure, id.
void write_lists(std::ostream& out, const std::vector<ExperimentList>& lists);
std::vector<ListRow> read_lists(std::istream& in);

}  // namespace synprime
