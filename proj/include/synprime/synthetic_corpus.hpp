#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "synprime/lexicon.hpp"
#include "synprime/templates.hpp"
#include "synprime/vocabulary.hpp"

namespace synprime {

// Relative weights of the sentence types drawn by the synthetic grammar. A
// weight of zero disables the type.
struct SyntheticGrammar {
  double transitive = 0.30;        // the N (adv) V the N (adv) .
  double passive = 0.08;           // the N was V-ed by the N .
  double copula = 0.12;            // the N was (very) ADJ .
  double modified_copula = 0.10;   // copula with a relative clause on the subject
  double coordination = 0.10;      // the N V the N and V the N .
  double subject_modified = 0.20;  // any of the seven experimental structures
  double object_modified = 0.10;   // relative clause attached to the object
};

struct SyntheticCorpusConfig {
  std::uint64_t target_tokens = 100000;  // generation stops once this many tokens exist
  std::uint64_t seed = 1;
  NoiseConfig noise;
  SyntheticGrammar grammar;
};

// Sentences from a small probabilistic grammar over the lexicon, respecting the
// compatibility tables. Deterministic given the config.
Corpus generate_synthetic_corpus(const Lexicon& lexicon, const CompatibilityMatrix& compat,
                                 const SyntheticCorpusConfig& config);

// Lowercases and splits on whitespace; . , ; : ! ? " ( ) become separate tokens.
Sentence tokenize_line(const std::string& line);

// One sentence per line; blank lines are skipped.
Corpus read_corpus(std::istream& in);
Corpus read_corpus_file(const std::filesystem::path& path);
void write_corpus(std::ostream& out, const Corpus& corpus);

// Splits a corpus into `n_slices` disjoint consecutive slices of `tokens_per_slice`
// tokens each (whole sentences; a slice ends at the first sentence boundary at or
// past the budget). Throws DataError if the corpus is too small.
std::vector<Corpus> corpus_slices(const Corpus& corpus, int n_slices,
                                  std::uint64_t tokens_per_slice);

}  // namespace synprime
