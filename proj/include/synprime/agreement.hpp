#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "synprime/language_model.hpp"
#include "synprime/lexicon.hpp"

namespace synprime {

// Two sentences that differ only in the form of one verb.
struct MinimalPair {
  std::string construction;
  Sentence grammatical;
  Sentence ungrammatical;
};

// Index of the single differing token. Throws DataError when the lengths differ
// or the sentences differ at more than one position (or none).
std::size_t verb_position(const MinimalPair& pair);

struct AgreementScore {
  double accuracy = 0.0;
  std::size_t pairs = 0;
  std::size_t ties = 0;
};

// Per construction: (correct + 0.5 * ties) / pairs, comparing surprisal at the
// verb position only.
std::map<std::string, AgreementScore> agreement_accuracy(const ModelSnapshot& snapshot,
                                                         const std::vector<MinimalPair>& pairs);

// Copular agreement across a relative clause, e.g. "the manager that the
// friends met was famous ." against "... were famous .". Constructions:
// ObjectRC, ReducedObjectRC, SubjectRC. Head number alternates, so the set is
// balanced between singular and plural heads.
std::vector<MinimalPair> generate_agreement_pairs(const Lexicon& lexicon,
                                                  const CompatibilityMatrix& compat,
                                                  int pairs_per_construction, std::uint64_t seed);

inline constexpr std::string_view kPairsSchema = "#synprime-agreement-pairs\t1";

void write_pairs(std::ostream& out, const std::vector<MinimalPair>& pairs);
std::vector<MinimalPair> read_pairs(std::istream& in);
std::vector<MinimalPair> read_pairs_file(const std::filesystem::path& path);

}  // namespace synprime
