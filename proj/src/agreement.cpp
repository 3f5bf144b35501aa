#include "synprime/agreement.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "synprime/error.hpp"
#include "synprime/random.hpp"
#include "synprime/templates.hpp"

namespace synprime {

std::size_t verb_position(const MinimalPair& pair) {
  if (pair.grammatical.size() != pair.ungrammatical.size()) {
    throw DataError("minimal pair sentences differ in length");
  }
  std::size_t pos = pair.grammatical.size();
  for (std::size_t i = 0; i < pair.grammatical.size(); ++i) {
    if (pair.grammatical[i] == pair.ungrammatical[i]) continue;
    if (pos != pair.grammatical.size()) {
      throw DataError("minimal pair differs outside the verb slot: '" + join_tokens(pair.grammatical) +
                      "' / '" + join_tokens(pair.ungrammatical) + "'");
    }
    pos = i;
  }
  if (pos == pair.grammatical.size()) throw DataError("minimal pair sentences are identical");
  return pos;
}

std::map<std::string, AgreementScore> agreement_accuracy(const ModelSnapshot& snapshot,
                                                         const std::vector<MinimalPair>& pairs) {
  std::vector<Sentence> sentences;
  std::vector<std::size_t> positions;
  for (const auto& p : pairs) {
    positions.push_back(verb_position(p));
    sentences.push_back(p.grammatical);
    sentences.push_back(p.ungrammatical);
  }
  const auto scored = surprisal_batch(snapshot, sentences);
  std::map<std::string, std::pair<double, AgreementScore>> tally;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double good = scored[2 * i].bits[positions[i]];
    const double bad = scored[2 * i + 1].bits[positions[i]];
    auto& [credit, score] = tally[pairs[i].construction];
    ++score.pairs;
    if (good < bad) {
      credit += 1.0;
    } else if (good == bad) {
      credit += 0.5;
      ++score.ties;
    }
  }
  std::map<std::string, AgreementScore> out;
  for (auto& [name, entry] : tally) {
    entry.second.accuracy = entry.first / static_cast<double>(entry.second.pairs);
    out[name] = entry.second;
  }
  return out;
}

namespace {

template <typename Pred>
const LexiconEntry& pick(const Lexicon& lex, PartOfSpeech pos, Rng& rng, Pred&& ok) {
  std::vector<std::size_t> options;
  for (const auto i : lex.indices(pos)) {
    if (ok(lex[i])) options.push_back(i);
  }
  if (options.empty()) throw DataError("lexicon cannot supply agreement pairs");
  return lex[options[rng.index(options.size())]];
}

void noun_phrase(Sentence& s, const LexiconEntry& noun, bool plural) {
  s.push_back("the");
  s.push_back(noun.form(plural ? Form::Plural : Form::Singular));
}

}  // namespace

std::vector<MinimalPair> generate_agreement_pairs(const Lexicon& lexicon,
                                                  const CompatibilityMatrix& compat,
                                                  int pairs_per_construction, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<MinimalPair> out;
  for (const std::string construction : {"ObjectRC", "ReducedObjectRC", "SubjectRC"}) {
    for (int i = 0; i < pairs_per_construction; ++i) {
      const bool head_plural = i % 2 == 1;
      const bool other_plural = rng.bernoulli(0.5);
      const auto& head = pick(lexicon, PartOfSpeech::Noun, rng, [](const auto&) { return true; });
      const auto& adjective = pick(lexicon, PartOfSpeech::Adjective, rng,
                                   [&](const auto& a) { return compat.allows_adjective(head, a); });
      Sentence s;
      noun_phrase(s, head, head_plural);
      if (construction == "SubjectRC") {
        const auto& verb = pick(lexicon, PartOfSpeech::Verb, rng,
                                [&](const auto& v) { return compat.allows_subject(v, head); });
        const auto& object = pick(lexicon, PartOfSpeech::Noun, rng, [&](const auto& n) {
          return n.lemma != head.lemma && compat.allows_object(verb, n);
        });
        s.push_back("that");
        s.push_back(verb.form(Form::ActivePast));
        noun_phrase(s, object, other_plural);
      } else {
        const auto& verb = pick(lexicon, PartOfSpeech::Verb, rng,
                                [&](const auto& v) { return compat.allows_object(v, head); });
        const auto& agent = pick(lexicon, PartOfSpeech::Noun, rng, [&](const auto& n) {
          return n.lemma != head.lemma && compat.allows_subject(verb, n);
        });
        if (construction == "ObjectRC") s.push_back("that");
        noun_phrase(s, agent, other_plural);
        s.push_back(verb.form(Form::ActivePast));
      }
      MinimalPair pair;
      pair.construction = construction;
      pair.grammatical = s;
      pair.ungrammatical = s;
      pair.grammatical.push_back(head_plural ? "were" : "was");
      pair.ungrammatical.push_back(head_plural ? "was" : "were");
      for (auto* v : {&pair.grammatical, &pair.ungrammatical}) {
        v->push_back(adjective.lemma);
        v->push_back(".");
      }
      out.push_back(std::move(pair));
    }
  }
  return out;
}

void write_pairs(std::ostream& out, const std::vector<MinimalPair>& pairs) {
  out << kPairsSchema << '\n' << "construction\tgrammatical\tungrammatical\n";
  for (const auto& p : pairs) {
    out << p.construction << '\t' << join_tokens(p.grammatical) << '\t' << join_tokens(p.ungrammatical)
        << '\n';
  }
}

std::vector<MinimalPair> read_pairs(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kPairsSchema) {
    throw DataError("agreement pairs schema mismatch: expected '" + std::string(kPairsSchema) + "'");
  }
  std::getline(in, line);
  std::vector<MinimalPair> out;
  std::size_t line_no = 2;
  const auto split_words = [](const std::string& text) {
    Sentence s;
    std::istringstream words(text);
    std::string w;
    while (words >> w) s.push_back(w);
    return s;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw DataError("agreement pairs line " + std::to_string(line_no) + ": expected 3 fields");
    }
    MinimalPair p{line.substr(0, t1), split_words(line.substr(t1 + 1, t2 - t1 - 1)),
                  split_words(line.substr(t2 + 1))};
    verb_position(p);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<MinimalPair> read_pairs_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open agreement pairs " + path.string());
  return read_pairs(in);
}

}  // namespace synprime
