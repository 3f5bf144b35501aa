#include "synprime/templates.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "synprime/error.hpp"

namespace synprime {

void NoiseConfig::validate() const {
  for (const double p : {p_plural, p_adjective, p_intensifier, p_adverb_present, p_postverbal}) {
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("noise probabilities must lie in [0, 1]");
  }
}

namespace {

void append_noun_flags(std::ostringstream& out, const char* slot, const NounNoise& n) {
  out << slot << ':' << (n.plural ? "pl" : "sg");
  if (n.adjective) out << ",adj=" << *n.adjective;
  if (n.intensifier) out << ",int=" << *n.intensifier;
}

void append_adverb_flags(std::ostringstream& out, const char* slot, const AdverbNoise& a) {
  out << slot << ':' << (!a.present ? "none" : (a.postverbal ? "post" : "pre"));
}

}  // namespace

std::string NoiseFlags::to_string() const {
  std::ostringstream out;
  append_noun_flags(out, "subject", subject);
  out << '|';
  append_noun_flags(out, "rc_object", rc_object);
  out << '|';
  append_noun_flags(out, "mc_object", mc_object);
  out << '|';
  append_adverb_flags(out, "rc_adverb", rc_adverb);
  out << '|';
  append_adverb_flags(out, "mc_adverb", mc_adverb);
  return out.str();
}

namespace {

constexpr int kMaxFillAttempts = 2000;

template <typename Pred>
std::vector<std::size_t> candidates(const Lexicon& lexicon, PartOfSpeech pos, Pred&& ok) {
  std::vector<std::size_t> out;
  for (const auto i : lexicon.indices(pos)) {
    if (ok(lexicon[i])) out.push_back(i);
  }
  return out;
}

}  // namespace

SlotFill sample_slot_fill(const Lexicon& lexicon, const CompatibilityMatrix& compat, Rng& rng) {
  std::string blocked = "rc_verb";
  for (int attempt = 0; attempt < kMaxFillAttempts; ++attempt) {
    const auto pick = [&](const std::vector<std::size_t>& options) -> const LexiconEntry& {
      return lexicon[options[rng.index(options.size())]];
    };

    const auto verbs = candidates(lexicon, PartOfSpeech::Verb, [](const auto&) { return true; });
    if (verbs.empty()) {
      blocked = "rc_verb";
      break;
    }
    const LexiconEntry& rc_verb = pick(verbs);

    const auto subjects = candidates(lexicon, PartOfSpeech::Noun, [&](const auto& n) {
      return compat.allows_subject(rc_verb, n);
    });
    if (subjects.empty()) {
      blocked = "subject";
      continue;
    }
    const LexiconEntry& subject = pick(subjects);

    const auto rc_objects = candidates(lexicon, PartOfSpeech::Noun, [&](const auto& n) {
      return n.lemma != subject.lemma && compat.allows_object(rc_verb, n);
    });
    if (rc_objects.empty()) {
      blocked = "rc_object";
      continue;
    }
    const LexiconEntry& rc_object = pick(rc_objects);

    const auto mc_verbs = candidates(lexicon, PartOfSpeech::Verb, [&](const auto& v) {
      return v.lemma != rc_verb.lemma && compat.allows_subject(v, rc_object);
    });
    if (mc_verbs.empty()) {
      blocked = "mc_verb";
      continue;
    }
    const LexiconEntry& mc_verb = pick(mc_verbs);

    const auto mc_objects = candidates(lexicon, PartOfSpeech::Noun, [&](const auto& n) {
      return n.lemma != subject.lemma && n.lemma != rc_object.lemma &&
             compat.allows_object(mc_verb, n);
    });
    if (mc_objects.empty()) {
      blocked = "mc_object";
      continue;
    }
    const LexiconEntry& mc_object = pick(mc_objects);

    const auto agent_verbs = candidates(lexicon, PartOfSpeech::Verb, [&](const auto& v) {
      return v.lemma != rc_verb.lemma && compat.allows_subject(v, subject) &&
             compat.allows_object(v, mc_object);
    });
    if (agent_verbs.empty()) {
      blocked = "agent_mc_verb";
      continue;
    }
    const LexiconEntry& agent_mc_verb = pick(agent_verbs);

    SlotFill fill{subject, rc_object, mc_object, rc_verb, mc_verb, agent_mc_verb,
                  std::nullopt, std::nullopt};

    const auto rc_adverbs = candidates(lexicon, PartOfSpeech::Adverb, [&](const auto& a) {
      return compat.allows_adverb(rc_verb, a);
    });
    if (!rc_adverbs.empty()) fill.rc_adverb = pick(rc_adverbs);

    const auto mc_adverbs = candidates(lexicon, PartOfSpeech::Adverb, [&](const auto& a) {
      return (!fill.rc_adverb || a.lemma != fill.rc_adverb->lemma) &&
             compat.allows_adverb(mc_verb, a) && compat.allows_adverb(agent_mc_verb, a);
    });
    if (!mc_adverbs.empty()) fill.mc_adverb = pick(mc_adverbs);
    return fill;
  }
  throw DataError("no valid slot fill: blocked at slot '" + blocked + "'");
}

NoiseFlags sample_noise(const SlotFill& fill, const Lexicon& lexicon,
                        const CompatibilityMatrix& compat, const NoiseConfig& noise, Rng& rng) {
  noise.validate();
  NoiseFlags flags;
  std::set<std::string> used_adjectives;
  const auto intensifiers = lexicon.indices(PartOfSpeech::Intensifier);

  const auto noun_noise = [&](const LexiconEntry& noun) {
    NounNoise n;
    n.plural = rng.bernoulli(noise.p_plural);
    if (rng.bernoulli(noise.p_adjective)) {
      const auto options = candidates(lexicon, PartOfSpeech::Adjective, [&](const auto& a) {
        return !used_adjectives.contains(a.lemma) && compat.allows_adjective(noun, a);
      });
      if (!options.empty()) {
        const auto& adj = lexicon[options[rng.index(options.size())]];
        used_adjectives.insert(adj.lemma);
        n.adjective = adj.lemma;
      }
    }
    if (n.adjective && rng.bernoulli(noise.p_intensifier) && !intensifiers.empty()) {
      n.intensifier = lexicon[intensifiers[rng.index(intensifiers.size())]].lemma;
    }
    return n;
  };
  flags.subject = noun_noise(fill.subject);
  flags.rc_object = noun_noise(fill.rc_object);
  flags.mc_object = noun_noise(fill.mc_object);

  const auto adverb_noise = [&](bool available) {
    AdverbNoise a;
    a.present = rng.bernoulli(noise.p_adverb_present) && available;
    a.postverbal = rng.bernoulli(noise.p_postverbal) && a.present;
    return a;
  };
  flags.rc_adverb = adverb_noise(fill.rc_adverb.has_value());
  flags.mc_adverb = adverb_noise(fill.mc_adverb.has_value());
  return flags;
}

namespace {

void append_words(std::vector<std::string>& tokens, const std::string& text) {
  std::istringstream in(text);
  std::string word;
  while (in >> word) tokens.push_back(word);
}

class SentenceBuilder {
 public:
  SentenceBuilder(const SlotFill& fill, const NoiseFlags& flags) : fill_(fill), flags_(flags) {}

  void word(std::string_view w) { tokens_.emplace_back(w); }

  void noun_phrase(const LexiconEntry& noun, const NounNoise& n) {
    word("the");
    if (n.intensifier) append_words(tokens_, *n.intensifier);
    if (n.adjective) append_words(tokens_, *n.adjective);
    append_words(tokens_, noun.form(n.plural ? Form::Plural : Form::Singular));
  }

  // A verb phrase: optional pre-verbal adverb, the verb, `complement` (object NP or
  // by-phrase), then an optional post-verbal adverb at the end of the phrase.
  template <typename Complement>
  void verb_phrase(const LexiconEntry& verb, Form form, const std::optional<LexiconEntry>& adverb,
                   const AdverbNoise& a, Complement&& complement) {
    const bool has_adverb = a.present && adverb.has_value();
    if (has_adverb && !a.postverbal) append_words(tokens_, adverb->form(Form::Surface));
    append_words(tokens_, verb.form(form));
    complement();
    if (has_adverb && a.postverbal) append_words(tokens_, adverb->form(Form::Surface));
  }

  void rc_verb_phrase(Form form, const std::function<void()>& complement) {
    verb_phrase(fill_.rc_verb, form, fill_.rc_adverb, flags_.rc_adverb, complement);
  }

  void mc_verb_phrase(const LexiconEntry& verb) {
    verb_phrase(verb, Form::ActivePast, fill_.mc_adverb, flags_.mc_adverb,
                [&] { noun_phrase(fill_.mc_object, flags_.mc_object); });
  }

  std::vector<std::string> take() { return std::move(tokens_); }

 private:
  const SlotFill& fill_;
  const NoiseFlags& flags_;
  std::vector<std::string> tokens_;
};

}  // namespace

GeneratedSentence realize(const SlotFill& fill, StructureId structure, const NoiseFlags& flags) {
  SentenceBuilder b(fill, flags);
  const auto agent = [&] { b.noun_phrase(fill.subject, flags.subject); };
  const auto patient = [&] { b.noun_phrase(fill.rc_object, flags.rc_object); };
  const auto by_agent = [&] {
    b.word("by");
    agent();
  };
  const auto nothing = [] {};

  switch (structure) {
    case StructureId::UnreducedObjectRC:
    case StructureId::ReducedObjectRC:
      patient();
      if (structure == StructureId::UnreducedObjectRC) b.word("that");
      agent();
      b.rc_verb_phrase(Form::ActivePast, nothing);
      b.mc_verb_phrase(fill.mc_verb);
      break;
    case StructureId::UnreducedPassiveRC:
    case StructureId::ReducedPassiveRC:
      patient();
      if (structure == StructureId::UnreducedPassiveRC) {
        b.word("that");
        b.word(flags.rc_object.plural ? "were" : "was");
      }
      b.rc_verb_phrase(Form::PassiveParticiple, by_agent);
      b.mc_verb_phrase(fill.mc_verb);
      break;
    case StructureId::ActiveSubjectRC:
      agent();
      b.word("that");
      b.rc_verb_phrase(Form::ActivePast, patient);
      b.mc_verb_phrase(fill.agent_mc_verb);
      break;
    case StructureId::CoordPSORC:
      patient();
      b.rc_verb_phrase(Form::ActivePast, agent);
      b.word("and");
      b.mc_verb_phrase(fill.mc_verb);
      break;
    case StructureId::CoordASRC:
      agent();
      b.rc_verb_phrase(Form::ActivePast, patient);
      b.word("and");
      b.mc_verb_phrase(fill.agent_mc_verb);
      break;
  }
  b.word(".");

  GeneratedSentence out;
  out.tokens = b.take();
  out.structure = structure;
  out.fill = fill;
  out.noise_flags = flags;
  return out;
}

std::set<std::string> content_lemmas(const GeneratedSentence& s) {
  const auto& f = s.fill;
  const auto& n = s.noise_flags;
  std::set<std::string> out = {f.subject.lemma, f.rc_object.lemma, f.mc_object.lemma,
                               f.rc_verb.lemma,
                               uses_agent_main_verb(s.structure) ? f.agent_mc_verb.lemma
                                                                 : f.mc_verb.lemma};
  if (n.rc_adverb.present && f.rc_adverb) out.insert(f.rc_adverb->lemma);
  if (n.mc_adverb.present && f.mc_adverb) out.insert(f.mc_adverb->lemma);
  for (const auto* noun : {&n.subject, &n.rc_object, &n.mc_object}) {
    if (noun->adjective) out.insert(*noun->adjective);
  }
  return out;
}

namespace {

// Splits content lemmas of each (part of speech, subclass) group between the
// adaptation pool (`true`) and the test pool.
std::map<std::pair<PartOfSpeech, std::string>, bool> partition_pools(const Lexicon& lexicon,
                                                                     double share, Rng& rng) {
  std::map<std::pair<PartOfSpeech, std::string>, bool> in_adaptation;
  for (const auto pos : {PartOfSpeech::Noun, PartOfSpeech::Verb, PartOfSpeech::Adverb,
                         PartOfSpeech::Adjective}) {
    for (const auto& subclass : lexicon.subclasses(pos)) {
      std::vector<std::string> lemmas;
      for (const auto i : lexicon.indices(pos)) {
        if (lexicon[i].subclass == subclass) lemmas.push_back(lexicon[i].lemma);
      }
      rng.shuffle(lemmas.begin(), lemmas.end());
      const auto n = lemmas.size();
      std::size_t k = 0;
      if (n == 1) {
        k = rng.bernoulli(share) ? 1 : 0;
      } else {
        k = static_cast<std::size_t>(std::lround(share * static_cast<double>(n)));
        k = std::clamp<std::size_t>(k, 1, n - 1);
      }
      for (std::size_t i = 0; i < n; ++i) in_adaptation[{pos, lemmas[i]}] = i < k;
    }
  }
  return in_adaptation;
}

}  // namespace

std::vector<ExperimentList> generate_lists(const Lexicon& lexicon,
                                           const CompatibilityMatrix& compat, int n_lists,
                                           const NoiseConfig& noise, ListSizes sizes,
                                           double adaptation_share) {
  noise.validate();
  if (n_lists < 0) throw DataError("n_lists must be non-negative");
  if (sizes.adaptation < 1 || sizes.test < 1) throw DataError("set sizes must be positive");

  std::vector<ExperimentList> lists;
  for (int l = 0; l < n_lists; ++l) {
    Rng rng(derive_seed(noise.rng_seed, {static_cast<std::uint64_t>(l)}));
    const auto pools = partition_pools(lexicon, adaptation_share, rng);
    const auto pool_lexicon = [&](bool adaptation) {
      return lexicon.filter([&](const LexiconEntry& e) {
        return !e.is_content() || pools.at({e.pos, e.lemma}) == adaptation;
      });
    };
    const Lexicon adapt_lex = pool_lexicon(true);
    const Lexicon test_lex = pool_lexicon(false);

    ExperimentList list;
    list.list_id = l;
    const auto fill_sets = [&](const Lexicon& pool, int count, auto& sets, std::string_view role) {
      for (int item = 0; item < count; ++item) {
        SlotFill fill;
        try {
          fill = sample_slot_fill(pool, compat, rng);
        } catch (const DataError& e) {
          throw DataError("lexicon too small to keep adaptation and test words disjoint (list " +
                          std::to_string(l) + ", " + std::string(role) + " pool): " + e.what());
        }
        const NoiseFlags flags = sample_noise(fill, pool, compat, noise, rng);
        for (const auto s : kAllStructures) {
          GeneratedSentence sentence = realize(fill, s, flags);
          sentence.list_id = l;
          sentence.sentence_id = item;
          sets[index_of(s)].push_back(std::move(sentence));
        }
      }
    };
    fill_sets(adapt_lex, sizes.adaptation, list.adaptation, "adaptation");
    fill_sets(test_lex, sizes.test, list.test, "test");
    lists.push_back(std::move(list));
  }
  return lists;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string display_text(const std::vector<std::string>& tokens) {
  std::string out = join_tokens(tokens);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

std::string_view to_string(ListRole role) {
  return role == ListRole::Adaptation ? "adaptation" : "test";
}

void write_lists(std::ostream& out, const std::vector<ExperimentList>& lists) {
  out << '#' << kListsSchema << '\n';
  out << "sentence_id\tlist_id\tstructure\trole\ttokens\tnoise_flags\n";
  for (const auto& list : lists) {
    for (const auto role : {ListRole::Adaptation, ListRole::Test}) {
      const auto& sets = role == ListRole::Adaptation ? list.adaptation : list.test;
      for (const auto s : kAllStructures) {
        for (const auto& sentence : sets[index_of(s)]) {
          out << sentence.sentence_id << '\t' << list.list_id << '\t' << name(s) << '\t'
              << to_string(role) << '\t' << join_tokens(sentence.tokens) << '\t'
              << sentence.noise_flags.to_string() << '\n';
        }
      }
    }
  }
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

int parse_int(const std::string& text, std::string_view what, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw DataError("lists file line " + std::to_string(line_no) + ": bad " + std::string(what) +
                    " '" + text + "'");
  }
}

}  // namespace

std::vector<ListRow> read_lists(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "#" + std::string(kListsSchema)) {
    throw DataError("lists file: missing or mismatched schema line (expected '#" +
                    std::string(kListsSchema) + "')");
  }
  if (!std::getline(in, line) || line.rfind("sentence_id\t", 0) != 0) {
    throw DataError("lists file: missing header line");
  }
  std::vector<ListRow> rows;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, '\t');
    if (f.size() != 6) {
      throw DataError("lists file line " + std::to_string(line_no) + ": expected 6 fields");
    }
    ListRow row;
    row.sentence_id = parse_int(f[0], "sentence_id", line_no);
    row.list_id = parse_int(f[1], "list_id", line_no);
    const auto s = parse_structure(f[2]);
    if (!s) throw DataError("lists file line " + std::to_string(line_no) + ": bad structure");
    row.structure = *s;
    if (f[3] == "adaptation") {
      row.role = ListRole::Adaptation;
    } else if (f[3] == "test") {
      row.role = ListRole::Test;
    } else {
      throw DataError("lists file line " + std::to_string(line_no) + ": bad role '" + f[3] + "'");
    }
    append_words(row.tokens, f[4]);
    if (row.tokens.empty()) {
      throw DataError("lists file line " + std::to_string(line_no) + ": empty sentence");
    }
    row.noise_flags = f[5];
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace synprime
