#include "synprime/synthetic_corpus.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "synprime/error.hpp"

namespace synprime {

namespace {

enum class RcKind { Object, ReducedObject, Passive, ReducedPassive, Subject };
constexpr std::array kRcKinds = {RcKind::Object, RcKind::ReducedObject, RcKind::Passive,
                                 RcKind::ReducedPassive, RcKind::Subject};

// Thrown internally when a draw hits a lexical dead end; the sentence is redrawn.
struct DeadEnd {};

class Generator {
 public:
  Generator(const Lexicon& lexicon, const CompatibilityMatrix& compat,
            const SyntheticCorpusConfig& config)
      : lex_(lexicon), compat_(compat), config_(config), rng_(config.seed) {}

  Sentence sentence() {
    const auto& g = config_.grammar;
    const std::array<double, 7> weights = {g.transitive,   g.passive,          g.copula,
                                           g.modified_copula, g.coordination, g.subject_modified,
                                           g.object_modified};
    double total = 0.0;
    for (const double w : weights) {
      if (w < 0.0) throw DataError("synthetic grammar weights must be non-negative");
      total += w;
    }
    if (!(total > 0.0)) throw DataError("synthetic grammar has no enabled sentence type");

    for (int attempt = 0; attempt < 1000; ++attempt) {
      double u = rng_.uniform() * total;
      std::size_t kind = 0;
      while (kind + 1 < weights.size() && u >= weights[kind]) {
        u -= weights[kind];
        ++kind;
      }
      tokens_.clear();
      try {
        switch (kind) {
          case 0: transitive(); break;
          case 1: passive(); break;
          case 2: copula(std::nullopt); break;
          case 3: copula(kRcKinds[rng_.index(kRcKinds.size())]); break;
          case 4: coordination(); break;
          case 5: experimental(); break;
          default: object_modified(); break;
        }
        word(".");
        return std::move(tokens_);
      } catch (const DeadEnd&) {
      }
    }
    throw DataError("synthetic grammar cannot produce sentences from this lexicon");
  }

 private:
  template <typename Pred>
  const LexiconEntry& pick(PartOfSpeech pos, Pred&& ok) {
    std::vector<std::size_t> options;
    for (const auto i : lex_.indices(pos)) {
      if (ok(lex_[i])) options.push_back(i);
    }
    if (options.empty()) throw DeadEnd{};
    return lex_[options[rng_.index(options.size())]];
  }

  const LexiconEntry& any_verb() {
    return pick(PartOfSpeech::Verb, [](const auto&) { return true; });
  }

  void word(std::string_view w) { tokens_.emplace_back(w); }
  void words(const std::string& text) {
    std::istringstream in(text);
    std::string w;
    while (in >> w) tokens_.push_back(w);
  }

  bool plural() { return rng_.bernoulli(config_.noise.p_plural); }

  void noun_phrase(const LexiconEntry& noun, bool is_plural) {
    word("the");
    if (rng_.bernoulli(config_.noise.p_adjective)) {
      const auto& ints = lex_.indices(PartOfSpeech::Intensifier);
      try {
        const auto& adj = pick(PartOfSpeech::Adjective,
                               [&](const auto& a) { return compat_.allows_adjective(noun, a); });
        if (!ints.empty() && rng_.bernoulli(config_.noise.p_intensifier)) {
          words(lex_[ints[rng_.index(ints.size())]].lemma);
        }
        words(adj.lemma);
      } catch (const DeadEnd&) {
      }
    }
    words(noun.form(is_plural ? Form::Plural : Form::Singular));
  }

  std::optional<std::string> maybe_adverb(const LexiconEntry& verb) {
    if (!rng_.bernoulli(config_.noise.p_adverb_present)) return std::nullopt;
    try {
      return pick(PartOfSpeech::Adverb, [&](const auto& a) { return compat_.allows_adverb(verb, a); })
          .form(Form::Surface);
    } catch (const DeadEnd&) {
      return std::nullopt;
    }
  }

  // (adv) verb complement (adv)
  template <typename F>
  void verb_phrase(const LexiconEntry& verb, Form form, F&& complement) {
    const auto adverb = maybe_adverb(verb);
    const bool post = rng_.bernoulli(config_.noise.p_postverbal);
    if (adverb && !post) words(*adverb);
    words(verb.form(form));
    complement();
    if (adverb && post) words(*adverb);
  }

  void transitive() {
    const auto& v = any_verb();
    const auto& s = pick(PartOfSpeech::Noun, [&](const auto& n) { return compat_.allows_subject(v, n); });
    const auto& o = pick(PartOfSpeech::Noun, [&](const auto& n) {
      return n.lemma != s.lemma && compat_.allows_object(v, n);
    });
    noun_phrase(s, plural());
    verb_phrase(v, Form::ActivePast, [&] { noun_phrase(o, plural()); });
  }

  void passive() {
    const auto& v = any_verb();
    const auto& s = pick(PartOfSpeech::Noun, [&](const auto& n) { return compat_.allows_subject(v, n); });
    const auto& o = pick(PartOfSpeech::Noun, [&](const auto& n) {
      return n.lemma != s.lemma && compat_.allows_object(v, n);
    });
    const bool pl = plural();
    noun_phrase(o, pl);
    word(pl ? "were" : "was");
    verb_phrase(v, Form::PassiveParticiple, [&] {
      word("by");
      noun_phrase(s, plural());
    });
  }

  // Relative clause modifying `head`; the head is not emitted here.
  void relative_clause(const LexiconEntry& head, bool head_plural, RcKind kind) {
    if (kind == RcKind::Subject) {
      const auto& v = pick(PartOfSpeech::Verb, [&](const auto& x) { return compat_.allows_subject(x, head); });
      const auto& o = pick(PartOfSpeech::Noun, [&](const auto& n) {
        return n.lemma != head.lemma && compat_.allows_object(v, n);
      });
      word("that");
      verb_phrase(v, Form::ActivePast, [&] { noun_phrase(o, plural()); });
      return;
    }
    const auto& v = pick(PartOfSpeech::Verb, [&](const auto& x) { return compat_.allows_object(x, head); });
    const auto& agent = pick(PartOfSpeech::Noun, [&](const auto& n) {
      return n.lemma != head.lemma && compat_.allows_subject(v, n);
    });
    switch (kind) {
      case RcKind::Object:
      case RcKind::ReducedObject:
        if (kind == RcKind::Object) word("that");
        noun_phrase(agent, plural());
        verb_phrase(v, Form::ActivePast, [] {});
        break;
      case RcKind::Passive:
      case RcKind::ReducedPassive:
        if (kind == RcKind::Passive) {
          word("that");
          word(head_plural ? "were" : "was");
        }
        verb_phrase(v, Form::PassiveParticiple, [&] {
          word("by");
          noun_phrase(agent, plural());
        });
        break;
      case RcKind::Subject:
        break;
    }
  }

  void copula(std::optional<RcKind> rc) {
    const auto& n = pick(PartOfSpeech::Noun, [](const auto&) { return true; });
    const auto& adj = pick(PartOfSpeech::Adjective, [&](const auto& a) { return compat_.allows_adjective(n, a); });
    const bool pl = plural();
    noun_phrase(n, pl);
    if (rc) relative_clause(n, pl, *rc);
    word(pl ? "were" : "was");
    const auto& ints = lex_.indices(PartOfSpeech::Intensifier);
    if (!ints.empty() && rng_.bernoulli(config_.noise.p_intensifier)) {
      words(lex_[ints[rng_.index(ints.size())]].lemma);
    }
    words(adj.lemma);
  }

  void coordination() {
    const auto& s = pick(PartOfSpeech::Noun, [](const auto&) { return true; });
    const auto& v1 = pick(PartOfSpeech::Verb, [&](const auto& v) { return compat_.allows_subject(v, s); });
    const auto& v2 = pick(PartOfSpeech::Verb, [&](const auto& v) {
      return v.lemma != v1.lemma && compat_.allows_subject(v, s);
    });
    const auto& o1 = pick(PartOfSpeech::Noun, [&](const auto& n) {
      return n.lemma != s.lemma && compat_.allows_object(v1, n);
    });
    const auto& o2 = pick(PartOfSpeech::Noun, [&](const auto& n) {
      return n.lemma != s.lemma && n.lemma != o1.lemma && compat_.allows_object(v2, n);
    });
    noun_phrase(s, plural());
    verb_phrase(v1, Form::ActivePast, [&] { noun_phrase(o1, plural()); });
    word("and");
    verb_phrase(v2, Form::ActivePast, [&] { noun_phrase(o2, plural()); });
  }

  void experimental() {
    SlotFill fill;
    try {
      fill = sample_slot_fill(lex_, compat_, rng_);
    } catch (const DataError&) {
      throw DeadEnd{};
    }
    const NoiseFlags flags = sample_noise(fill, lex_, compat_, config_.noise, rng_);
    const auto s = kAllStructures[rng_.index(kAllStructures.size())];
    tokens_ = realize(fill, s, flags).tokens;
    tokens_.pop_back();  // the caller appends the period
  }

  void object_modified() {
    const auto& v = any_verb();
    const auto& s = pick(PartOfSpeech::Noun, [&](const auto& n) { return compat_.allows_subject(v, n); });
    const auto& o = pick(PartOfSpeech::Noun, [&](const auto& n) {
      return n.lemma != s.lemma && compat_.allows_object(v, n);
    });
    noun_phrase(s, plural());
    words(v.form(Form::ActivePast));
    const bool pl = plural();
    noun_phrase(o, pl);
    relative_clause(o, pl, kRcKinds[rng_.index(kRcKinds.size())]);
  }

  const Lexicon& lex_;
  const CompatibilityMatrix& compat_;
  const SyntheticCorpusConfig& config_;
  Rng rng_;
  Sentence tokens_;
};

}  // namespace

Corpus generate_synthetic_corpus(const Lexicon& lexicon, const CompatibilityMatrix& compat,
                                 const SyntheticCorpusConfig& config) {
  config.noise.validate();
  Corpus corpus;
  std::uint64_t tokens = 0;
  Generator gen(lexicon, compat, config);
  while (tokens < config.target_tokens) {
    corpus.push_back(gen.sentence());
    tokens += corpus.back().size();
  }
  return corpus;
}

Sentence tokenize_line(const std::string& line) {
  Sentence out;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (const char raw : line) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      flush();
    } else if (std::string_view(".,;:!?\"()").find(raw) != std::string_view::npos) {
      flush();
      out.emplace_back(1, raw);
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return out;
}

Corpus read_corpus(std::istream& in) {
  Corpus corpus;
  std::string line;
  while (std::getline(in, line)) {
    auto s = tokenize_line(line);
    if (!s.empty()) corpus.push_back(std::move(s));
  }
  return corpus;
}

Corpus read_corpus_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path.string());
  return read_corpus(in);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& s : corpus) out << join_tokens(s) << '\n';
}

std::vector<Corpus> corpus_slices(const Corpus& corpus, int n_slices,
                                  std::uint64_t tokens_per_slice) {
  if (n_slices < 1) throw DataError("at least one corpus slice is required");
  std::vector<Corpus> slices;
  std::size_t next = 0;
  for (int k = 0; k < n_slices; ++k) {
    Corpus slice;
    std::uint64_t tokens = 0;
    while (tokens < tokens_per_slice && next < corpus.size()) {
      tokens += corpus[next].size();
      slice.push_back(corpus[next++]);
    }
    if (tokens < tokens_per_slice) {
      throw DataError("corpus has too few tokens for " + std::to_string(n_slices) + " slices of " +
                      std::to_string(tokens_per_slice) + " tokens");
    }
    slices.push_back(std::move(slice));
  }
  return slices;
}

}  // namespace synprime
