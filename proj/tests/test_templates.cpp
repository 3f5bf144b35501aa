#include <doctest.h>

#include <cmath>
#include <sstream>

#include "synprime/error.hpp"
#include "synprime/lexicon.hpp"
#include "synprime/templates.hpp"

using namespace synprime;

namespace {

const char* kSmallLexicon = R"({
  "schema": "synprime-lexicon/1",
  "nouns": [
    {"lemma": "conspiracy", "subclass": "abstract", "plural": "conspiracies"},
    {"lemma": "employee", "subclass": "human", "plural": "employees"},
    {"lemma": "country", "subclass": "place", "plural": "countries"}
  ],
  "verbs": [
    {"lemma": "welcome", "subclass": "receive", "past": "welcomed"},
    {"lemma": "divide", "subclass": "split", "past": "divided"},
    {"lemma": "praise", "subclass": "speak", "past": "praised"}
  ],
  "adverbs": [{"lemma": "warmly", "subclass": "manner"}, {"lemma": "quickly", "subclass": "speed"}],
  "adjectives": [{"lemma": "beautiful", "subclass": "look"}],
  "intensifiers": ["very"],
  "compatibility": {
    "verb_subject": {"receive": ["human"], "split": ["abstract"], "speak": ["human"]},
    "verb_object": {"receive": ["abstract"], "split": ["place"], "speak": ["place"]},
    "noun_adjective": {"place": ["look"]},
    "verb_adverb": {"receive": ["manner"], "split": ["speed"], "speak": ["speed"]}
  }
})";

const LexiconEntry& entry(const Lexicon& lex, const std::string& lemma, PartOfSpeech pos) {
  return lex[*lex.find(lemma, pos)];
}

SlotFill table_fill(const Lexicon& lex) {
  SlotFill f;
  f.subject = entry(lex, "employee", PartOfSpeech::Noun);
  f.rc_object = entry(lex, "conspiracy", PartOfSpeech::Noun);
  f.mc_object = entry(lex, "country", PartOfSpeech::Noun);
  f.rc_verb = entry(lex, "welcome", PartOfSpeech::Verb);
  f.mc_verb = entry(lex, "divide", PartOfSpeech::Verb);
  f.agent_mc_verb = entry(lex, "praise", PartOfSpeech::Verb);
  return f;
}

}  // namespace

TEST_CASE("lexicon loads and exposes compatibility") {
  const auto [lex, compat] = parse_lexicon(kSmallLexicon);
  const auto counts = count_entries(lex);
  CHECK(counts.nouns == 3);
  CHECK(counts.verbs == 3);
  CHECK(counts.intensifiers == 1);
  const auto& welcome = entry(lex, "welcome", PartOfSpeech::Verb);
  CHECK(compat.allows_subject(welcome, entry(lex, "employee", PartOfSpeech::Noun)));
  CHECK_FALSE(compat.allows_subject(welcome, entry(lex, "country", PartOfSpeech::Noun)));
  CHECK(welcome.form(Form::PassiveParticiple) == "welcomed");
}

TEST_CASE("shipped lexicon has human nouns that congratulate accepts") {
  const auto [lex, compat] = load_lexicon(std::filesystem::path(SYNPRIME_DATA_DIR) / "lexicon.json");
  const auto& verb = entry(lex, "congratulate", PartOfSpeech::Verb);
  int humans = 0;
  for (auto i : lex.indices(PartOfSpeech::Noun)) {
    if (lex[i].subclass == "human") {
      ++humans;
      CHECK(compat.allows_subject(verb, lex[i]));
    }
  }
  CHECK(humans >= 5);
}

TEST_CASE("malformed lexicons are rejected") {
  CHECK_THROWS_WITH_AS(parse_lexicon("  \n"), doctest::Contains("no entries"), DataError);
  std::string ghost = kSmallLexicon;
  ghost.replace(ghost.find("\"receive\": [\"human\"]"), 20, "\"receive\": [\"ghost\"]");
  CHECK_THROWS_WITH_AS(parse_lexicon(ghost), doctest::Contains("ghost"), DataError);
  CHECK_THROWS_AS(parse_lexicon("{\"nouns\": [{\"lemma\": \"x\"}]}"), DataError);
}

TEST_CASE("realization follows each template") {
  const auto [lex, compat] = parse_lexicon(kSmallLexicon);
  SlotFill f = table_fill(lex);
  NoiseFlags flags;
  flags.mc_object.adjective = "beautiful";
  CHECK(display_text(realize(f, StructureId::UnreducedObjectRC, flags).tokens) ==
        "The conspiracy that the employee welcomed divided the beautiful country .");

  const NoiseFlags quiet;
  const auto text = [&](StructureId s) { return join_tokens(realize(f, s, quiet).tokens); };
  CHECK(text(StructureId::ReducedObjectRC) == "the conspiracy the employee welcomed divided the country .");
  CHECK(text(StructureId::UnreducedPassiveRC) ==
        "the conspiracy that was welcomed by the employee divided the country .");
  CHECK(text(StructureId::ReducedPassiveRC) == "the conspiracy welcomed by the employee divided the country .");
  CHECK(text(StructureId::ActiveSubjectRC) == "the employee that welcomed the conspiracy praised the country .");
  CHECK(text(StructureId::CoordPSORC) == "the conspiracy welcomed the employee and divided the country .");
  CHECK(text(StructureId::CoordASRC) == "the employee welcomed the conspiracy and praised the country .");

  NoiseFlags busy;
  busy.rc_object.plural = true;
  busy.mc_object.adjective = "beautiful";
  busy.mc_object.intensifier = "very";
  busy.rc_adverb = {true, false};
  busy.mc_adverb = {true, true};
  f.rc_adverb = entry(lex, "warmly", PartOfSpeech::Adverb);
  f.mc_adverb = entry(lex, "quickly", PartOfSpeech::Adverb);
  CHECK(join_tokens(realize(f, StructureId::UnreducedPassiveRC, busy).tokens) ==
        "the conspiracies that were warmly welcomed by the employee divided the very beautiful country quickly .");
}

TEST_CASE("realization is pure and variants share content lemmas") {
  const auto [lex, compat] = load_lexicon(std::filesystem::path(SYNPRIME_DATA_DIR) / "lexicon.json");
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto fill = sample_slot_fill(lex, compat, rng);
    const auto flags = sample_noise(fill, lex, compat, NoiseConfig{}, rng);
    const auto base = content_lemmas(realize(fill, StructureId::UnreducedObjectRC, flags));
    for (const auto s : kAllStructures) {
      const auto a = realize(fill, s, flags);
      CHECK(a.tokens == realize(fill, s, flags).tokens);
      if (!uses_agent_main_verb(s)) CHECK(content_lemmas(a) == base);
      const bool has_and = std::count(a.tokens.begin(), a.tokens.end(), "and") > 0;
      CHECK(has_and == is_coordination(s));
      const bool has_by = std::count(a.tokens.begin(), a.tokens.end(), "by") > 0;
      CHECK(has_by == is_passive(s));
    }
  }
}

TEST_CASE("slot fills respect compatibility and never repeat a lemma") {
  const auto [lex, compat] = load_lexicon(std::filesystem::path(SYNPRIME_DATA_DIR) / "lexicon.json");
  Rng rng(23);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto f = sample_slot_fill(lex, compat, rng);
    CHECK(compat.allows_subject(f.rc_verb, f.subject));
    CHECK(compat.allows_object(f.rc_verb, f.rc_object));
    CHECK(compat.allows_subject(f.mc_verb, f.rc_object));
    CHECK(compat.allows_object(f.mc_verb, f.mc_object));
    CHECK(compat.allows_subject(f.agent_mc_verb, f.subject));
    CHECK(compat.allows_object(f.agent_mc_verb, f.mc_object));
    std::set<std::string> nouns = {f.subject.lemma, f.rc_object.lemma, f.mc_object.lemma};
    CHECK(nouns.size() == 3);
    CHECK(f.rc_verb.lemma != f.mc_verb.lemma);
    CHECK(f.rc_verb.lemma != f.agent_mc_verb.lemma);
    if (f.rc_adverb && f.mc_adverb) CHECK(f.rc_adverb->lemma != f.mc_adverb->lemma);
  }
}

TEST_CASE("a lexicon with one completion gives that fill") {
  const char* unique = R"({
    "nouns": [{"lemma": "cat", "subclass": "a", "plural": "cats"},
              {"lemma": "dog", "subclass": "b", "plural": "dogs"},
              {"lemma": "hat", "subclass": "c", "plural": "hats"}],
    "verbs": [{"lemma": "chase", "subclass": "v1", "past": "chased"},
              {"lemma": "wear", "subclass": "v2", "past": "wore", "participle": "worn"},
              {"lemma": "steal", "subclass": "v3", "past": "stole", "participle": "stolen"}],
    "compatibility": {
      "verb_subject": {"v1": ["a"], "v2": ["b"], "v3": ["a"]},
      "verb_object": {"v1": ["b"], "v2": ["c"], "v3": ["c"]}
    }})";
  const auto [lex, compat] = parse_lexicon(unique);
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto f = sample_slot_fill(lex, compat, rng);
    CHECK(f.subject.lemma == "cat");
    CHECK(f.rc_object.lemma == "dog");
    CHECK(f.mc_object.lemma == "hat");
    CHECK(f.rc_verb.lemma == "chase");
    CHECK(f.mc_verb.lemma == "wear");
    CHECK(f.agent_mc_verb.lemma == "steal");
  }
}

TEST_CASE("subject choice is uniform within a two-noun subclass") {
  const char* two = R"({
    "nouns": [{"lemma": "ann", "subclass": "h", "plural": "anns"},
              {"lemma": "bob", "subclass": "h", "plural": "bobs"},
              {"lemma": "box", "subclass": "o", "plural": "boxes"},
              {"lemma": "cup", "subclass": "o", "plural": "cups"},
              {"lemma": "pen", "subclass": "o", "plural": "pens"},
              {"lemma": "mug", "subclass": "o", "plural": "mugs"}],
    "verbs": [{"lemma": "open", "subclass": "v", "past": "opened"},
              {"lemma": "hold", "subclass": "v", "past": "held"},
              {"lemma": "drop", "subclass": "w", "past": "dropped"},
              {"lemma": "hit", "subclass": "w", "past": "hit"}],
    "compatibility": {
      "verb_subject": {"v": ["h"], "w": ["o", "h"]},
      "verb_object": {"v": ["o"], "w": ["o"]}
    }})";
  const auto [lex, compat] = parse_lexicon(two);
  Rng rng(5);
  int ann = 0, subjects = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto f = sample_slot_fill(lex, compat, rng);
    if (f.rc_verb.subclass != "v") continue;
    ++subjects;
    ann += f.subject.lemma == "ann";
  }
  REQUIRE(subjects > 3000);
  // 99.9% binomial band around one half.
  CHECK(std::abs(static_cast<double>(ann) / subjects - 0.5) < 3.29 * std::sqrt(0.25 / subjects));
}

TEST_CASE("noise probabilities are validated") {
  NoiseConfig n;
  n.p_plural = 1.5;
  CHECK_THROWS_AS(n.validate(), DataError);
}

TEST_CASE("lists have the requested shape and disjoint pools") {
  const auto [lex, compat] = load_lexicon(std::filesystem::path(SYNPRIME_DATA_DIR) / "lexicon.json");
  NoiseConfig noise;
  noise.rng_seed = 99;
  const auto lists = generate_lists(lex, compat, 2, noise);
  REQUIRE(lists.size() == 2);
  for (const auto& list : lists) {
    std::set<std::string> adapt, test;
    for (const auto s : kAllStructures) {
      CHECK(list.adaptation[index_of(s)].size() == 20);
      CHECK(list.test[index_of(s)].size() == 50);
      for (const auto& g : list.adaptation[index_of(s)]) {
        const auto c = content_lemmas(g);
        adapt.insert(c.begin(), c.end());
      }
      for (const auto& g : list.test[index_of(s)]) {
        const auto c = content_lemmas(g);
        test.insert(c.begin(), c.end());
      }
    }
    for (const auto& w : adapt) CHECK_MESSAGE(!test.contains(w), w);
  }
  CHECK(generate_lists(lex, compat, 0, noise).empty());
}

TEST_CASE("lists survive a write/read round trip and are deterministic") {
  const auto [lex, compat] = load_lexicon(std::filesystem::path(SYNPRIME_DATA_DIR) / "lexicon.json");
  NoiseConfig noise;
  noise.rng_seed = 4;
  std::ostringstream a, b;
  write_lists(a, generate_lists(lex, compat, 1, noise, {3, 4}));
  write_lists(b, generate_lists(lex, compat, 1, noise, {3, 4}));
  CHECK(a.str() == b.str());
  std::istringstream in(a.str());
  const auto rows = read_lists(in);
  CHECK(rows.size() == 7 * (3 + 4));
  std::istringstream bad("#synprime-lists\t2\n");
  CHECK_THROWS_AS(read_lists(bad), DataError);
}

TEST_CASE("noise rates match the configuration") {
  const auto [lex, compat] = load_lexicon(std::filesystem::path(SYNPRIME_DATA_DIR) / "lexicon.json");
  Rng rng(31);
  const NoiseConfig noise;
  int plural = 0, adjective = 0, intensified = 0, adverb_slots = 0, adverbs = 0, postverbal = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto fill = sample_slot_fill(lex, compat, rng);
    const auto flags = sample_noise(fill, lex, compat, noise, rng);
    plural += flags.subject.plural;
    adjective += flags.subject.adjective.has_value();
    intensified += flags.subject.intensifier.has_value();
    for (const auto& a : {flags.rc_adverb, flags.mc_adverb}) {
      ++adverb_slots;
      adverbs += a.present;
      postverbal += a.postverbal;
    }
  }
  CHECK(std::abs(plural / double(n) - 0.40) < 0.02);
  CHECK(std::abs(adjective / double(n) - 0.50) < 0.02);
  CHECK(std::abs(intensified / double(adjective) - 0.40) < 0.02);
  CHECK(std::abs(postverbal / double(adverbs) - 0.50) < 0.02);
  CHECK(adverbs > 0);
}
