#include "synprime/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "synprime/error.hpp"

namespace synprime {

using nlohmann::json;

std::string_view to_string(PartOfSpeech pos) {
  switch (pos) {
    case PartOfSpeech::Noun: return "noun";
    case PartOfSpeech::Verb: return "verb";
    case PartOfSpeech::Adverb: return "adverb";
    case PartOfSpeech::Adjective: return "adjective";
    case PartOfSpeech::Intensifier: return "intensifier";
    case PartOfSpeech::Function: return "function";
  }
  return "unknown";
}

const std::string& LexiconEntry::form(Form f) const {
  const auto it = forms.find(f);
  if (it == forms.end()) {
    throw DataError("entry '" + lemma + "' (" + std::string(to_string(pos)) +
                    ") lacks a required form");
  }
  return it->second;
}

bool LexiconEntry::is_content() const {
  return pos == PartOfSpeech::Noun || pos == PartOfSpeech::Verb ||
         pos == PartOfSpeech::Adverb || pos == PartOfSpeech::Adjective;
}

namespace {

bool table_allows(const CompatibilityMatrix::Table& table, const std::string& key,
                  const std::string& value) {
  const auto it = table.find(key);
  return it != table.end() && it->second.contains(value);
}

}  // namespace

bool CompatibilityMatrix::allows_subject(const LexiconEntry& verb,
                                         const LexiconEntry& noun) const {
  return table_allows(verb_subject, verb.subclass, noun.subclass);
}
bool CompatibilityMatrix::allows_object(const LexiconEntry& verb,
                                        const LexiconEntry& noun) const {
  return table_allows(verb_object, verb.subclass, noun.subclass);
}
bool CompatibilityMatrix::allows_adjective(const LexiconEntry& noun,
                                           const LexiconEntry& adjective) const {
  return table_allows(noun_adjective, noun.subclass, adjective.subclass);
}
bool CompatibilityMatrix::allows_adverb(const LexiconEntry& verb,
                                        const LexiconEntry& adverb) const {
  return table_allows(verb_adverb, verb.subclass, adverb.subclass);
}

Lexicon::Lexicon(std::vector<LexiconEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) by_pos_[entries_[i].pos].push_back(i);
}

std::span<const std::size_t> Lexicon::indices(PartOfSpeech pos) const {
  const auto it = by_pos_.find(pos);
  if (it == by_pos_.end()) return {};
  return it->second;
}

std::set<std::string> Lexicon::subclasses(PartOfSpeech pos) const {
  std::set<std::string> out;
  for (const auto i : indices(pos)) out.insert(entries_[i].subclass);
  return out;
}

std::optional<std::size_t> Lexicon::find(std::string_view lemma, PartOfSpeech pos) const {
  for (const auto i : indices(pos)) {
    if (entries_[i].lemma == lemma) return i;
  }
  return std::nullopt;
}

Lexicon Lexicon::filter(const std::function<bool(const LexiconEntry&)>& keep) const {
  std::vector<LexiconEntry> kept;
  for (const auto& e : entries_) {
    if (keep(e)) kept.push_back(e);
  }
  return Lexicon(std::move(kept));
}

LexiconCounts count_entries(const Lexicon& lexicon) {
  return {lexicon.indices(PartOfSpeech::Noun).size(),
          lexicon.indices(PartOfSpeech::Verb).size(),
          lexicon.indices(PartOfSpeech::Adverb).size(),
          lexicon.indices(PartOfSpeech::Adjective).size(),
          lexicon.indices(PartOfSpeech::Intensifier).size()};
}

namespace {

void require_subclass(const std::set<std::string>& declared, const std::string& label,
                      std::string_view table, std::string_view kind) {
  if (!declared.contains(label)) {
    throw DataError("dangling subclass reference '" + label + "' in " + std::string(table) +
                    " (no " + std::string(kind) + " declares it)");
  }
}

void check_table(const CompatibilityMatrix::Table& table, std::string_view name,
                 const std::set<std::string>& keys, std::string_view key_kind,
                 const std::set<std::string>& values, std::string_view value_kind) {
  for (const auto& [key, allowed] : table) {
    require_subclass(keys, key, name, key_kind);
    for (const auto& v : allowed) require_subclass(values, v, name, value_kind);
  }
}

}  // namespace

void validate_lexicon(const Lexicon& lexicon, const CompatibilityMatrix& compat) {
  if (lexicon.empty()) throw DataError("lexicon has no entries");

  std::set<std::pair<std::string, PartOfSpeech>> seen;
  for (const auto& e : lexicon.entries()) {
    if (e.lemma.empty()) throw DataError("lexicon entry with empty lemma");
    if (!seen.emplace(e.lemma, e.pos).second) {
      throw DataError("duplicate " + std::string(to_string(e.pos)) + " lemma '" + e.lemma + "'");
    }
    if (e.is_content() && e.subclass.empty()) {
      throw DataError("content word '" + e.lemma + "' has no subclass");
    }
    switch (e.pos) {
      case PartOfSpeech::Noun:
        if (!e.has_form(Form::Singular) || !e.has_form(Form::Plural)) {
          throw DataError("noun '" + e.lemma + "' needs singular and plural forms");
        }
        break;
      case PartOfSpeech::Verb:
        if (!e.has_form(Form::ActivePast) || !e.has_form(Form::PassiveParticiple)) {
          throw DataError("verb '" + e.lemma + "' needs past and participle forms");
        }
        break;
      default:
        if (!e.has_form(Form::Surface)) {
          throw DataError("entry '" + e.lemma + "' has no surface form");
        }
    }
  }

  const auto nouns = lexicon.subclasses(PartOfSpeech::Noun);
  const auto verbs = lexicon.subclasses(PartOfSpeech::Verb);
  const auto adverbs = lexicon.subclasses(PartOfSpeech::Adverb);
  const auto adjectives = lexicon.subclasses(PartOfSpeech::Adjective);
  check_table(compat.verb_subject, "verb_subject", verbs, "verb", nouns, "noun");
  check_table(compat.verb_object, "verb_object", verbs, "verb", nouns, "noun");
  check_table(compat.noun_adjective, "noun_adjective", nouns, "noun", adjectives, "adjective");
  check_table(compat.verb_adverb, "verb_adverb", verbs, "verb", adverbs, "adverb");

  for (const auto i : lexicon.indices(PartOfSpeech::Verb)) {
    const auto& verb = lexicon[i];
    const auto subj = compat.verb_subject.find(verb.subclass);
    const auto obj = compat.verb_object.find(verb.subclass);
    if (subj == compat.verb_subject.end() || subj->second.empty()) {
      throw DataError("verb '" + verb.lemma + "' (subclass '" + verb.subclass +
                      "') has no compatible subject subclass");
    }
    if (obj == compat.verb_object.end() || obj->second.empty()) {
      throw DataError("verb '" + verb.lemma + "' (subclass '" + verb.subclass +
                      "') has no compatible object subclass");
    }
  }
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string get_string(const json& obj, const char* key, const std::string& fallback,
                       std::string_view where) {
  if (!obj.contains(key)) {
    if (!fallback.empty()) return fallback;
    throw DataError(std::string(where) + ": missing field '" + key + "'");
  }
  if (!obj.at(key).is_string()) {
    throw DataError(std::string(where) + ": field '" + key + "' must be a string");
  }
  return lower(obj.at(key).get<std::string>());
}

CompatibilityMatrix::Table parse_table(const json& compat, const char* key) {
  CompatibilityMatrix::Table table;
  if (!compat.contains(key)) return table;
  for (const auto& [from, to] : compat.at(key).items()) {
    auto& allowed = table[lower(from)];
    for (const auto& v : to) allowed.insert(lower(v.get<std::string>()));
  }
  return table;
}

}  // namespace

std::pair<Lexicon, CompatibilityMatrix> parse_lexicon(std::string_view json_text) {
  if (json_text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw DataError("lexicon has no entries");
  }
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("lexicon parse failure: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("lexicon must be a JSON object");
  if (doc.contains("schema") && doc.at("schema") != "synprime-lexicon/1") {
    throw DataError("unsupported lexicon schema " + doc.at("schema").dump());
  }

  std::vector<LexiconEntry> entries;
  try {
    for (const auto& n : doc.value("nouns", json::array())) {
      LexiconEntry e;
      e.pos = PartOfSpeech::Noun;
      e.lemma = get_string(n, "lemma", "", "noun");
      e.subclass = get_string(n, "subclass", "", "noun '" + e.lemma + "'");
      e.forms[Form::Singular] = get_string(n, "singular", e.lemma, "noun");
      e.forms[Form::Plural] = get_string(n, "plural", "", "noun '" + e.lemma + "'");
      entries.push_back(std::move(e));
    }
    for (const auto& v : doc.value("verbs", json::array())) {
      LexiconEntry e;
      e.pos = PartOfSpeech::Verb;
      e.lemma = get_string(v, "lemma", "", "verb");
      e.subclass = get_string(v, "subclass", "", "verb '" + e.lemma + "'");
      e.forms[Form::ActivePast] = get_string(v, "past", "", "verb '" + e.lemma + "'");
      e.forms[Form::PassiveParticiple] =
          get_string(v, "participle", e.forms[Form::ActivePast], "verb");
      entries.push_back(std::move(e));
    }
    const auto simple = [&](const char* key, PartOfSpeech pos) {
      for (const auto& a : doc.value(key, json::array())) {
        LexiconEntry e;
        e.pos = pos;
        e.lemma = get_string(a, "lemma", "", key);
        e.subclass = get_string(a, "subclass", "", std::string(key) + " '" + e.lemma + "'");
        e.forms[Form::Surface] = get_string(a, "surface", e.lemma, key);
        entries.push_back(std::move(e));
      }
    };
    simple("adverbs", PartOfSpeech::Adverb);
    simple("adjectives", PartOfSpeech::Adjective);
    for (const auto& w : doc.value("intensifiers", json::array())) {
      LexiconEntry e;
      e.pos = PartOfSpeech::Intensifier;
      e.lemma = lower(w.get<std::string>());
      e.subclass = "intensifier";
      e.forms[Form::Surface] = e.lemma;
      entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("lexicon schema violation: ") + e.what());
  }

  CompatibilityMatrix compat;
  if (doc.contains("compatibility")) {
    const auto& c = doc.at("compatibility");
    try {
      compat.verb_subject = parse_table(c, "verb_subject");
      compat.verb_object = parse_table(c, "verb_object");
      compat.noun_adjective = parse_table(c, "noun_adjective");
      compat.verb_adverb = parse_table(c, "verb_adverb");
    } catch (const json::exception& e) {
      throw DataError(std::string("compatibility schema violation: ") + e.what());
    }
  }

  Lexicon lexicon(std::move(entries));
  validate_lexicon(lexicon, compat);
  return {std::move(lexicon), std::move(compat)};
}

std::pair<Lexicon, CompatibilityMatrix> load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_lexicon(buffer.str());
}

const std::set<std::string>& function_words() {
  static const std::set<std::string> words = {"the", "that", "was", "were", "by", "and", "."};
  return words;
}

}  // namespace synprime
