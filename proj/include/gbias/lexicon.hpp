#pragma once

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gbias/embedding_store.hpp"
#include "gbias/error.hpp"

namespace gbias {

enum class Gender { masculine, feminine };

inline const char* to_string(Gender g) { return g == Gender::masculine ? "masculine" : "feminine"; }

/// (masculine form, feminine form)
struct WordPair {
  std::string masculine;
  std::string feminine;
  friend bool operator==(const WordPair&, const WordPair&) = default;
};

struct OccupationPair {
  std::string masculine;
  std::string feminine;
  std::optional<std::string> english;
  friend bool operator==(const OccupationPair&, const OccupationPair&) = default;
};

struct AdjectivePair {
  std::string english;
  std::string masculine;
  std::string feminine;
  friend bool operator==(const AdjectivePair&, const AdjectivePair&) = default;
};

/// All word lists consumed by the bias measures and mitigation pipelines for
/// one language. `equalize_pairs` and `gender_specific` only matter for an
/// English lexicon fed to hard-debiasing.
struct GenderLexicon {
  std::vector<WordPair> definitional_pairs;
  std::vector<std::string> grammatical_masculine;
  std::vector<std::string> grammatical_feminine;
  std::vector<OccupationPair> occupation_pairs;
  std::vector<std::string> inanimate_nouns;
  std::vector<std::string> attributes_male;
  std::vector<std::string> attributes_female;
  std::vector<AdjectivePair> adjective_pairs;
  std::vector<WordPair> equalize_pairs;
  std::vector<std::string> gender_specific;

  friend bool operator==(const GenderLexicon&, const GenderLexicon&) = default;

  /// Throws ValidationError naming the offending field and word.
  void validate() const {
    auto non_empty = [](const std::string& field, const std::string& w) {
      if (w.empty()) throw ValidationError("lexicon field '" + field + "' contains an empty word");
    };
    auto check_pair = [&](const std::string& field, const std::string& m, const std::string& f) {
      non_empty(field, m);
      non_empty(field, f);
      if (m == f) throw ValidationError("lexicon field '" + field + "': pair repeats word '" + m + "'");
    };
    for (const auto& p : definitional_pairs) check_pair("definitional_pairs", p.masculine, p.feminine);
    for (const auto& p : equalize_pairs) check_pair("equalize_pairs", p.masculine, p.feminine);
    for (const auto& p : occupation_pairs) {
      check_pair("occupation_pairs", p.masculine, p.feminine);
      if (p.english) non_empty("occupation_pairs", *p.english);
    }
    for (const auto& p : adjective_pairs) {
      non_empty("adjective_pairs", p.english);
      check_pair("adjective_pairs", p.masculine, p.feminine);
    }
    for (const auto& w : grammatical_masculine) non_empty("grammatical_masculine", w);
    for (const auto& w : grammatical_feminine) non_empty("grammatical_feminine", w);
    for (const auto& w : inanimate_nouns) non_empty("inanimate_nouns", w);
    for (const auto& w : attributes_male) non_empty("attributes_male", w);
    for (const auto& w : attributes_female) non_empty("attributes_female", w);
    for (const auto& w : gender_specific) non_empty("gender_specific", w);

    auto disjoint = [](const std::vector<std::string>& a, const std::vector<std::string>& b,
                       const std::string& fa, const std::string& fb) {
      const std::set<std::string> sa(a.begin(), a.end());
      for (const auto& w : b) {
        if (sa.count(w)) {
          throw ValidationError("word '" + w + "' appears in both '" + fa + "' and '" + fb + "'");
        }
      }
    };
    disjoint(grammatical_masculine, grammatical_feminine, "grammatical_masculine",
             "grammatical_feminine");
    disjoint(attributes_male, attributes_female, "attributes_male", "attributes_female");
  }

  std::vector<WordPair> occupation_word_pairs() const {
    std::vector<WordPair> out;
    out.reserve(occupation_pairs.size());
    for (const auto& p : occupation_pairs) out.push_back({p.masculine, p.feminine});
    return out;
  }
};

/// Source word -> translations. Entry order follows first appearance.
class BilingualDictionary {
 public:
  void add(const std::string& source, const std::string& target) {
    if (source.empty() || target.empty()) {
      throw ValidationError("dictionary entries need non-empty source and target");
    }
    auto [it, inserted] = index_.emplace(source, entries_.size());
    if (inserted) entries_.push_back({source, {}});
    auto& targets = entries_[it->second].second;
    if (std::find(targets.begin(), targets.end(), target) == targets.end()) targets.push_back(target);
  }

  const std::vector<std::pair<std::string, std::vector<std::string>>>& entries() const {
    return entries_;
  }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t pair_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.second.size();
    return n;
  }

 private:
  std::vector<std::pair<std::string, std::vector<std::string>>> entries_;
  std::map<std::string, std::size_t> index_;
};

/// One "E_i : E_o = S_i : ?" query with its gold gendered occupation form.
struct AnalogyQuery {
  std::string e_i;
  std::string e_o;
  std::string s_i;
  std::string gold;
  Gender gold_gender = Gender::masculine;
};

struct AnalogyQuerySet {
  std::vector<AnalogyQuery> queries;
  /// e.g. "2 genders x 7 adjectives x 29 occupation pairs = 406 queries"
  std::string arithmetic;
};

struct SimilarityItem {
  std::string word1;
  std::string word2;
  double score = 0.0;
};

struct CoverageResult {
  GenderLexicon lexicon;
  std::vector<std::string> dropped;
};

namespace detail {

inline std::vector<std::string> json_words(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array()) throw ValidationError("lexicon field '" + field + "' must be an array");
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const auto& w : j) {
    if (!w.is_string()) throw ValidationError("lexicon field '" + field + "' must hold strings");
    out.push_back(w.get<std::string>());
  }
  return out;
}

inline std::vector<std::vector<std::string>> json_tuples(const nlohmann::json& j,
                                                         const std::string& field,
                                                         std::size_t min_len, std::size_t max_len) {
  if (!j.is_array()) throw ValidationError("lexicon field '" + field + "' must be an array");
  std::vector<std::vector<std::string>> out;
  for (const auto& t : j) {
    auto words = json_words(t, field);
    if (words.size() < min_len || words.size() > max_len) {
      throw ValidationError("lexicon field '" + field + "' has an entry of length " +
                            std::to_string(words.size()));
    }
    out.push_back(std::move(words));
  }
  return out;
}

inline std::vector<WordPair> json_pairs(const nlohmann::json& j, const std::string& field) {
  std::vector<WordPair> out;
  for (auto& t : json_tuples(j, field, 2, 2)) out.push_back({t[0], t[1]});
  return out;
}

inline std::ifstream open_text(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + what + " " + path.string());
  return in;
}

}  // namespace detail

inline GenderLexicon lexicon_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("lexicon must be a JSON object");
  static const char* required[] = {"definitional_pairs", "grammatical_masculine",
                                   "grammatical_feminine", "occupation_pairs"};
  for (const char* key : required) {
    if (!j.contains(key)) throw ValidationError(std::string("lexicon is missing field '") + key + "'");
  }
  GenderLexicon lex;
  lex.definitional_pairs = detail::json_pairs(j.at("definitional_pairs"), "definitional_pairs");
  lex.grammatical_masculine = detail::json_words(j.at("grammatical_masculine"), "grammatical_masculine");
  lex.grammatical_feminine = detail::json_words(j.at("grammatical_feminine"), "grammatical_feminine");
  for (auto& t : detail::json_tuples(j.at("occupation_pairs"), "occupation_pairs", 2, 3)) {
    OccupationPair p{t[0], t[1], std::nullopt};
    if (t.size() == 3) p.english = t[2];
    lex.occupation_pairs.push_back(std::move(p));
  }
  auto optional_words = [&](const char* key) {
    return j.contains(key) ? detail::json_words(j.at(key), key) : std::vector<std::string>{};
  };
  lex.inanimate_nouns = optional_words("inanimate_nouns");
  lex.attributes_male = optional_words("attributes_male");
  lex.attributes_female = optional_words("attributes_female");
  lex.gender_specific = optional_words("gender_specific");
  if (j.contains("adjective_pairs")) {
    for (auto& t : detail::json_tuples(j.at("adjective_pairs"), "adjective_pairs", 3, 3)) {
      lex.adjective_pairs.push_back({t[0], t[1], t[2]});
    }
  }
  if (j.contains("equalize_pairs")) {
    lex.equalize_pairs = detail::json_pairs(j.at("equalize_pairs"), "equalize_pairs");
  }
  lex.validate();
  return lex;
}

inline nlohmann::json lexicon_to_json(const GenderLexicon& lex) {
  using nlohmann::json;
  auto pairs = [](const std::vector<WordPair>& ps) {
    json a = json::array();
    for (const auto& p : ps) a.push_back({p.masculine, p.feminine});
    return a;
  };
  json j;
  j["definitional_pairs"] = pairs(lex.definitional_pairs);
  j["grammatical_masculine"] = lex.grammatical_masculine;
  j["grammatical_feminine"] = lex.grammatical_feminine;
  json occ = json::array();
  for (const auto& p : lex.occupation_pairs) {
    if (p.english) {
      occ.push_back({p.masculine, p.feminine, *p.english});
    } else {
      occ.push_back({p.masculine, p.feminine});
    }
  }
  j["occupation_pairs"] = occ;
  j["inanimate_nouns"] = lex.inanimate_nouns;
  j["attributes_male"] = lex.attributes_male;
  j["attributes_female"] = lex.attributes_female;
  if (!lex.adjective_pairs.empty()) {
    json adj = json::array();
    for (const auto& p : lex.adjective_pairs) adj.push_back({p.english, p.masculine, p.feminine});
    j["adjective_pairs"] = adj;
  }
  if (!lex.equalize_pairs.empty()) j["equalize_pairs"] = pairs(lex.equalize_pairs);
  if (!lex.gender_specific.empty()) j["gender_specific"] = lex.gender_specific;
  return j;
}

inline GenderLexicon load_lexicon(const std::filesystem::path& path) {
  auto in = detail::open_text(path, "lexicon");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
  try {
    return lexicon_from_json(j);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

/// Drops every word missing from `space`, together with any pair containing
/// it. English words on occupation and adjective entries are not checked
/// here because they live in the other space.
inline CoverageResult coverage_filter(const GenderLexicon& lex, const EmbeddingSpace& space) {
  CoverageResult result;
  auto& out = result.lexicon;
  auto& dropped = result.dropped;
  auto has = [&](const std::string& w) { return space.contains(w); };

  auto filter_words = [&](const std::vector<std::string>& in, std::vector<std::string>& kept,
                          const char* field) {
    for (const auto& w : in) {
      if (has(w)) {
        kept.push_back(w);
      } else {
        dropped.push_back(std::string(field) + ": " + w);
      }
    }
  };
  auto missing_of = [&](const std::string& m, const std::string& f) {
    std::string missing;
    for (const auto* w : {&m, &f}) {
      if (!has(*w)) missing += (missing.empty() ? "" : ", ") + *w;
    }
    return missing;
  };
  auto filter_pairs = [&](const std::vector<WordPair>& in, std::vector<WordPair>& kept,
                          const char* field) {
    for (const auto& p : in) {
      const auto missing = missing_of(p.masculine, p.feminine);
      if (missing.empty()) {
        kept.push_back(p);
      } else {
        dropped.push_back(std::string(field) + ": [" + p.masculine + ", " + p.feminine +
                          "] (missing " + missing + ")");
      }
    }
  };

  filter_pairs(lex.definitional_pairs, out.definitional_pairs, "definitional_pairs");
  filter_pairs(lex.equalize_pairs, out.equalize_pairs, "equalize_pairs");
  filter_words(lex.grammatical_masculine, out.grammatical_masculine, "grammatical_masculine");
  filter_words(lex.grammatical_feminine, out.grammatical_feminine, "grammatical_feminine");
  for (const auto& p : lex.occupation_pairs) {
    const auto missing = missing_of(p.masculine, p.feminine);
    if (missing.empty()) {
      out.occupation_pairs.push_back(p);
    } else {
      dropped.push_back("occupation_pairs: [" + p.masculine + ", " + p.feminine + "] (missing " +
                        missing + ")");
    }
  }
  for (const auto& p : lex.adjective_pairs) {
    const auto missing = missing_of(p.masculine, p.feminine);
    if (missing.empty()) {
      out.adjective_pairs.push_back(p);
    } else {
      dropped.push_back("adjective_pairs: [" + p.english + ", " + p.masculine + ", " +
                        p.feminine + "] (missing " + missing + ")");
    }
  }
  filter_words(lex.inanimate_nouns, out.inanimate_nouns, "inanimate_nouns");
  filter_words(lex.attributes_male, out.attributes_male, "attributes_male");
  filter_words(lex.attributes_female, out.attributes_female, "attributes_female");
  filter_words(lex.gender_specific, out.gender_specific, "gender_specific");
  return result;
}

/// Pairs every adjective with every occupation, once per grammatical gender:
/// (adj_m : occ_m) and (adj_f : occ_f).
inline AnalogyQuerySet build_analogy_queries(const std::vector<OccupationPair>& occupations,
                                             const std::vector<AdjectivePair>& adjectives) {
  if (occupations.empty()) throw ValidationError("analogy queries need at least one occupation pair");
  if (adjectives.empty()) throw ValidationError("analogy queries need at least one adjective pair");
  AnalogyQuerySet set;
  for (const auto& occ : occupations) {
    if (!occ.english) {
      throw ValidationError("occupation pair [" + occ.masculine + ", " + occ.feminine +
                            "] has no English word");
    }
  }
  for (const auto& adj : adjectives) {
    for (const auto& occ : occupations) {
      set.queries.push_back({adj.english, *occ.english, adj.masculine, occ.masculine, Gender::masculine});
      set.queries.push_back({adj.english, *occ.english, adj.feminine, occ.feminine, Gender::feminine});
    }
  }
  std::ostringstream msg;
  msg << "2 genders x " << adjectives.size() << " adjectives x " << occupations.size()
      << " occupation pairs = " << set.queries.size() << " queries";
  set.arithmetic = msg.str();
  return set;
}

/// `source TAB target` per line; repeated sources accumulate. Lines without a
/// tab fall back to the first run of whitespace (MUSE dictionaries).
inline BilingualDictionary load_dictionary(const std::filesystem::path& path) {
  auto in = detail::open_text(path, "dictionary");
  BilingualDictionary dict;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = detail::rstrip(line);
    if (text.empty()) continue;
    auto sep = text.find('\t');
    std::size_t skip = 1;
    if (sep == std::string_view::npos) {
      sep = text.find(' ');
      if (sep != std::string_view::npos) {
        skip = text.find_first_not_of(' ', sep) - sep;
      }
    }
    if (sep == std::string_view::npos || sep == 0 || sep + skip >= text.size()) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 'source<TAB>target'");
    }
    dict.add(std::string(text.substr(0, sep)), std::string(text.substr(sep + skip)));
  }
  if (in.bad()) throw IoError(path.string() + ": read failure");
  return dict;
}

/// Identical-string matches between two vocabularies, in source order.
inline BilingualDictionary identity_dictionary(const EmbeddingSpace& source,
                                               const EmbeddingSpace& target) {
  BilingualDictionary dict;
  for (const auto& w : source.words()) {
    if (target.contains(w)) dict.add(w, w);
  }
  return dict;
}

/// `word1 TAB word2 TAB score` per line.
inline std::vector<SimilarityItem> load_similarity_dataset(const std::filesystem::path& path) {
  auto in = detail::open_text(path, "similarity dataset");
  std::vector<SimilarityItem> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = detail::rstrip(line);
    if (text.empty()) continue;
    const auto t1 = text.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : text.find('\t', t1 + 1);
    SimilarityItem item;
    if (t1 == std::string_view::npos || t2 == std::string_view::npos || t1 == 0 || t2 == t1 + 1 ||
        !detail::parse_number(text.substr(t2 + 1), item.score)) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 'word1<TAB>word2<TAB>score'");
    }
    item.word1 = std::string(text.substr(0, t1));
    item.word2 = std::string(text.substr(t1 + 1, t2 - t1 - 1));
    rows.push_back(std::move(item));
  }
  if (in.bad()) throw IoError(path.string() + ": read failure");
  return rows;
}

}  // namespace gbias
