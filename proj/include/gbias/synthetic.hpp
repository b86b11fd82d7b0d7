#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gbias/embedding_store.hpp"
#include "gbias/error.hpp"
#include "gbias/lexicon.hpp"
#include "gbias/vector_ops.hpp"

namespace gbias::synthetic {

/// Planted-bias bilingual fixture. Coordinate 0 is the grammatical axis and
/// coordinate 1 the semantic axis; every other coordinate carries concept
/// content shared between the two languages.
struct FixtureOptions {
  std::size_t dim = 50;
  std::size_t vocabulary = 500;
  double grammatical_offset = 0.4;
  double feminine_offset = 0.3;    // occupation feminine forms, +s
  double masculine_offset = 0.1;   // occupation masculine forms, -s
  double attribute_offset = 0.5;
  double noise = 0.02;
  std::size_t definitional = 10;
  std::size_t attributes = 8;
  std::size_t occupations = 29;
  std::size_t adjectives = 7;
  std::size_t inanimate = 40;
  std::size_t grammatical = 100;  // per gender
  std::uint64_t seed = 1;
};

struct Fixture {
  EmbeddingSpace source;
  EmbeddingSpace english;
  GenderLexicon lexicon;
  GenderLexicon english_lexicon;
  BilingualDictionary seed_dictionary;
  BilingualDictionary eval_dictionary;  // held out of the seed dictionary
  Vector grammatical_axis;
  Vector semantic_axis;
};

class Builder {
 public:
  explicit Builder(const FixtureOptions& o) : o_(o), rng_(o.seed) {}

  Vector concept_vector() {
    std::normal_distribution<double> n(0.0, 1.0);
    Vector c(o_.dim);
    for (double& v : c) v = n(rng_);
    c[0] *= 0.3;
    c[1] *= 0.3;
    return normalized(c);
  }

  /// unit(c + g * e0 + s * e1 + noise)
  Vector place(const Vector& c, double g, double s) {
    std::normal_distribution<double> n(0.0, o_.noise);
    Vector v = c;
    v[0] += g;
    v[1] += s;
    for (double& x : v) x += n(rng_);
    return normalized(v);
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  void add_source(const std::string& w, Vector v) { add(src_words_, src_data_, w, std::move(v)); }
  void add_english(const std::string& w, Vector v) { add(en_words_, en_data_, w, std::move(v)); }
  std::size_t source_size() const { return src_words_.size(); }

  std::pair<EmbeddingSpace, EmbeddingSpace> finish() {
    return {EmbeddingSpace(src_words_, src_data_, o_.dim, "src", true),
            EmbeddingSpace(en_words_, en_data_, o_.dim, "en", true)};
  }

 private:
  static void add(std::vector<std::string>& words, std::vector<double>& data, const std::string& w,
                  Vector v) {
    words.push_back(w);
    data.insert(data.end(), v.begin(), v.end());
  }

  FixtureOptions o_;
  std::mt19937_64 rng_;
  std::vector<std::string> src_words_, en_words_;
  std::vector<double> src_data_, en_data_;
};

inline Fixture make_fixture(const FixtureOptions& o = {}) {
  if (o.dim < 3) throw ValidationError("fixture needs at least 3 dimensions");
  const std::size_t planted = 2 * o.definitional + 2 * o.attributes + 2 * o.occupations +
                              2 * o.adjectives + o.inanimate + 2 * o.grammatical;
  if (planted > o.vocabulary) throw ValidationError("fixture vocabulary too small for the planted words");

  Builder b(o);
  Fixture f;
  const double ga = o.grammatical_offset;
  const auto n = [](const char* prefix, std::size_t i) { return prefix + std::to_string(i); };
  auto both = [&](const std::string& s, const std::string& e) {
    f.seed_dictionary.add(s, e);
  };

  for (std::size_t i = 0; i < o.definitional; ++i) {
    const double a = 0.2 + 0.4 * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(1, o.definitional - 1));
    const double e = 0.2 + 0.4 * static_cast<double>((i * 7) % o.definitional) /
                               static_cast<double>(std::max<std::size_t>(1, o.definitional - 1));
    const auto c = b.concept_vector();
    b.add_source(n("def_m", i), b.place(c, -ga, -a));
    b.add_source(n("def_f", i), b.place(c, ga, a));
    b.add_english(n("en_def_m", i), b.place(c, 0.0, -e));
    b.add_english(n("en_def_f", i), b.place(c, 0.0, e));
    f.lexicon.definitional_pairs.push_back({n("def_m", i), n("def_f", i)});
    f.english_lexicon.definitional_pairs.push_back({n("en_def_m", i), n("en_def_f", i)});
    both(n("def_m", i), n("en_def_m", i));
    both(n("def_f", i), n("en_def_f", i));
  }
  for (std::size_t i = 0; i < o.attributes; ++i) {
    b.add_source(n("attr_m", i), b.place(b.concept_vector(), 0.0, -o.attribute_offset));
    b.add_source(n("attr_f", i), b.place(b.concept_vector(), 0.0, o.attribute_offset));
    f.lexicon.attributes_male.push_back(n("attr_m", i));
    f.lexicon.attributes_female.push_back(n("attr_f", i));
  }
  for (std::size_t i = 0; i < o.occupations; ++i) {
    const auto c = b.concept_vector();
    const double beta = b.uniform(-0.05, 0.15);
    b.add_source(n("occ_m", i), b.place(c, -ga, -o.masculine_offset));
    b.add_source(n("occ_f", i), b.place(c, ga, o.feminine_offset));
    b.add_english(n("en_occ", i), b.place(c, 0.0, beta));
    f.lexicon.occupation_pairs.push_back({n("occ_m", i), n("occ_f", i), n("en_occ", i)});
    both(n("occ_m", i), n("en_occ", i));
    both(n("occ_f", i), n("en_occ", i));
  }
  for (std::size_t i = 0; i < o.adjectives; ++i) {
    const auto c = b.concept_vector();
    b.add_source(n("adj_m", i), b.place(c, -ga, 0.0));
    b.add_source(n("adj_f", i), b.place(c, ga, 0.0));
    b.add_english(n("en_adj", i), b.place(c, 0.0, 0.0));
    f.lexicon.adjective_pairs.push_back({n("en_adj", i), n("adj_m", i), n("adj_f", i)});
    both(n("adj_m", i), n("en_adj", i));
    both(n("adj_f", i), n("en_adj", i));
  }
  for (std::size_t i = 0; i < o.inanimate; ++i) {
    const auto c = b.concept_vector();
    const double side = i % 2 ? 1.0 : -1.0;
    b.add_source(n("inan", i), b.place(c, side * ga, b.uniform(-0.15, 0.15)));
    b.add_english(n("en_inan", i), b.place(c, 0.0, 0.0));
    f.lexicon.inanimate_nouns.push_back(n("inan", i));
    both(n("inan", i), n("en_inan", i));
  }
  for (std::size_t i = 0; i < o.grammatical; ++i) {
    auto c = b.concept_vector();
    b.add_source(n("gram_m", i), b.place(c, -ga, 0.0));
    b.add_english(n("en_gram_m", i), b.place(c, 0.0, 0.0));
    c = b.concept_vector();
    b.add_source(n("gram_f", i), b.place(c, ga, 0.0));
    b.add_english(n("en_gram_f", i), b.place(c, 0.0, 0.0));
    f.lexicon.grammatical_masculine.push_back(n("gram_m", i));
    f.lexicon.grammatical_feminine.push_back(n("gram_f", i));
    both(n("gram_m", i), n("en_gram_m", i));
    both(n("gram_f", i), n("en_gram_f", i));
  }
  // Generic filler alternates between the seed and the held-out dictionary.
  for (std::size_t i = 0; b.source_size() < o.vocabulary; ++i) {
    const auto c = b.concept_vector();
    b.add_source(n("word", i), b.place(c, 0.0, 0.0));
    b.add_english(n("en_word", i), b.place(c, 0.0, 0.0));
    (i % 2 ? f.eval_dictionary : f.seed_dictionary).add(n("word", i), n("en_word", i));
  }

  auto [src, en] = b.finish();
  f.source = std::move(src);
  f.english = std::move(en);
  f.grammatical_axis.assign(o.dim, 0.0);
  f.grammatical_axis[0] = 1.0;
  f.semantic_axis.assign(o.dim, 0.0);
  f.semantic_axis[1] = 1.0;
  return f;
}

}  // namespace gbias::synthetic
