#include "support.hpp"

using gbias::GenderLexicon;
using nlohmann::json;
using testing::TempDir;

namespace {

json minimal() {
  return json{{"definitional_pairs", json::array({json::array({"hombre", "mujer"})})},
              {"grammatical_masculine", {"libro", "coche"}},
              {"grammatical_feminine", {"mesa", "casa"}},
              {"occupation_pairs", json::array({json::array({"enfermero", "enfermera", "nurse"})})}};
}

}  // namespace

TEST_CASE("lexicon: minimal lexicon loads") {
  TempDir tmp;
  const auto lex = gbias::load_lexicon(tmp.write("lex.json", minimal().dump()));
  CHECK(lex.definitional_pairs.size() == 1);
  CHECK(lex.grammatical_masculine.size() == 2);
  REQUIRE(lex.occupation_pairs.size() == 1);
  CHECK(lex.occupation_pairs[0].english == std::optional<std::string>("nurse"));
  CHECK(lex.attributes_male.empty());
}

TEST_CASE("lexicon: two-element occupation pairs have no English word") {
  auto j = minimal();
  j["occupation_pairs"] = json::array({json::array({"medico", "medica"})});
  const auto lex = gbias::lexicon_from_json(j);
  CHECK_FALSE(lex.occupation_pairs[0].english.has_value());
}

TEST_CASE("lexicon: invariant violations name the field and word") {
  auto j = minimal();
  j["grammatical_feminine"] = {"mesa", "libro"};
  CHECK_THROWS_WITH(gbias::lexicon_from_json(j), Catch::Matchers::ContainsSubstring("libro"));

  j = minimal();
  j["definitional_pairs"] = json::array({json::array({"rey", "rey"})});
  CHECK_THROWS_WITH(gbias::lexicon_from_json(j), Catch::Matchers::ContainsSubstring("definitional_pairs"));

  j = minimal();
  j["attributes_male"] = {"el"};
  j["attributes_female"] = {"el"};
  CHECK_THROWS_WITH(gbias::lexicon_from_json(j), Catch::Matchers::ContainsSubstring("el"));

  j = minimal();
  j["inanimate_nouns"] = {""};
  CHECK_THROWS_WITH(gbias::lexicon_from_json(j), Catch::Matchers::ContainsSubstring("inanimate_nouns"));

  j = minimal();
  j.erase("occupation_pairs");
  CHECK_THROWS_WITH(gbias::lexicon_from_json(j), Catch::Matchers::ContainsSubstring("occupation_pairs"));

  j = minimal();
  j["definitional_pairs"] = json::array({json::array({"a", "b", "c"})});
  CHECK_THROWS_AS(gbias::lexicon_from_json(j), gbias::ValidationError);

  j = minimal();
  j["grammatical_masculine"] = {1, 2};
  CHECK_THROWS_AS(gbias::lexicon_from_json(j), gbias::ValidationError);
}

TEST_CASE("lexicon: invalid JSON and missing files") {
  TempDir tmp;
  CHECK_THROWS_AS(gbias::load_lexicon(tmp.write("bad.json", "{not json")), gbias::ValidationError);
  CHECK_THROWS_AS(gbias::load_lexicon(tmp.file("none.json")), gbias::IoError);
}

TEST_CASE("lexicon: empty attributes load but WEAT refuses them") {
  const auto lex = gbias::lexicon_from_json(minimal());
  const gbias::EmbeddingSpace s({"enfermero", "enfermera"}, {1, 0, 0, 1}, 2, "es", true);
  CHECK_THROWS_AS(gbias::mweat_aggregate(gbias::occupation_query(lex), s), gbias::ValidationError);
}

TEST_CASE("lexicon: JSON round trip") {
  auto j = minimal();
  j["inanimate_nouns"] = {"mesa"};
  j["attributes_male"] = {"el"};
  j["attributes_female"] = {"ella"};
  j["adjective_pairs"] = {{"good", "bueno", "buena"}};
  j["equalize_pairs"] = json::array({json::array({"he", "she"})});
  const auto lex = gbias::lexicon_from_json(j);
  CHECK(gbias::lexicon_from_json(gbias::lexicon_to_json(lex)) == lex);
}

TEST_CASE("coverage_filter") {
  auto j = minimal();
  j["inanimate_nouns"] = {"mesa", "silla"};
  const auto lex = gbias::lexicon_from_json(j);

  std::vector<std::string> all{"hombre", "mujer", "libro", "coche", "mesa", "casa", "enfermero", "enfermera", "silla"};
  std::vector<double> data;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t k = 0; k < all.size(); ++k) data.push_back(i == k ? 1.0 : 0.0);
  }
  const gbias::EmbeddingSpace full(all, data, all.size(), "es", true);
  const auto same = gbias::coverage_filter(lex, full);
  CHECK(same.lexicon == lex);
  CHECK(same.dropped.empty());

  auto partial_words = all;
  partial_words.erase(std::find(partial_words.begin(), partial_words.end(), "enfermera"));
  std::vector<double> pdata;
  for (std::size_t i = 0; i < partial_words.size(); ++i) {
    for (std::size_t k = 0; k < partial_words.size(); ++k) pdata.push_back(i == k ? 1.0 : 0.0);
  }
  const gbias::EmbeddingSpace partial(partial_words, pdata, partial_words.size(), "es", true);
  const auto cov = gbias::coverage_filter(lex, partial);
  CHECK(cov.lexicon.occupation_pairs.empty());
  REQUIRE(cov.dropped.size() == 1);
  CHECK_THAT(cov.dropped[0], Catch::Matchers::ContainsSubstring("enfermera"));
  // idempotent
  const auto again = gbias::coverage_filter(cov.lexicon, partial);
  CHECK(again.lexicon == cov.lexicon);
  CHECK(again.dropped.empty());

  const gbias::EmbeddingSpace disjoint({"zzz"}, {1.0}, 1, "es", true);
  const auto none = gbias::coverage_filter(lex, disjoint);
  CHECK(none.lexicon.definitional_pairs.empty());
  CHECK(none.lexicon.grammatical_masculine.empty());
  CHECK(none.lexicon.grammatical_feminine.empty());
  CHECK(none.lexicon.occupation_pairs.empty());
  CHECK(none.lexicon.inanimate_nouns.empty());
  CHECK(none.dropped.size() == 8);
}

TEST_CASE("analogy queries: counts and gender agreement") {
  std::vector<gbias::OccupationPair> occ;
  for (int i = 0; i < 29; ++i) {
    occ.push_back({"om" + std::to_string(i), "of" + std::to_string(i), "oe" + std::to_string(i)});
  }
  std::vector<gbias::AdjectivePair> adj;
  for (int i = 0; i < 7; ++i) {
    adj.push_back({"ae" + std::to_string(i), "am" + std::to_string(i), "af" + std::to_string(i)});
  }
  const auto set = gbias::build_analogy_queries(occ, adj);
  CHECK(set.queries.size() == 406);
  CHECK_THAT(set.arithmetic, Catch::Matchers::ContainsSubstring("406"));
  for (const auto& q : set.queries) {
    const bool masc = q.gold_gender == gbias::Gender::masculine;
    CHECK(q.s_i[1] == (masc ? 'm' : 'f'));
    CHECK(q.gold[1] == (masc ? 'm' : 'f'));
  }

  const auto one = gbias::build_analogy_queries({occ[0]}, {adj[0]});
  REQUIRE(one.queries.size() == 2);
  CHECK(one.queries[0].s_i == "am0");
  CHECK(one.queries[0].gold == "om0");
  CHECK(one.queries[1].s_i == "af0");
  CHECK(one.queries[1].gold == "of0");
  CHECK(one.queries[0].e_i == "ae0");
  CHECK(one.queries[0].e_o == "oe0");

  CHECK_THROWS_AS(gbias::build_analogy_queries({}, adj), gbias::ValidationError);
  CHECK_THROWS_WITH(gbias::build_analogy_queries({{"medico", "medica", std::nullopt}}, adj),
                    Catch::Matchers::ContainsSubstring("medico"));
}

TEST_CASE("dictionary loading") {
  TempDir tmp;
  const auto d = gbias::load_dictionary(tmp.write("d.txt", "perro\tdog\nperro\thound\ngato cat\n\n"));
  CHECK(d.size() == 2);
  CHECK(d.pair_count() == 3);
  CHECK(d.entries()[0].first == "perro");
  CHECK(d.entries()[0].second == std::vector<std::string>{"dog", "hound"});
  CHECK(d.entries()[1].second == std::vector<std::string>{"cat"});
  CHECK_THROWS_AS(gbias::load_dictionary(tmp.write("bad.txt", "lonely\n")), gbias::ValidationError);
  CHECK_THROWS_AS(gbias::load_dictionary(tmp.file("missing.txt")), gbias::IoError);
}

TEST_CASE("identity dictionary matches identical strings in source order") {
  const gbias::EmbeddingSpace a({"x", "y", "z"}, {1, 0, 1}, 1, "es", false);
  const gbias::EmbeddingSpace b({"z", "x"}, {1, 1}, 1, "en", false);
  const auto d = gbias::identity_dictionary(a, b);
  REQUIRE(d.size() == 2);
  CHECK(d.entries()[0].first == "x");
  CHECK(d.entries()[1].first == "z");
}

TEST_CASE("similarity dataset loading") {
  TempDir tmp;
  const auto rows = gbias::load_similarity_dataset(tmp.write("s.tsv", "a\tb\t3.5\nc\td\t-1e-2\n"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].score == -0.01);
  CHECK_THROWS_AS(gbias::load_similarity_dataset(tmp.write("bad.tsv", "a\tb\tx\n")), gbias::ValidationError);
  CHECK_THROWS_AS(gbias::load_similarity_dataset(tmp.write("bad2.tsv", "a b 1\n")), gbias::ValidationError);
}
