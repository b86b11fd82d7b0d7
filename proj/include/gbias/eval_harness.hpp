#pragma once

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "gbias/embedding_store.hpp"
#include "gbias/error.hpp"
#include "gbias/gender_geometry.hpp"
#include "gbias/lexicon.hpp"
#include "gbias/parallel.hpp"
#include "gbias/statistics.hpp"
#include "gbias/vector_ops.hpp"

namespace gbias {

enum class EvalTask { similarity, translation, pair_translation };

inline const char* to_string(EvalTask t) {
  switch (t) {
    case EvalTask::similarity: return "similarity";
    case EvalTask::translation: return "translation";
    case EvalTask::pair_translation: return "pair_translation";
  }
  return "unknown";
}

/// FNV-1a over the compact JSON dump of a configuration object.
inline std::string digest_config(const nlohmann::json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  static constexpr char hex[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = hex[h & 0xF];
    h >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

struct EvalReport {
  EvalTask task = EvalTask::similarity;
  std::map<std::string, double> metrics;
  std::size_t evaluated = 0;
  std::size_t total = 0;
  nlohmann::json config = nlohmann::json::object();
  std::string config_digest;

  double coverage() const {
    return total == 0 ? 0.0 : static_cast<double>(evaluated) / static_cast<double>(total);
  }
  double metric(const std::string& name) const {
    auto it = metrics.find(name);
    if (it == metrics.end()) throw ValidationError("report has no metric '" + name + "'");
    return it->second;
  }
};

inline nlohmann::json eval_report_to_json(const EvalReport& r) {
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = v;
  return {{"task", to_string(r.task)},
          {"metrics", metrics},
          {"coverage", {{"evaluated", r.evaluated}, {"total", r.total}, {"ratio", r.coverage()}}},
          {"config", r.config},
          {"config_digest", r.config_digest}};
}

namespace csv {

inline std::string number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace csv

/// Pearson correlation of cosine(w1, w2) against human scores over the rows
/// whose words are both in the vocabulary.
inline EvalReport word_similarity_eval(const EmbeddingSpace& space,
                                       const std::vector<SimilarityItem>& dataset) {
  std::vector<double> model;
  std::vector<double> human;
  for (const auto& item : dataset) {
    if (!space.contains(item.word1) || !space.contains(item.word2)) continue;
    model.push_back(cosine(space.vector(item.word1), space.vector(item.word2)));
    human.push_back(item.score);
  }
  if (model.size() < 5) {
    throw ValidationError("word similarity needs at least 5 covered rows, got " +
                          std::to_string(model.size()));
  }
  EvalReport r;
  r.task = EvalTask::similarity;
  r.evaluated = model.size();
  r.total = dataset.size();
  r.metrics["pearson_r"] = stats::pearson(model, human);
  r.config = {{"metric", "pearson"}};
  r.config_digest = digest_config(r.config);
  return r;
}

struct TranslationDetail {
  std::string query;
  std::vector<std::string> gold;
  std::vector<std::string> top;  // best five candidates
  bool hit_at_1 = false;
  bool hit_at_5 = false;
};

struct TranslationResult {
  EvalReport report;
  std::vector<TranslationDetail> details;
};

/// Mean cosine of each row of `from` to its `k` nearest rows of `to`.
inline std::vector<double> csls_neighbourhood(const EmbeddingSpace& from, const EmbeddingSpace& to,
                                              std::size_t k) {
  std::vector<double> r(from.size());
  const std::size_t take = std::min(k, to.size());
  parallel_for(from.size(), [&](std::size_t i) {
    auto scores = cosine_scores(from.row(i), to);
    std::partial_sort(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(take), scores.end(),
                      std::greater<>());
    double s = 0.0;
    for (std::size_t j = 0; j < take; ++j) s += scores[j];
    r[i] = s / static_cast<double>(take);
  });
  return r;
}

inline constexpr std::size_t kCslsNeighbourhood = 10;

/// P@k over dictionary queries from bi.source into bi.target. A query hits
/// at k when any gold translation is among its k nearest targets.
inline TranslationResult word_translation_eval(const BilingualSpace& bi,
                                               const BilingualDictionary& dict,
                                               std::vector<std::size_t> ks = {1, 5},
                                               bool csls = false) {
  if (ks.empty()) throw ValidationError("translation eval needs at least one k");
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.front() == 0) throw ValidationError("k must be positive");

  struct Query {
    std::size_t row;
    const std::vector<std::string>* gold;
  };
  std::vector<Query> queries;
  for (const auto& [src, golds] : dict.entries()) {
    if (auto i = bi.source.find(src)) queries.push_back({*i, &golds});
  }
  if (queries.empty()) throw ValidationError("no dictionary query resolves in the source vocabulary");

  std::vector<double> target_hub;
  if (csls) target_hub = csls_neighbourhood(bi.target, bi.source, kCslsNeighbourhood);

  const std::size_t depth = std::max<std::size_t>(ks.back(), 5);
  std::vector<std::vector<Neighbor>> ranked(queries.size());
  parallel_for(queries.size(), [&](std::size_t qi) {
    const auto x = bi.source.row(queries[qi].row);
    auto scores = cosine_scores(x, bi.target);
    if (csls) {
      std::vector<double> sorted = scores;
      const std::size_t take = std::min(kCslsNeighbourhood, sorted.size());
      std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(take), sorted.end(),
                        std::greater<>());
      double rx = 0.0;
      for (std::size_t j = 0; j < take; ++j) rx += sorted[j];
      rx /= static_cast<double>(take);
      for (std::size_t j = 0; j < scores.size(); ++j) scores[j] = 2.0 * scores[j] - rx - target_hub[j];
    }
    ranked[qi] = top_k_by_scores(scores, bi.target, depth, {});
  });

  TranslationResult out;
  std::vector<std::size_t> hits(ks.size(), 0);
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const auto& gold = *queries[qi].gold;
    std::size_t first_hit = 0;  // 1-based rank of the best gold, 0 if none
    for (const auto& n : ranked[qi]) {
      if (std::find(gold.begin(), gold.end(), n.word) != gold.end()) {
        first_hit = n.rank;
        break;
      }
    }
    for (std::size_t j = 0; j < ks.size(); ++j) {
      if (first_hit != 0 && first_hit <= ks[j]) ++hits[j];
    }
    TranslationDetail d;
    d.query = bi.source.word(queries[qi].row);
    d.gold = gold;
    for (std::size_t r = 0; r < std::min<std::size_t>(5, ranked[qi].size()); ++r) {
      d.top.push_back(ranked[qi][r].word);
    }
    d.hit_at_1 = first_hit == 1;
    d.hit_at_5 = first_hit != 0 && first_hit <= 5;
    out.details.push_back(std::move(d));
  }
  auto& r = out.report;
  r.task = EvalTask::translation;
  r.evaluated = queries.size();
  r.total = dict.size();
  for (std::size_t j = 0; j < ks.size(); ++j) {
    r.metrics["p_at_" + std::to_string(ks[j])] =
        100.0 * static_cast<double>(hits[j]) / static_cast<double>(queries.size());
  }
  r.config = {{"ks", ks}, {"csls", csls}};
  if (csls) r.config["csls_k"] = kCslsNeighbourhood;
  r.config_digest = digest_config(r.config);
  return out;
}

/// Swaps source and target.
inline BilingualSpace reversed(const BilingualSpace& bi) { return BilingualSpace(bi.target, bi.source); }

inline void write_translation_details(std::ostream& out, const std::vector<TranslationDetail>& rows) {
  out << "query,gold,top5,hit_at_1,hit_at_5\n";
  for (const auto& d : rows) {
    std::string gold, top;
    for (const auto& g : d.gold) gold += (gold.empty() ? "" : " ") + g;
    for (const auto& t : d.top) top += (top.empty() ? "" : " ") + t;
    out << csv::field(d.query) << ',' << csv::field(gold) << ',' << csv::field(top) << ','
        << (d.hit_at_1 ? 1 : 0) << ',' << (d.hit_at_5 ? 1 : 0) << '\n';
  }
}

/// 1-based rank of `gold` among the non-excluded candidates; candidates that
/// tie on score are ordered by ascending word.
inline std::size_t rank_of(std::size_t gold, const std::vector<double>& scores,
                           const EmbeddingSpace& space, const std::vector<char>& candidate) {
  const double g = scores[gold];
  const std::string& gw = space.word(gold);
  std::size_t rank = 1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i == gold || !candidate[i]) continue;
    if (scores[i] > g || (scores[i] == g && space.word(i) < gw)) ++rank;
  }
  return rank;
}

struct PairTranslationResult {
  EvalReport report;
  /// Per query in input order; 0 for skipped queries.
  std::vector<std::size_t> ranks;
};

struct PairTranslationOptions {
  bool restrict_to_occupations = false;
  bool compute_asd = true;
};

/// Analogy E_i : E_o = S_i : ? with English words from bi.target and
/// gendered-language words from bi.source. Every source word except E_i, E_o
/// and S_i is a candidate (only occupation forms when restricted).
inline PairTranslationResult pair_translation_eval(const BilingualSpace& bi,
                                                   const std::vector<AnalogyQuery>& queries,
                                                   const std::vector<OccupationPair>& occupations,
                                                   PairTranslationOptions options = {}) {
  const auto& src = bi.source;
  std::vector<char> pool(src.size(), options.restrict_to_occupations ? 0 : 1);
  if (options.restrict_to_occupations) {
    for (const auto& p : occupations) {
      for (const auto* w : {&p.masculine, &p.feminine}) {
        if (auto i = src.find(*w)) pool[*i] = 1;
      }
    }
  }

  PairTranslationResult out;
  out.ranks.assign(queries.size(), 0);
  parallel_for(queries.size(), [&](std::size_t qi) {
    const auto& q = queries[qi];
    auto gold = src.find(q.gold);
    auto s_i = src.find(q.s_i);
    if (!gold || !s_i || !bi.target.contains(q.e_i) || !bi.target.contains(q.e_o)) return;
    if (!pool[*gold]) return;
    Vector query = add_scaled(bi.target.vector(q.e_o), -1.0, bi.target.vector(q.e_i));
    query = add_scaled(query, 1.0, src.row(*s_i));
    if (norm(query) == 0.0) return;
    std::vector<char> candidate = pool;
    for (const auto* w : {&q.e_i, &q.e_o, &q.s_i}) {
      if (auto i = src.find(*w); i && *i != *gold) candidate[*i] = 0;
    }
    out.ranks[qi] = rank_of(*gold, cosine_scores(query, src), src, candidate);
  });

  double sum_m = 0.0, sum_f = 0.0;
  std::size_t n_m = 0, n_f = 0;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    if (out.ranks[qi] == 0) continue;
    const double rr = 1.0 / static_cast<double>(out.ranks[qi]);
    if (queries[qi].gold_gender == Gender::masculine) {
      sum_m += rr;
      ++n_m;
    } else {
      sum_f += rr;
      ++n_f;
    }
  }
  auto& r = out.report;
  r.task = EvalTask::pair_translation;
  r.evaluated = n_m + n_f;
  r.total = queries.size();
  if (r.evaluated == 0) throw ValidationError("no analogy query resolves in the vocabularies");
  if (n_m > 0) r.metrics["m_mrr"] = sum_m / static_cast<double>(n_m);
  if (n_f > 0) r.metrics["f_mrr"] = sum_f / static_cast<double>(n_f);
  if (n_m > 0 && n_f > 0) r.metrics["mrr_diff"] = std::abs(r.metrics["m_mrr"] - r.metrics["f_mrr"]);

  if (options.compute_asd) {
    double gap = 0.0;
    std::size_t n = 0;
    bool annotated = false;
    for (const auto& p : occupations) {
      if (!p.english) continue;
      annotated = true;
      if (!src.contains(p.masculine) || !src.contains(p.feminine) || !bi.target.contains(*p.english)) {
        continue;
      }
      const auto e = bi.target.vector(*p.english);
      gap += std::abs(cosine(src.vector(p.masculine), e) - cosine(src.vector(p.feminine), e));
      ++n;
    }
    if (!annotated) throw ValidationError("ASD needs occupation pairs annotated with English words");
    if (n > 0) r.metrics["asd"] = gap / static_cast<double>(n);
  }
  r.config = {{"restrict_to_occupations", options.restrict_to_occupations},
              {"candidate_exclusion", "e_i,e_o,s_i"}};
  r.config_digest = digest_config(r.config);
  return out;
}

struct ProjectionRow {
  std::string word;
  std::string group;
  double grammatical_proj = 0.0;
  double semantic_proj = 0.0;
};

struct ProjectionTable {
  std::vector<ProjectionRow> rows;
  std::vector<std::string> missing;
};

/// Lexicon words labelled by role, in lexicon order.
inline std::vector<std::pair<std::string, std::string>> projection_words(const GenderLexicon& lex) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& p : lex.occupation_pairs) {
    out.emplace_back(p.masculine, "occupation_masculine");
    out.emplace_back(p.feminine, "occupation_feminine");
  }
  for (const auto& w : lex.inanimate_nouns) out.emplace_back(w, "inanimate");
  for (const auto& p : lex.definitional_pairs) {
    out.emplace_back(p.masculine, "definitional_masculine");
    out.emplace_back(p.feminine, "definitional_feminine");
  }
  for (const auto& w : lex.grammatical_masculine) out.emplace_back(w, "grammatical_masculine");
  for (const auto& w : lex.grammatical_feminine) out.emplace_back(w, "grammatical_feminine");
  return out;
}

inline ProjectionTable export_projections(const EmbeddingSpace& space,
                                          const std::vector<std::pair<std::string, std::string>>& words,
                                          const GenderDirections& directions) {
  ProjectionTable t;
  for (const auto& [w, group] : words) {
    auto i = space.find(w);
    if (!i) {
      t.missing.push_back(w);
      continue;
    }
    const auto v = space.row(*i);
    t.rows.push_back({w, group, dot(v, directions.d_g), dot(v, directions.d_s)});
  }
  return t;
}

inline void write_projections_csv(std::ostream& out, const ProjectionTable& t) {
  out << "word,group,grammatical_proj,semantic_proj\n";
  for (const auto& r : t.rows) {
    out << csv::field(r.word) << ',' << csv::field(r.group) << ',' << csv::number(r.grammatical_proj)
        << ',' << csv::number(r.semantic_proj) << '\n';
  }
}

}  // namespace gbias
