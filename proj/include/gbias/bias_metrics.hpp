#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gbias/embedding_store.hpp"
#include "gbias/error.hpp"
#include "gbias/lexicon.hpp"
#include "gbias/parallel.hpp"
#include "gbias/statistics.hpp"
#include "gbias/vector_ops.hpp"

namespace gbias {

/// Target sets X, Y and attribute sets A (male), B (female). When `paired`,
/// X[i] and Y[i] are the masculine and feminine forms of one noun.
struct BiasQuery {
  std::vector<std::string> X;
  std::vector<std::string> Y;
  std::vector<std::string> A;
  std::vector<std::string> B;
  bool paired = true;

  void validate() const {
    if (A.empty() || B.empty()) throw ValidationError("WEAT needs non-empty attribute sets A and B");
    const std::set<std::string> a(A.begin(), A.end());
    for (const auto& w : B) {
      if (a.count(w)) throw ValidationError("attribute word '" + w + "' is in both A and B");
    }
    if (paired && X.size() != Y.size()) {
      throw ValidationError("paired query needs |X| == |Y|");
    }
  }
};

/// Occupation forms against the lexicon's attribute sets.
inline BiasQuery occupation_query(const GenderLexicon& lex) {
  BiasQuery q;
  for (const auto& p : lex.occupation_pairs) {
    q.X.push_back(p.masculine);
    q.Y.push_back(p.feminine);
  }
  q.A = lex.attributes_male;
  q.B = lex.attributes_female;
  q.paired = true;
  return q;
}

/// Caches the attribute vectors so s(w, A, B) costs |A| + |B| cosines.
class AssociationScorer {
 public:
  AssociationScorer(const EmbeddingSpace& space, const std::vector<std::string>& A,
                    const std::vector<std::string>& B)
      : space_(space) {
    if (A.empty() || B.empty()) throw ValidationError("WEAT needs non-empty attribute sets A and B");
    for (const auto& a : A) a_.push_back(space.vector(a));
    for (const auto& b : B) b_.push_back(space.vector(b));
  }

  double operator()(const std::string& w) const { return (*this)(space_.vector(w)); }

  double operator()(ConstVectorView v) const {
    double sa = 0.0;
    for (const auto& a : a_) sa += cosine(v, a);
    double sb = 0.0;
    for (const auto& b : b_) sb += cosine(v, b);
    return sa / static_cast<double>(a_.size()) - sb / static_cast<double>(b_.size());
  }

 private:
  const EmbeddingSpace& space_;
  std::vector<ConstVectorView> a_;
  std::vector<ConstVectorView> b_;
};

/// s(w, A, B): mean cosine to A minus mean cosine to B.
inline double weat_assoc(const std::string& w, const std::vector<std::string>& A,
                         const std::vector<std::string>& B, const EmbeddingSpace& space) {
  return AssociationScorer(space, A, B)(w);
}

/// s(X, Y, A, B) = sum_x s(x, A, B) - sum_y s(y, A, B)
inline double weat_statistic(const std::vector<std::string>& X, const std::vector<std::string>& Y,
                             const std::vector<std::string>& A, const std::vector<std::string>& B,
                             const EmbeddingSpace& space) {
  const AssociationScorer s(space, A, B);
  double sx = 0.0;
  for (const auto& x : X) sx += s(x);
  double sy = 0.0;
  for (const auto& y : Y) sy += s(y);
  return sx - sy;
}

inline double mweat_inanimate(const std::string& w, const std::vector<std::string>& A,
                              const std::vector<std::string>& B, const EmbeddingSpace& space) {
  return std::abs(weat_assoc(w, A, B, space));
}

/// Unsigned: ||s(w_m)| - |s(w_f)||. Signed: |s(w_m)| - |s(w_f)|, positive when
/// the masculine form is more strongly gender-associated.
inline double mweat_pair(const std::string& w_m, const std::string& w_f,
                         const std::vector<std::string>& A, const std::vector<std::string>& B,
                         const EmbeddingSpace& space, bool is_signed = false) {
  const AssociationScorer s(space, A, B);
  const double diff = std::abs(s(w_m)) - std::abs(s(w_f));
  return is_signed ? diff : std::abs(diff);
}

namespace detail {

inline double aggregate_from_sums(double sum_x, double sum_y) {
  return std::abs(std::abs(sum_x) - std::abs(sum_y));
}

struct TargetScores {
  std::vector<double> x;
  std::vector<double> y;
};

inline TargetScores target_scores(const BiasQuery& q, const EmbeddingSpace& space) {
  q.validate();
  const AssociationScorer s(space, q.A, q.B);
  TargetScores out;
  for (const auto& w : q.X) out.x.push_back(s(w));
  for (const auto& w : q.Y) out.y.push_back(s(w));
  return out;
}

inline double sum(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc;
}

}  // namespace detail

/// | |sum_x s(x,A,B)| - |sum_y s(y,A,B)| |
inline double mweat_aggregate(const BiasQuery& q, const EmbeddingSpace& space) {
  const auto t = detail::target_scores(q, space);
  return detail::aggregate_from_sums(detail::sum(t.x), detail::sum(t.y));
}

enum class PermutationProtocol {
  paired_sign_flip,  // swap the two forms of each pair with probability 1/2
  partition,         // classic WEAT: random equal-size re-split of X u Y
};

struct PermutationResult {
  double observed = 0.0;
  double p_value = 1.0;
  std::size_t n_permutations = 0;
  std::size_t exceedances = 0;
  bool exhaustive = false;
  std::uint64_t seed = 0;
};

/// Independent engine for iteration `index` of a run seeded with `seed`.
inline std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

/// Largest pair count whose 2^n sign patterns are enumerated exhaustively.
inline constexpr std::size_t kExhaustivePairLimit = 16;

/// Null statistics within this distance of the observed value count as ties,
/// and ties count as exceedances.
inline double tie_tolerance(const std::vector<double>& x, const std::vector<double>& y) {
  double scale = 1.0;
  for (double v : x) scale += std::abs(v);
  for (double v : y) scale += std::abs(v);
  return 1e-12 * scale;
}

/// Sign-flip statistic for one swap pattern (bit i set = pair i swapped).
inline double sign_flip_statistic(const std::vector<double>& sx, const std::vector<double>& sy,
                                  const std::vector<bool>& swapped) {
  double a = 0.0;
  double b = 0.0;
  for (std::size_t i = 0; i < sx.size(); ++i) {
    if (swapped[i]) {
      a += sy[i];
      b += sx[i];
    } else {
      a += sx[i];
      b += sy[i];
    }
  }
  return detail::aggregate_from_sums(a, b);
}

/// One-sided permutation p-value of mweat_aggregate,
/// p = (#{null >= observed} + 1) / (n_permutations + 1).
/// With the paired protocol and at most 16 pairs every non-identity swap
/// pattern is enumerated instead, which makes p exact.
inline PermutationResult permutation_test(const BiasQuery& q, const EmbeddingSpace& space,
                                          std::size_t n_perm = 10000, std::uint64_t seed = 0,
                                          PermutationProtocol protocol = PermutationProtocol::paired_sign_flip) {
  if (n_perm < 100) throw ValidationError("permutation test needs n_perm >= 100");
  if (protocol == PermutationProtocol::paired_sign_flip && !q.paired) {
    throw ValidationError("paired sign-flip protocol requested for an unpaired query");
  }
  const auto t = detail::target_scores(q, space);
  PermutationResult res;
  res.seed = seed;
  const std::vector<bool> identity(t.x.size(), false);
  res.observed = protocol == PermutationProtocol::paired_sign_flip
                     ? sign_flip_statistic(t.x, t.y, identity)
                     : detail::aggregate_from_sums(detail::sum(t.x), detail::sum(t.y));
  const double threshold = res.observed - tie_tolerance(t.x, t.y);
  const std::size_t n = t.x.size();

  std::vector<char> exceeds;
  if (protocol == PermutationProtocol::paired_sign_flip && n <= kExhaustivePairLimit) {
    const std::size_t patterns = std::size_t{1} << n;
    res.exhaustive = true;
    res.n_permutations = patterns - 1;
    exceeds.assign(res.n_permutations, 0);
    parallel_for(res.n_permutations, [&](std::size_t k) {
      const std::size_t pattern = k + 1;
      std::vector<bool> swapped(n);
      for (std::size_t i = 0; i < n; ++i) swapped[i] = (pattern >> i) & 1u;
      exceeds[k] = sign_flip_statistic(t.x, t.y, swapped) >= threshold;
    });
  } else if (protocol == PermutationProtocol::paired_sign_flip) {
    res.n_permutations = n_perm;
    exceeds.assign(n_perm, 0);
    parallel_for(n_perm, [&](std::size_t k) {
      auto eng = stream_engine(seed, k);
      std::vector<bool> swapped(n);
      std::uint64_t bits = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i % 64 == 0) bits = eng();
        swapped[i] = (bits >> (i % 64)) & 1u;
      }
      exceeds[k] = sign_flip_statistic(t.x, t.y, swapped) >= threshold;
    });
  } else {
    std::vector<double> pool = t.x;
    pool.insert(pool.end(), t.y.begin(), t.y.end());
    res.n_permutations = n_perm;
    exceeds.assign(n_perm, 0);
    parallel_for(n_perm, [&](std::size_t k) {
      auto eng = stream_engine(seed, k);
      std::vector<std::size_t> order(pool.size());
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), eng);
      double a = 0.0;
      double b = 0.0;
      for (std::size_t i = 0; i < order.size(); ++i) (i < n ? a : b) += pool[order[i]];
      exceeds[k] = detail::aggregate_from_sums(a, b) >= threshold;
    });
  }
  for (char e : exceeds) res.exceedances += static_cast<std::size_t>(e);
  res.p_value = static_cast<double>(res.exceedances + 1) / static_cast<double>(res.n_permutations + 1);
  return res;
}

struct PairScore {
  std::string masculine;
  std::string feminine;
  double s_m = 0.0;
  double s_f = 0.0;
  double b_w = 0.0;
  double signed_score = 0.0;
};

struct WordScore {
  std::string word;
  double s = 0.0;
  double b_w = 0.0;
};

struct BiasReport {
  std::vector<PairScore> pairs;
  std::vector<WordScore> inanimate;
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_permutations = 0;
  bool exhaustive = false;
  std::uint64_t seed = 0;
};

/// Per-pair and per-inanimate MWEAT scores plus the aggregate statistic and
/// its permutation p-value.
inline BiasReport bias_report(const BiasQuery& q, const EmbeddingSpace& space,
                              const std::vector<std::string>& inanimate, std::size_t n_perm,
                              std::uint64_t seed) {
  q.validate();
  if (!q.paired) throw ValidationError("bias_report expects a paired query");
  const AssociationScorer s(space, q.A, q.B);
  BiasReport report;
  double sum_x = 0.0;
  double sum_y = 0.0;
  for (std::size_t i = 0; i < q.X.size(); ++i) {
    PairScore p{q.X[i], q.Y[i], s(q.X[i]), s(q.Y[i]), 0.0, 0.0};
    p.signed_score = std::abs(p.s_m) - std::abs(p.s_f);
    p.b_w = std::abs(p.signed_score);
    sum_x += p.s_m;
    sum_y += p.s_f;
    report.pairs.push_back(std::move(p));
  }
  for (const auto& w : inanimate) {
    const double v = s(w);
    report.inanimate.push_back({w, v, std::abs(v)});
  }
  const auto perm = permutation_test(q, space, n_perm, seed);
  report.statistic = perm.observed;
  report.p_value = perm.p_value;
  report.n_permutations = perm.n_permutations;
  report.exhaustive = perm.exhaustive;
  report.seed = seed;
  return report;
}

inline nlohmann::json bias_report_to_json(const BiasReport& r, bool include_signed) {
  using nlohmann::json;
  json per_word = json::array();
  for (const auto& p : r.pairs) {
    json e{{"pair", {p.masculine, p.feminine}}, {"s_m", p.s_m}, {"s_f", p.s_f}, {"b_w", p.b_w}};
    if (include_signed) e["signed"] = p.signed_score;
    per_word.push_back(std::move(e));
  }
  for (const auto& w : r.inanimate) {
    json e{{"word", w.word}, {"s", w.s}, {"b_w", w.b_w}};
    if (include_signed) e["signed"] = w.s;
    per_word.push_back(std::move(e));
  }
  return json{{"per_word", per_word},
              {"statistic", r.statistic},
              {"p_value", r.p_value},
              {"n_permutations", r.n_permutations},
              {"exhaustive", r.exhaustive},
              {"seed", r.seed}};
}

struct CorrelationResult {
  double rho = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// Spearman correlation over the common keys of two score maps.
inline CorrelationResult bias_correlation(const std::map<std::string, double>& a,
                                          const std::map<std::string, double>& b) {
  std::vector<double> xa;
  std::vector<double> xb;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    if (it == b.end()) continue;
    xa.push_back(v);
    xb.push_back(it->second);
  }
  if (xa.size() < 5) {
    throw ValidationError("bias correlation needs at least 5 common words, got " +
                          std::to_string(xa.size()));
  }
  CorrelationResult r;
  r.n = xa.size();
  r.rho = stats::spearman(xa, xb);
  r.p_value = stats::correlation_p_value(r.rho, r.n);
  return r;
}

}  // namespace gbias
