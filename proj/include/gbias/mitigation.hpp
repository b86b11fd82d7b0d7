#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>
#include <json.hpp>

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gbias/embedding_store.hpp"
#include "gbias/error.hpp"
#include "gbias/gender_geometry.hpp"
#include "gbias/lexicon.hpp"
#include "gbias/parallel.hpp"
#include "gbias/vector_ops.hpp"

namespace gbias {

enum class MitigationMethod { shift_ori, shift_en, de_align, hybrid_ori, hybrid_en };

inline const char* to_string(MitigationMethod m) {
  switch (m) {
    case MitigationMethod::shift_ori: return "shift_ori";
    case MitigationMethod::shift_en: return "shift_en";
    case MitigationMethod::de_align: return "de_align";
    case MitigationMethod::hybrid_ori: return "hybrid_ori";
    case MitigationMethod::hybrid_en: return "hybrid_en";
  }
  return "unknown";
}

inline MitigationMethod parse_method(const std::string& name) {
  for (auto m : {MitigationMethod::shift_ori, MitigationMethod::shift_en, MitigationMethod::de_align,
                 MitigationMethod::hybrid_ori, MitigationMethod::hybrid_en}) {
    if (name == to_string(m)) return m;
  }
  throw ValidationError("unknown mitigation method '" + name + "'");
}

inline bool is_bilingual(MitigationMethod m) { return m != MitigationMethod::shift_ori; }
inline bool needs_alignment(MitigationMethod m) {
  return m == MitigationMethod::de_align || m == MitigationMethod::hybrid_ori ||
         m == MitigationMethod::hybrid_en;
}

/// Removes the d component of w and renormalizes. Throws when w is parallel
/// to d.
inline Vector neutralize(ConstVectorView w, ConstVectorView d) {
  Vector r = add_scaled(w, -dot(w, d), d);
  r = add_scaled(r, -dot(r, d), d);
  const double n = norm(r);
  if (n <= 1e-12 * std::max(1.0, norm(w))) {
    throw ValidationError("cannot neutralize a vector parallel to the direction");
  }
  for (double& v : r) v /= n;
  return r;
}

/// Moves both forms by the same -delta * d_s so that their projections are
/// symmetric about anchor_proj:
/// delta = (<w_m,d_s> + <w_f,d_s> - 2 anchor_proj) / 2.
inline std::pair<Vector, Vector> shift_pair(ConstVectorView w_m, ConstVectorView w_f,
                                            ConstVectorView d_s, double anchor_proj) {
  const double delta = (dot(w_m, d_s) + dot(w_f, d_s) - 2.0 * anchor_proj) / 2.0;
  return {add_scaled(w_m, -delta, d_s), add_scaled(w_f, -delta, d_s)};
}

/// |<w_m,d_s> + <w_f,d_s> - 2 anchor_proj|
inline double pair_residual(ConstVectorView w_m, ConstVectorView w_f, ConstVectorView d_s,
                            double anchor_proj) {
  return std::abs(dot(w_m, d_s) + dot(w_f, d_s) - 2.0 * anchor_proj);
}

struct PairResidual {
  std::string masculine;
  std::string feminine;
  double anchor_proj = 0.0;
  double residual = 0.0;
  std::optional<double> residual_after_renormalization;
};

struct MitigationOutcome {
  MitigationMethod method = MitigationMethod::shift_ori;
  EmbeddingSpace source;
  std::optional<EmbeddingSpace> target;  // English side for bilingual methods
  GenderDirections directions;           // the directions the shift used
  std::vector<PairResidual> residuals;
  std::vector<std::pair<std::string, double>> inanimate_projections;
  std::size_t words_touched = 0;
  std::optional<Eigen::MatrixXd> alignment;  // source rotation, when re-aligned
  std::size_t seed_pairs = 0;
};

/// English hard-debiasing inputs.
struct HardDebiasConfig {
  std::vector<WordPair> definitional_pairs;
  std::vector<WordPair> equalize_pairs;
  std::vector<std::string> gender_specific;
};

/// Defaults: equalize the definitional pairs; protect definitional,
/// attribute and equalize words from neutralization.
inline HardDebiasConfig hard_debias_config(const GenderLexicon& english) {
  HardDebiasConfig cfg;
  cfg.definitional_pairs = english.definitional_pairs;
  cfg.equalize_pairs = english.equalize_pairs.empty() ? english.definitional_pairs : english.equalize_pairs;
  if (!english.gender_specific.empty()) {
    cfg.gender_specific = english.gender_specific;
  } else {
    std::set<std::string> words;
    for (const auto& p : english.definitional_pairs) words.insert({p.masculine, p.feminine});
    for (const auto& p : cfg.equalize_pairs) words.insert({p.masculine, p.feminine});
    words.insert(english.attributes_male.begin(), english.attributes_male.end());
    words.insert(english.attributes_female.begin(), english.attributes_female.end());
    cfg.gender_specific.assign(words.begin(), words.end());
  }
  return cfg;
}

struct HardDebiasResult {
  EmbeddingSpace space;
  Vector direction;
  std::size_t neutralized = 0;
  std::size_t equalized = 0;
};

/// Neutralize-and-equalize on an English space. Equalized members come out
/// unit length, so the space should already be unit-normalized.
inline HardDebiasResult hard_debias_english(const EmbeddingSpace& space,
                                            const HardDebiasConfig& config) {
  HardDebiasResult out;
  out.direction = semantic_direction(space, config.definitional_pairs).direction;
  const Vector& d = out.direction;

  std::set<std::string> protect(config.gender_specific.begin(), config.gender_specific.end());
  for (const auto& p : config.equalize_pairs) protect.insert({p.masculine, p.feminine});

  std::vector<double> data = space.data();
  const std::size_t dim = space.dim();
  std::vector<char> touched(space.size(), 0);
  parallel_for(space.size(), [&](std::size_t i) {
    if (protect.count(space.word(i))) return;
    const Vector v = neutralize(space.row(i), d);
    std::copy(v.begin(), v.end(), data.begin() + static_cast<std::ptrdiff_t>(i * dim));
    touched[i] = 1;
  });
  for (char t : touched) out.neutralized += static_cast<std::size_t>(t);

  for (const auto& p : config.equalize_pairs) {
    auto ia = space.find(p.masculine);
    auto ib = space.find(p.feminine);
    if (!ia || !ib) {
      warn("equalize pair [" + p.masculine + ", " + p.feminine + "] not in the English space");
      continue;
    }
    const auto a = space.row(*ia);
    const auto b = space.row(*ib);
    Vector mu(dim);
    for (std::size_t j = 0; j < dim; ++j) mu[j] = 0.5 * (a[j] + b[j]);
    const Vector nu = add_scaled(mu, -dot(mu, d), d);
    const double nu_sq = dot(nu, nu);
    if (nu_sq > 1.0) {
      throw ValidationError("equalize pair [" + p.masculine + ", " + p.feminine +
                            "] has |nu| > 1 (degenerate geometry)");
    }
    const double scale = std::sqrt(1.0 - nu_sq);
    const double side = dot(a, d) >= dot(b, d) ? 1.0 : -1.0;
    const auto place = [&](std::size_t row, double sign) {
      Vector v = add_scaled(nu, sign * scale, d);
      v = normalized(v);
      std::copy(v.begin(), v.end(), data.begin() + static_cast<std::ptrdiff_t>(row * dim));
    };
    place(*ia, side);
    place(*ib, -side);
    out.equalized += 1;
  }
  out.space = EmbeddingSpace(space.words(), std::move(data), dim, space.language_tag(),
                             space.normalized());
  return out;
}

struct Alignment {
  BilingualSpace space;
  Eigen::MatrixXd rotation;  // W with source rows mapped x -> W x
  std::size_t seed_pairs = 0;
};

/// Orthogonal Procrustes: W = U V^T from the SVD of sum_i y_i x_i^T over seed
/// translation pairs; every source vector is rotated by W.
inline Alignment procrustes_align(const EmbeddingSpace& source, const EmbeddingSpace& target,
                                  const BilingualDictionary& seed) {
  if (source.dim() != target.dim()) throw ValidationError("cannot align spaces of different dimension");
  const auto dim = static_cast<Eigen::Index>(source.dim());
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [src, targets] : seed.entries()) {
    auto i = source.find(src);
    if (!i) continue;
    for (const auto& t : targets) {
      if (auto j = target.find(t)) pairs.emplace_back(*i, *j);
    }
  }
  if (pairs.size() < source.dim()) {
    throw ValidationError("insufficient seed pairs for alignment: " + std::to_string(pairs.size()) +
                          " covered, need at least " + std::to_string(source.dim()));
  }
  if (pairs.size() < 5 * source.dim()) {
    warn("only " + std::to_string(pairs.size()) + " seed pairs for a " + std::to_string(dim) +
         "-dimensional alignment");
  }
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(dim, dim);
  const auto xs = source.matrix();
  const auto ys = target.matrix();
  for (const auto& [i, j] : pairs) {
    cross.noalias() += ys.row(static_cast<Eigen::Index>(j)).transpose() *
                       xs.row(static_cast<Eigen::Index>(i));
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(dim - 1) / sv(0) < 1e-10) {
    throw ValidationError("seed cross-covariance is rank-deficient; alignment is not unique");
  }
  Eigen::MatrixXd w = svd.matrixU() * svd.matrixV().transpose();

  RowMatrix rotated = xs * w.transpose();
  std::vector<double> data(rotated.data(), rotated.data() + rotated.size());
  EmbeddingSpace moved(source.words(), std::move(data), source.dim(), source.language_tag(),
                       source.normalized());
  return Alignment{BilingualSpace(std::move(moved), target), std::move(w), pairs.size()};
}

namespace detail {

struct ShiftResult {
  EmbeddingSpace space;
  std::vector<PairResidual> residuals;
  std::vector<std::pair<std::string, double>> inanimate_projections;
  std::size_t words_touched = 0;
};

template <typename AnchorFn>
ShiftResult shift_space(const EmbeddingSpace& space, const GenderLexicon& lexicon,
                        ConstVectorView d_s, AnchorFn&& anchor_of) {
  if (lexicon.occupation_pairs.empty() && lexicon.inanimate_nouns.empty()) {
    throw ValidationError("lexicon has neither occupation pairs nor inanimate nouns to mitigate");
  }
  std::map<std::string, Vector> updates;
  auto current = [&](const std::string& w) -> Vector {
    auto it = updates.find(w);
    return it != updates.end() ? it->second : to_vector(space.vector(w));
  };
  std::vector<double> anchors;
  for (const auto& p : lexicon.occupation_pairs) {
    const double anchor = anchor_of(p);
    anchors.push_back(anchor);
    auto [m, f] = shift_pair(current(p.masculine), current(p.feminine), d_s, anchor);
    updates[p.masculine] = std::move(m);
    updates[p.feminine] = std::move(f);
  }
  for (const auto& w : lexicon.inanimate_nouns) updates[w] = neutralize(current(w), d_s);

  ShiftResult out;
  out.words_touched = updates.size();
  std::vector<std::pair<std::string, Vector>> rows(updates.begin(), updates.end());
  out.space = space.with_replaced(rows);
  for (std::size_t k = 0; k < lexicon.occupation_pairs.size(); ++k) {
    const auto& p = lexicon.occupation_pairs[k];
    out.residuals.push_back({p.masculine, p.feminine, anchors[k],
                             pair_residual(out.space.vector(p.masculine),
                                           out.space.vector(p.feminine), d_s, anchors[k]),
                             std::nullopt});
  }
  for (const auto& w : lexicon.inanimate_nouns) {
    out.inanimate_projections.emplace_back(w, dot(out.space.vector(w), d_s));
  }
  return out;
}

inline std::vector<PairResidual> origin_residuals(const EmbeddingSpace& space,
                                                  const GenderLexicon& lexicon, ConstVectorView d_s) {
  std::vector<PairResidual> out;
  for (const auto& p : lexicon.occupation_pairs) {
    out.push_back({p.masculine, p.feminine, 0.0,
                   pair_residual(space.vector(p.masculine), space.vector(p.feminine), d_s, 0.0),
                   std::nullopt});
  }
  return out;
}

}  // namespace detail

/// Origin-anchored shift of every occupation pair plus neutralization of
/// every inanimate noun along d_s.
inline MitigationOutcome mitigate_shift_ori(const EmbeddingSpace& space, const GenderLexicon& lexicon,
                                            const GenderDirections& directions) {
  auto r = detail::shift_space(space, lexicon, directions.d_s,
                               [](const OccupationPair&) { return 0.0; });
  MitigationOutcome out;
  out.method = MitigationMethod::shift_ori;
  out.source = std::move(r.space);
  out.directions = directions;
  out.residuals = std::move(r.residuals);
  out.inanimate_projections = std::move(r.inanimate_projections);
  out.words_touched = r.words_touched;
  return out;
}

/// English-anchored shift: each pair is made symmetric about the projection
/// of its aligned English word.
inline MitigationOutcome mitigate_shift_en(const BilingualSpace& bi, const GenderLexicon& lexicon,
                                           const GenderDirections& directions) {
  auto anchor = [&](const OccupationPair& p) {
    if (!p.english) {
      throw ValidationError("occupation pair [" + p.masculine + ", " + p.feminine +
                            "] has no English anchor word");
    }
    if (!bi.target.contains(*p.english)) {
      throw ValidationError("English anchor '" + *p.english + "' for pair [" + p.masculine + ", " +
                            p.feminine + "] is not in the English space");
    }
    return dot(bi.target.vector(*p.english), directions.d_s);
  };
  auto r = detail::shift_space(bi.source, lexicon, directions.d_s, anchor);
  MitigationOutcome out;
  out.method = MitigationMethod::shift_en;
  out.source = std::move(r.space);
  out.target = bi.target;
  out.directions = directions;
  out.residuals = std::move(r.residuals);
  out.inanimate_projections = std::move(r.inanimate_projections);
  out.words_touched = r.words_touched;
  return out;
}

struct DeAlignResult {
  BilingualSpace space;
  HardDebiasResult debias;
  Eigen::MatrixXd rotation;
  std::size_t seed_pairs = 0;
};

/// Hard-debias English, then rotate the gendered language onto it.
inline DeAlignResult mitigate_de_align(const EmbeddingSpace& source, const EmbeddingSpace& english,
                                       const BilingualDictionary& seed, const HardDebiasConfig& config) {
  auto debiased = hard_debias_english(english, config);
  auto aligned = procrustes_align(source, debiased.space, seed);
  return DeAlignResult{std::move(aligned.space), std::move(debiased), std::move(aligned.rotation),
                       aligned.seed_pairs};
}

enum class AnchorVariant { origin, english };

/// De-Align, rebuild bilingual directions on the aligned space, then shift
/// (origin anchors for Hybrid_Ori, debiased English anchors for Hybrid_EN).
inline MitigationOutcome mitigate_hybrid(const EmbeddingSpace& source, const EmbeddingSpace& english,
                                         const GenderLexicon& lexicon, AnchorVariant variant,
                                         const BilingualDictionary& seed,
                                         const HardDebiasConfig& config,
                                         const DirectionOptions& options = {}) {
  auto aligned = mitigate_de_align(source, english, seed, config);
  const auto directions =
      bilingual_directions(aligned.space, lexicon, config.definitional_pairs, options);
  MitigationOutcome out;
  if (variant == AnchorVariant::english) {
    out = mitigate_shift_en(aligned.space, lexicon, directions);
    out.method = MitigationMethod::hybrid_en;
  } else {
    out = mitigate_shift_ori(aligned.space.source, lexicon, directions);
    out.target = aligned.space.target;
    out.method = MitigationMethod::hybrid_ori;
  }
  out.alignment = std::move(aligned.rotation);
  out.seed_pairs = aligned.seed_pairs;
  return out;
}

/// Everything one pipeline run may need; which fields are required depends on
/// the method.
struct MitigationPlan {
  MitigationMethod method = MitigationMethod::shift_ori;
  GenderLexicon lexicon;
  std::optional<GenderDirections> directions;          // computed when absent
  std::optional<BilingualDictionary> seed_dictionary;  // identical strings when absent
  std::optional<HardDebiasConfig> en_debias;
  DirectionOptions direction_options;

  void validate(const EmbeddingSpace* english) const {
    if (is_bilingual(method) && english == nullptr) {
      throw ValidationError(std::string(to_string(method)) + " needs English embeddings");
    }
    if (needs_alignment(method) && !en_debias) {
      throw ValidationError(std::string(to_string(method)) +
                            " needs an English hard-debias configuration");
    }
    if (directions) {
      for (const auto* d : {&directions->d_pca, &directions->d_g, &directions->d_s}) {
        if (std::abs(norm(*d) - 1.0) > 1e-9) throw ValidationError("plan directions must be unit vectors");
      }
      if (std::abs(dot(directions->d_s, directions->d_g)) > 1e-6) {
        throw ValidationError("plan directions violate d_s orthogonal to d_g");
      }
    }
  }
};

/// Dispatches one of the five pipelines. De-Align performs no shift; its
/// residuals are reported against origin anchors on rebuilt directions.
inline MitigationOutcome run_mitigation(const MitigationPlan& plan, const EmbeddingSpace& source,
                                        const EmbeddingSpace* english) {
  plan.validate(english);
  const std::vector<WordPair> en_pairs =
      plan.en_debias ? plan.en_debias->definitional_pairs : std::vector<WordPair>{};
  auto seed = [&] {
    return plan.seed_dictionary ? *plan.seed_dictionary : identity_dictionary(source, *english);
  };
  switch (plan.method) {
    case MitigationMethod::shift_ori: {
      const auto dirs = plan.directions ? *plan.directions
                                        : build_directions(source, plan.lexicon, plan.direction_options);
      return mitigate_shift_ori(source, plan.lexicon, dirs);
    }
    case MitigationMethod::shift_en: {
      const BilingualSpace bi(source, *english);
      const auto dirs = plan.directions
                            ? *plan.directions
                            : bilingual_directions(bi, plan.lexicon, en_pairs, plan.direction_options);
      return mitigate_shift_en(bi, plan.lexicon, dirs);
    }
    case MitigationMethod::de_align: {
      auto aligned = mitigate_de_align(source, *english, seed(), *plan.en_debias);
      MitigationOutcome out;
      out.method = MitigationMethod::de_align;
      out.directions =
          bilingual_directions(aligned.space, plan.lexicon, en_pairs, plan.direction_options);
      out.residuals = detail::origin_residuals(aligned.space.source, plan.lexicon, out.directions.d_s);
      for (const auto& w : plan.lexicon.inanimate_nouns) {
        out.inanimate_projections.emplace_back(w, dot(aligned.space.source.vector(w), out.directions.d_s));
      }
      out.words_touched = aligned.space.source.size();
      out.source = std::move(aligned.space.source);
      out.target = std::move(aligned.space.target);
      out.alignment = std::move(aligned.rotation);
      out.seed_pairs = aligned.seed_pairs;
      return out;
    }
    case MitigationMethod::hybrid_ori:
    case MitigationMethod::hybrid_en:
      return mitigate_hybrid(source, *english, plan.lexicon,
                             plan.method == MitigationMethod::hybrid_ori ? AnchorVariant::origin
                                                                         : AnchorVariant::english,
                             seed(), *plan.en_debias, plan.direction_options);
  }
  throw ValidationError("unknown mitigation method");
}

/// Optional final pass: rescales every non-unit source vector to unit length
/// and records the resulting residuals next to the exact ones.
inline void finalize_unit_norm(MitigationOutcome& outcome) {
  std::vector<std::pair<std::string, Vector>> rows;
  for (std::size_t i = 0; i < outcome.source.size(); ++i) {
    const auto r = outcome.source.row(i);
    if (std::abs(norm(r) - 1.0) > 1e-15) rows.emplace_back(outcome.source.word(i), normalized(r));
  }
  outcome.source = outcome.source.with_replaced(rows);
  for (auto& r : outcome.residuals) {
    r.residual_after_renormalization =
        pair_residual(outcome.source.vector(r.masculine), outcome.source.vector(r.feminine),
                      outcome.directions.d_s, r.anchor_proj);
  }
}

inline nlohmann::json outcome_to_json(const MitigationOutcome& o) {
  using nlohmann::json;
  json residuals = json::array();
  double max_residual = 0.0;
  for (const auto& r : o.residuals) {
    json e{{"pair", {r.masculine, r.feminine}}, {"anchor_proj", r.anchor_proj}, {"residual", r.residual}};
    if (r.residual_after_renormalization) e["residual_after_renormalization"] = *r.residual_after_renormalization;
    residuals.push_back(std::move(e));
    max_residual = std::max(max_residual, r.residual);
  }
  json inanimate = json::array();
  for (const auto& [w, p] : o.inanimate_projections) {
    inanimate.push_back({{"word", w}, {"semantic_proj", p}});
  }
  json j{{"method", to_string(o.method)},
         {"words_touched", o.words_touched},
         {"residuals", residuals},
         {"max_residual", max_residual},
         {"inanimate", inanimate},
         {"directions", directions_to_json(o.directions)}};
  if (o.alignment) {
    const Eigen::MatrixXd& w = *o.alignment;
    j["alignment"] = {{"seed_pairs", o.seed_pairs},
                      {"orthogonality_error",
                       (w.transpose() * w - Eigen::MatrixXd::Identity(w.rows(), w.cols())).cwiseAbs().maxCoeff()}};
  }
  return j;
}

}  // namespace gbias
