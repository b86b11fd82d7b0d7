#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gbias/embedding_store.hpp"
#include "gbias/error.hpp"
#include "gbias/lexicon.hpp"
#include "gbias/vector_ops.hpp"

namespace gbias {

/// Semantic direction, grammatical direction and the semantic direction with
/// the grammatical component removed. All unit length; positive = feminine.
struct GenderDirections {
  Vector d_pca;
  Vector d_g;
  Vector d_s;
  double pca_explained_ratio = 0.0;
  std::optional<double> lda_cv_accuracy;
  double overlap = 0.0;  // <d_pca, d_g>
};

struct PowerIterationResult {
  Vector vector;
  double eigenvalue = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct SemanticDirection {
  Vector direction;
  double explained_ratio = 0.0;
  std::size_t pairs_used = 0;
};

struct DirectionOptions {
  std::optional<double> ridge;  // nullopt: 1e-3 * trace(pooled covariance) / dim
  bool cross_validate = false;
  int folds = 5;
  std::uint64_t seed = 0;
};

/// Dominant eigenvector of a symmetric positive semi-definite matrix by power
/// iteration from the normalized all-ones vector.
inline PowerIterationResult top_eigenvector(const Eigen::MatrixXd& sym, double tolerance = 1e-10,
                                            int max_iterations = 10000) {
  const Eigen::Index n = sym.rows();
  if (n == 0 || sym.cols() != n) throw ValidationError("power iteration needs a square matrix");
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  if ((sym * v).norm() == 0.0) {
    // Start vector in the null space; restart on the largest diagonal entry.
    Eigen::Index best = 0;
    sym.diagonal().maxCoeff(&best);
    v = Eigen::VectorXd::Unit(n, best);
  }
  PowerIterationResult out;
  for (int it = 1; it <= max_iterations; ++it) {
    Eigen::VectorXd w = sym * v;
    const double len = w.norm();
    if (len == 0.0) {
      out.iterations = it;
      out.converged = true;
      break;
    }
    w /= len;
    const double change = (w - v).norm();
    v = w;
    out.iterations = it;
    out.eigenvalue = len;
    if (change < tolerance) {
      out.converged = true;
      break;
    }
  }
  out.eigenvalue = v.dot(sym * v);
  out.vector.assign(v.data(), v.data() + n);
  return out;
}

/// Top principal component of mean-centred difference vectors, oriented so
/// that the mean difference projects non-negatively.
inline SemanticDirection principal_difference_direction(const std::vector<Vector>& diffs) {
  if (diffs.size() < 2) {
    throw ValidationError("semantic direction needs at least 2 usable definitional pairs, got " +
                          std::to_string(diffs.size()));
  }
  const std::size_t dim = diffs.front().size();
  const auto rows = static_cast<Eigen::Index>(diffs.size());
  Eigen::MatrixXd d(rows, static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& diff = diffs[static_cast<std::size_t>(i)];
    if (diff.size() != dim) throw ValidationError("difference vectors disagree on dimension");
    for (std::size_t j = 0; j < dim; ++j) d(i, static_cast<Eigen::Index>(j)) = diff[j];
  }
  const Eigen::VectorXd mean = d.colwise().mean().transpose();
  const Eigen::MatrixXd centred = d.rowwise() - mean.transpose();

  SemanticDirection out;
  out.pairs_used = diffs.size();
  if (centred.cwiseAbs().maxCoeff() <= 1e-12) {
    if (mean.norm() == 0.0) throw ValidationError("all definitional differences are zero");
    const Eigen::VectorXd dir = mean.normalized();
    out.direction.assign(dir.data(), dir.data() + dir.size());
    out.explained_ratio = 1.0;
    return out;
  }
  const Eigen::MatrixXd cov = centred.transpose() * centred;
  auto pc = top_eigenvector(cov);
  if (!pc.converged) warn("power iteration did not converge within the iteration limit");
  const double trace = cov.trace();
  out.explained_ratio = trace > 0.0 ? std::clamp(pc.eigenvalue / trace, 0.0, 1.0) : 1.0;
  Eigen::Map<Eigen::VectorXd> dir(pc.vector.data(), static_cast<Eigen::Index>(dim));
  dir.normalize();
  if (dir.dot(mean) < 0.0) dir = -dir;
  out.direction = std::move(pc.vector);
  return out;
}

inline std::vector<Vector> pair_differences(const EmbeddingSpace& space,
                                            const std::vector<WordPair>& pairs) {
  std::vector<Vector> diffs;
  for (const auto& p : pairs) {
    auto m = space.find(p.masculine);
    auto f = space.find(p.feminine);
    if (!m || !f) continue;
    diffs.push_back(add_scaled(space.row(*f), -1.0, space.row(*m)));
  }
  return diffs;
}

/// PCA over (feminine - masculine) definitional differences.
inline SemanticDirection semantic_direction(const EmbeddingSpace& space,
                                            const std::vector<WordPair>& pairs) {
  return principal_difference_direction(pair_differences(space, pairs));
}

namespace detail {

inline Eigen::MatrixXd gather_rows(const EmbeddingSpace& space, const std::vector<std::string>& words) {
  std::vector<std::size_t> idx;
  for (const auto& w : words) {
    if (auto i = space.find(w)) idx.push_back(*i);
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(space.dim()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto row = space.row(idx[r]);
    for (std::size_t j = 0; j < space.dim(); ++j) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = row[j];
    }
  }
  return m;
}

/// Two-class Fisher discriminant on row samples; returns unit direction with
/// the feminine class projecting higher.
inline Eigen::VectorXd fit_lda(const Eigen::MatrixXd& masc, const Eigen::MatrixXd& fem,
                               std::optional<double> ridge) {
  const Eigen::Index dim = masc.cols();
  const Eigen::VectorXd mu_m = masc.colwise().mean().transpose();
  const Eigen::VectorXd mu_f = fem.colwise().mean().transpose();
  const Eigen::MatrixXd cm = masc.rowwise() - mu_m.transpose();
  const Eigen::MatrixXd cf = fem.rowwise() - mu_f.transpose();
  const double dof = static_cast<double>(masc.rows() + fem.rows() - 2);
  Eigen::MatrixXd pooled = (cm.transpose() * cm + cf.transpose() * cf) / dof;
  const double eps = ridge ? *ridge : 1e-3 * pooled.trace() / static_cast<double>(dim);
  if (eps < 0.0) throw ValidationError("ridge must be non-negative");
  pooled.diagonal().array() += eps;
  Eigen::LLT<Eigen::MatrixXd> llt(pooled);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-13) {
    throw ValidationError("pooled within-class covariance is singular; use a positive ridge");
  }
  const Eigen::VectorXd gap = mu_f - mu_m;
  Eigen::VectorXd d = llt.solve(gap);
  const double n = d.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("LDA produced a degenerate direction");
  d /= n;
  if (d.dot(gap) < 0.0) d = -d;
  return d;
}

}  // namespace detail

/// Fisher LDA direction (pooled covariance + ridge * I)^-1 (mu_fem - mu_masc).
inline Vector grammatical_direction(const EmbeddingSpace& space,
                                    const std::vector<std::string>& masculine,
                                    const std::vector<std::string>& feminine,
                                    std::optional<double> ridge = std::nullopt) {
  const Eigen::MatrixXd m = detail::gather_rows(space, masculine);
  const Eigen::MatrixXd f = detail::gather_rows(space, feminine);
  if (m.rows() == 0) throw ValidationError("grammatical_masculine has no words in the space");
  if (f.rows() == 0) throw ValidationError("grammatical_feminine has no words in the space");
  if (m.rows() < 2 || f.rows() < 2) {
    throw ValidationError("grammatical direction needs at least 2 words per class");
  }
  const auto few = static_cast<Eigen::Index>(space.dim() / 10);
  if (m.rows() < few || f.rows() < few) {
    warn("grammatical noun lists are small relative to the dimension (" +
         std::to_string(m.rows()) + " masculine, " + std::to_string(f.rows()) + " feminine, dim " +
         std::to_string(space.dim()) + ")");
  }
  const Eigen::VectorXd d = detail::fit_lda(m, f, ridge);
  return Vector(d.data(), d.data() + d.size());
}

/// Stratified k-fold accuracy of the LDA classifier thresholded at the
/// midpoint of the projected training class means.
inline double lda_cross_validation(const EmbeddingSpace& space,
                                   const std::vector<std::string>& masculine,
                                   const std::vector<std::string>& feminine, int folds,
                                   std::uint64_t seed,
                                   std::optional<double> ridge = std::nullopt) {
  if (folds < 2) throw ValidationError("cross-validation needs at least 2 folds");
  const Eigen::MatrixXd m = detail::gather_rows(space, masculine);
  const Eigen::MatrixXd f = detail::gather_rows(space, feminine);
  if (m.rows() < folds || f.rows() < folds) {
    throw ValidationError("cross-validation needs at least " + std::to_string(folds) +
                          " words per class");
  }
  std::mt19937_64 rng(seed);
  auto assign = [&](Eigen::Index n) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> fold_of(static_cast<std::size_t>(n));
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      fold_of[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(folds));
    }
    return fold_of;
  };
  const auto fold_m = assign(m.rows());
  const auto fold_f = assign(f.rows());

  auto subset = [](const Eigen::MatrixXd& x, const std::vector<int>& fold_of, int fold, bool in) {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      if ((fold_of[i] == fold) == in) rows.push_back(static_cast<Eigen::Index>(i));
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
    return out;
  };

  double total = 0.0;
  for (int k = 0; k < folds; ++k) {
    const auto train_m = subset(m, fold_m, k, false);
    const auto train_f = subset(f, fold_f, k, false);
    const auto test_m = subset(m, fold_m, k, true);
    const auto test_f = subset(f, fold_f, k, true);
    const Eigen::VectorXd d = detail::fit_lda(train_m, train_f, ridge);
    const double threshold = 0.5 * ((train_m * d).mean() + (train_f * d).mean());
    const Eigen::VectorXd pm = test_m * d;
    const Eigen::VectorXd pf = test_f * d;
    const auto correct = (pm.array() <= threshold).count() + (pf.array() > threshold).count();
    total += static_cast<double>(correct) / static_cast<double>(pm.size() + pf.size());
  }
  return total / folds;
}

/// d_pca with its d_g component removed, renormalized.
inline Vector orthogonalize(ConstVectorView d_pca, ConstVectorView d_g) {
  require_same_dim(d_pca, d_g);
  if (std::abs(norm(d_pca) - 1.0) > 1e-6 || std::abs(norm(d_g) - 1.0) > 1e-6) {
    throw ValidationError("orthogonalize expects unit-norm directions");
  }
  const double overlap = dot(d_pca, d_g);
  if (std::abs(overlap) >= 1.0 - 1e-9) {
    throw ValidationError("semantic and grammatical directions are parallel");
  }
  Vector r = add_scaled(d_pca, -overlap, d_g);
  // second pass
  r = add_scaled(r, -dot(r, d_g), d_g);
  return normalized(r);
}

inline double project(ConstVectorView w, ConstVectorView d) { return dot(w, d); }

inline GenderDirections assemble_directions(SemanticDirection semantic, Vector d_g) {
  GenderDirections out;
  out.d_pca = std::move(semantic.direction);
  out.pca_explained_ratio = semantic.explained_ratio;
  out.d_g = std::move(d_g);
  out.d_s = orthogonalize(out.d_pca, out.d_g);
  out.overlap = dot(out.d_pca, out.d_g);
  return out;
}

/// Monolingual construction: d_pca from definitional pairs, d_g from the
/// grammatical noun lists.
inline GenderDirections build_directions(const EmbeddingSpace& space, const GenderLexicon& lexicon,
                                         const DirectionOptions& options = {}) {
  auto out = assemble_directions(
      semantic_direction(space, lexicon.definitional_pairs),
      grammatical_direction(space, lexicon.grammatical_masculine, lexicon.grammatical_feminine,
                            options.ridge));
  if (options.cross_validate) {
    out.lda_cv_accuracy = lda_cross_validation(space, lexicon.grammatical_masculine,
                                               lexicon.grammatical_feminine, options.folds,
                                               options.seed, options.ridge);
  }
  return out;
}

/// Bilingual construction: d_g from the gendered-language nouns only, d_pca
/// from the union of both languages' definitional pairs.
inline GenderDirections bilingual_directions(const BilingualSpace& bi,
                                             const GenderLexicon& source_lexicon,
                                             const std::vector<WordPair>& english_pairs,
                                             const DirectionOptions& options = {}) {
  auto diffs = pair_differences(bi.source, source_lexicon.definitional_pairs);
  auto en_diffs = pair_differences(bi.target, english_pairs);
  diffs.insert(diffs.end(), std::make_move_iterator(en_diffs.begin()),
               std::make_move_iterator(en_diffs.end()));
  auto out = assemble_directions(
      principal_difference_direction(diffs),
      grammatical_direction(bi.source, source_lexicon.grammatical_masculine,
                            source_lexicon.grammatical_feminine, options.ridge));
  if (options.cross_validate) {
    out.lda_cv_accuracy = lda_cross_validation(bi.source, source_lexicon.grammatical_masculine,
                                               source_lexicon.grammatical_feminine, options.folds,
                                               options.seed, options.ridge);
  }
  return out;
}

inline nlohmann::json directions_to_json(const GenderDirections& d) {
  nlohmann::json j;
  j["d_pca"] = d.d_pca;
  j["d_g"] = d.d_g;
  j["d_s"] = d.d_s;
  j["overlap"] = d.overlap;
  j["pca_explained_ratio"] = d.pca_explained_ratio;
  j["lda_cv_accuracy"] = d.lda_cv_accuracy ? nlohmann::json(*d.lda_cv_accuracy) : nlohmann::json(nullptr);
  return j;
}

}  // namespace gbias
