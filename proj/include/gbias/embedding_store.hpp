#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gbias/error.hpp"
#include "gbias/vector_ops.hpp"

namespace gbias {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMatrixMap = Eigen::Map<const RowMatrix>;

/// Immutable vocabulary -> dense vector map. Rows keep insertion order.
/// Transforms never mutate; they build a new space.
class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;

  EmbeddingSpace(std::vector<std::string> words, std::vector<double> data, std::size_t dim,
                 std::string language_tag = {}, bool normalized = false)
      : dim_(dim),
        words_(std::move(words)),
        data_(std::move(data)),
        language_tag_(std::move(language_tag)),
        normalized_(normalized) {
    if (dim_ == 0) throw ValidationError("embedding dimension must be positive");
    if (data_.size() != words_.size() * dim_) {
      throw ValidationError("embedding data size does not match vocabulary x dim");
    }
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (words_[i].empty()) throw ValidationError("empty word at row " + std::to_string(i));
      if (!index_.emplace(words_[i], i).second) {
        throw ValidationError("duplicate word '" + words_[i] + "'");
      }
    }
    for (double v : data_) {
      if (!std::isfinite(v)) throw ValidationError("non-finite embedding component");
    }
    if (normalized_) {
      for (std::size_t i = 0; i < words_.size(); ++i) {
        if (std::abs(norm(row(i)) - 1.0) > 1e-6) {
          throw ValidationError("space flagged normalized but '" + words_[i] +
                                "' does not have unit norm");
        }
      }
    }
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  bool normalized() const { return normalized_; }
  const std::string& language_tag() const { return language_tag_; }
  const std::vector<std::string>& words() const { return words_; }
  const std::string& word(std::size_t i) const { return words_.at(i); }
  const std::vector<double>& data() const { return data_; }

  /// Number of duplicate rows dropped while loading (0 for built spaces).
  std::size_t duplicates_skipped() const { return duplicates_skipped_; }

  std::optional<std::size_t> find(const std::string& w) const {
    auto it = index_.find(w);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(const std::string& w) const { return index_.count(w) != 0; }

  ConstVectorView row(std::size_t i) const {
    return ConstVectorView(data_.data() + i * dim_, dim_);
  }

  ConstVectorView vector(const std::string& w) const {
    auto i = find(w);
    if (!i) throw ValidationError("word '" + w + "' not in " + describe() + " vocabulary");
    return row(*i);
  }

  ConstRowMatrixMap matrix() const {
    return ConstRowMatrixMap(data_.data(), static_cast<Eigen::Index>(words_.size()),
                             static_cast<Eigen::Index>(dim_));
  }

  /// Copy of this space with the listed rows replaced. Words must exist.
  EmbeddingSpace with_replaced(const std::vector<std::pair<std::string, Vector>>& updates) const {
    std::vector<double> data = data_;
    bool still_unit = normalized_;
    for (const auto& [w, v] : updates) {
      auto i = find(w);
      if (!i) throw ValidationError("cannot replace unknown word '" + w + "'");
      if (v.size() != dim_) throw ValidationError("replacement for '" + w + "' has wrong dimension");
      std::copy(v.begin(), v.end(), data.begin() + static_cast<std::ptrdiff_t>(*i * dim_));
      if (still_unit && std::abs(norm(v) - 1.0) > 1e-6) still_unit = false;
    }
    return EmbeddingSpace(words_, std::move(data), dim_, language_tag_, still_unit);
  }

  EmbeddingSpace with_language_tag(std::string tag) const {
    EmbeddingSpace copy = *this;
    copy.language_tag_ = std::move(tag);
    return copy;
  }

  void set_duplicates_skipped(std::size_t n) { duplicates_skipped_ = n; }

 private:
  std::string describe() const {
    return language_tag_.empty() ? std::string("embedding") : "'" + language_tag_ + "'";
  }

  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
  std::string language_tag_;
  bool normalized_ = false;
  std::size_t duplicates_skipped_ = 0;
};

/// Two spaces co-embedded in one coordinate system: a gendered source
/// language and English.
struct BilingualSpace {
  EmbeddingSpace source;
  EmbeddingSpace target;

  BilingualSpace(EmbeddingSpace src, EmbeddingSpace tgt)
      : source(std::move(src)), target(std::move(tgt)) {
    if (source.dim() != target.dim()) {
      throw ValidationError("bilingual spaces disagree on dimension: " +
                            std::to_string(source.dim()) + " vs " + std::to_string(target.dim()));
    }
  }

  std::size_t shared_dim() const { return source.dim(); }
};

struct Neighbor {
  std::string word;
  double score = 0.0;
  std::size_t rank = 0;
};

using WordSet = std::set<std::string>;

namespace detail {

inline std::string_view rstrip(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  if (token.empty()) return false;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace detail

/// Reads the "<count> <dim>" header text format (fastText/MUSE .vec).
/// Duplicate words keep their first occurrence; the count is recorded on the
/// returned space.
inline EmbeddingSpace load_text_embeddings(const std::filesystem::path& path,
                                           std::optional<std::size_t> max_words = std::nullopt,
                                           std::string language_tag = {}) {
  if (max_words && *max_words == 0) throw ValidationError("max_words must be positive");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embeddings file " + path.string());

  const std::string where = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(where + ": missing header line");
  std::string_view header = detail::rstrip(line);
  const auto sp = header.find(' ');
  std::size_t count = 0;
  std::size_t dim = 0;
  if (sp == std::string_view::npos || !detail::parse_number(header.substr(0, sp), count) ||
      !detail::parse_number(header.substr(sp + 1), dim) || dim == 0) {
    throw ValidationError(where + ": malformed header '" + std::string(header) + "'");
  }
  if (count == 0) throw ValidationError(where + ": empty vocabulary");

  const std::size_t limit = max_words ? std::min(count, *max_words) : count;
  std::vector<std::string> words;
  std::vector<double> data;
  std::unordered_map<std::string, std::size_t> seen;
  words.reserve(limit);
  data.reserve(limit * dim);
  std::size_t duplicates = 0;
  std::size_t line_no = 1;

  for (std::size_t read = 0; read < count && words.size() < limit; ++read) {
    if (!std::getline(in, line)) {
      if (in.bad()) throw IoError(where + ": read failure");
      throw ValidationError(where + ": header promises " + std::to_string(count) +
                            " rows but file ended after " + std::to_string(read));
    }
    ++line_no;
    std::string_view rest = detail::rstrip(line);
    const auto word_end = rest.find(' ');
    if (word_end == 0 || word_end == std::string_view::npos) {
      throw ValidationError(where + ":" + std::to_string(line_no) + ": wrong component count");
    }
    std::string word(rest.substr(0, word_end));
    rest.remove_prefix(word_end + 1);

    const std::size_t row_start = data.size();
    std::size_t components = 0;
    while (!rest.empty()) {
      const auto next = rest.find(' ');
      const std::string_view token = rest.substr(0, next);
      double value = 0.0;
      if (!detail::parse_number(token, value)) {
        throw ValidationError(where + ":" + std::to_string(line_no) + ": bad component '" +
                              std::string(token) + "'");
      }
      if (!std::isfinite(value)) {
        throw ValidationError(where + ":" + std::to_string(line_no) + ": non-finite component");
      }
      data.push_back(value);
      ++components;
      if (next == std::string_view::npos) break;
      rest.remove_prefix(next + 1);
    }
    if (components != dim) {
      throw ValidationError(where + ":" + std::to_string(line_no) + ": wrong component count (" +
                            std::to_string(components) + ", expected " + std::to_string(dim) + ")");
    }
    if (!seen.emplace(word, words.size()).second) {
      ++duplicates;
      data.resize(row_start);
      continue;
    }
    words.push_back(std::move(word));
  }
  if (words.empty()) throw ValidationError(where + ": empty vocabulary");
  if (duplicates > 0) {
    warn(where + ": skipped " + std::to_string(duplicates) + " duplicate word(s)");
  }
  EmbeddingSpace space(std::move(words), std::move(data), dim, std::move(language_tag));
  space.set_duplicates_skipped(duplicates);
  return space;
}

/// Writes the text format with shortest round-trip decimal components.
inline void save_text_embeddings(const EmbeddingSpace& space, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << space.size() << ' ' << space.dim() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < space.size(); ++i) {
    out << space.word(i);
    for (double v : space.row(i)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      out << ' ';
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

inline EmbeddingSpace unit_normalize(const EmbeddingSpace& space) {
  std::vector<double> data(space.data().size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto r = space.row(i);
    const double n = norm(r);
    if (n == 0.0) {
      throw ValidationError("cannot normalize zero vector for word '" + space.word(i) + "'");
    }
    for (std::size_t j = 0; j < space.dim(); ++j) data[i * space.dim() + j] = r[j] / n;
  }
  EmbeddingSpace out(space.words(), std::move(data), space.dim(), space.language_tag(), true);
  out.set_duplicates_skipped(space.duplicates_skipped());
  return out;
}

/// Cosine of `query` against every row, in row order.
inline std::vector<double> cosine_scores(ConstVectorView query, const EmbeddingSpace& space) {
  if (query.size() != space.dim()) {
    throw ValidationError("query dimension " + std::to_string(query.size()) +
                          " does not match space dimension " + std::to_string(space.dim()));
  }
  const double qn = norm(query);
  if (qn == 0.0) throw ValidationError("cosine of a zero query vector");
  Eigen::Map<const Eigen::VectorXd> q(query.data(), static_cast<Eigen::Index>(query.size()));
  const auto m = space.matrix();
  Eigen::VectorXd dots = m * q;
  Eigen::VectorXd norms = m.rowwise().norm();
  std::vector<double> scores(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const double rn = norms[static_cast<Eigen::Index>(i)];
    if (rn == 0.0) throw ValidationError("zero vector for word '" + space.word(i) + "'");
    scores[i] = std::clamp(dots[static_cast<Eigen::Index>(i)] / (qn * rn), -1.0, 1.0);
  }
  return scores;
}

/// Orders candidates by descending score, ties by ascending word (bytewise).
inline std::vector<Neighbor> top_k_by_scores(const std::vector<double>& scores,
                                             const EmbeddingSpace& space, std::size_t k,
                                             const WordSet& exclude) {
  if (k == 0) throw ValidationError("k must be positive");
  if (scores.size() != space.size()) throw ValidationError("score vector does not match space");
  std::vector<std::size_t> candidates;
  candidates.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (!exclude.count(space.word(i))) candidates.push_back(i);
  }
  if (candidates.empty()) throw ValidationError("no candidates left after exclusion");
  const std::size_t take = std::min(k, candidates.size());
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return space.word(a) < space.word(b);
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end(), better);
  std::vector<Neighbor> out;
  out.reserve(take);
  for (std::size_t r = 0; r < take; ++r) {
    out.push_back({space.word(candidates[r]), scores[candidates[r]], r + 1});
  }
  return out;
}

/// Exact brute-force cosine nearest neighbours.
inline std::vector<Neighbor> top_k(ConstVectorView query, const EmbeddingSpace& space,
                                   std::size_t k, const WordSet& exclude = {}) {
  if (k == 0) throw ValidationError("k must be positive");
  return top_k_by_scores(cosine_scores(query, space), space, k, exclude);
}

}  // namespace gbias
