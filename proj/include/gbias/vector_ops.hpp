#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gbias/error.hpp"

namespace gbias {

using Vector = std::vector<double>;
using ConstVectorView = std::span<const double>;

inline void require_same_dim(ConstVectorView a, ConstVectorView b) {
  if (a.size() != b.size()) {
    throw ValidationError("dimension mismatch: " + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()));
  }
}

inline double dot(ConstVectorView a, ConstVectorView b) {
  require_same_dim(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm(ConstVectorView a) { return std::sqrt(dot(a, a)); }

/// Cosine similarity clamped to [-1, 1]. Zero vectors are rejected.
inline double cosine(ConstVectorView a, ConstVectorView b) {
  require_same_dim(a, b);
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw ValidationError("cosine of a zero vector");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

inline Vector to_vector(ConstVectorView a) { return Vector(a.begin(), a.end()); }

/// a + alpha * b
inline Vector add_scaled(ConstVectorView a, double alpha, ConstVectorView b) {
  require_same_dim(a, b);
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + alpha * b[i];
  return out;
}

inline Vector normalized(ConstVectorView a) {
  const double n = norm(a);
  if (n == 0.0) throw ValidationError("cannot normalize a zero vector");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] / n;
  return out;
}

}  // namespace gbias
