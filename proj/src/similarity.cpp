#include "losemb/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "losemb/error.hpp"

namespace losemb {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine_with_sq_norms(std::span<const double> a, double sq_norm_a,
                            std::span<const double> b, double sq_norm_b) {
  if (a.size() != b.size()) {
    throw ValidationError("cosine of vectors with dimensions " + std::to_string(a.size()) +
                          " and " + std::to_string(b.size()));
  }
  if (sq_norm_a == 0.0 || sq_norm_b == 0.0) return 0.0;
  // sqrt(x*x) == x, so identical vectors score exactly 1.
  return std::clamp(dot(a, b) / std::sqrt(sq_norm_a * sq_norm_b), -1.0, 1.0);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("cosine of vectors with dimensions " + std::to_string(a.size()) +
                          " and " + std::to_string(b.size()));
  }
  return cosine_with_sq_norms(a, dot(a, a), b, dot(b, b));
}

std::vector<Scored> top_k(std::vector<Scored> items, std::size_t k) {
  auto better = [](const Scored& x, const Scored& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.index < y.index;
  };
  k = std::min(k, items.size());
  std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(k), items.end(),
                    better);
  items.resize(k);
  return items;
}

}  // namespace losemb
