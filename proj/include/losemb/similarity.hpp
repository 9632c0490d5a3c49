#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace losemb {

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);

/// Cosine similarity clamped to [-1, 1]; zero when either norm is zero.
/// Throws ValidationError on dimension mismatch.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Same as cosine_similarity given precomputed squared norms dot(a,a), dot(b,b).
double cosine_with_sq_norms(std::span<const double> a, double sq_norm_a,
                            std::span<const double> b, double sq_norm_b);

struct Scored {
  std::uint32_t index = 0;
  double score = 0.0;

  friend bool operator==(const Scored&, const Scored&) = default;
};

/// Highest-scoring `k` entries, score descending then index ascending.
std::vector<Scored> top_k(std::vector<Scored> items, std::size_t k);

}  // namespace losemb
