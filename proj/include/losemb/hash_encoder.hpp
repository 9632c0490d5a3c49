#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace losemb {

inline constexpr std::size_t kMinHashDim = 8;

/// Deterministic text embedding without a model: ASCII-lowercased text is
/// padded with one space on each side, every character trigram is hashed
/// into one of `dim` buckets with a hash-derived sign, and the result is
/// L2-normalized. Empty text maps to the zero vector. Throws
/// ValidationError when dim < 8.
std::vector<double> hash_encoder(std::string_view text, std::size_t dim);

}  // namespace losemb
