#include "losemb/hash_encoder.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "losemb/error.hpp"

namespace losemb {

namespace {

// FNV-1a followed by the murmur3 finalizer so low bits and the sign bit mix.
std::uint64_t trigram_hash(const char* p) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int i = 0; i < 3; ++i) {
    h ^= static_cast<unsigned char>(p[i]);
    h *= 0x100000001b3ULL;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  return h;
}

}  // namespace

std::vector<double> hash_encoder(std::string_view text, std::size_t dim) {
  if (dim < kMinHashDim) {
    throw ValidationError("hash encoder dimension must be at least " +
                          std::to_string(kMinHashDim));
  }
  std::vector<double> v(dim, 0.0);
  if (text.empty()) return v;

  std::string padded;
  padded.reserve(text.size() + 2);
  padded.push_back(' ');
  for (char c : text) {
    padded.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
  }
  padded.push_back(' ');

  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    const std::uint64_t h = trigram_hash(padded.data() + i);
    v[h % dim] += (h >> 63) ? -1.0 : 1.0;
  }
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : v) x *= inv;
  }
  return v;
}

}  // namespace losemb
