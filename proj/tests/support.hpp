// Independent reference implementations and random generators for tests.
// Oracles use dense matrices, full sorts and plain loops; none of them call
// into the code they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "losemb/aligned_index.hpp"
#include "losemb/embedding_matrix.hpp"
#include "losemb/graph.hpp"
#include "losemb/random.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(std::size_t r, std::size_t c) { return Dense(r, std::vector<double>(c, 0.0)); }

inline Dense to_dense(const losemb::EmbeddingMatrix& m) {
  Dense out = zeros(m.rows(), m.dim());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.dim(); ++c) out[r][c] = m(r, c);
  return out;
}

// 0/1 adjacency over [instructions | tools] straight from the pair list.
inline Dense adjacency(const std::vector<losemb::Interaction>& pairs, std::size_t n, std::size_t m) {
  Dense a = zeros(n + m, n + m);
  for (const auto& p : pairs) {
    a[p.instruction][n + p.tool] = 1.0;
    a[n + p.tool][p.instruction] = 1.0;
  }
  return a;
}

inline Dense normalize(const Dense& a) {
  const std::size_t n = a.size();
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i] += a[i][j];
  Dense out = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (a[i][j] != 0.0) out[i][j] = a[i][j] / std::sqrt(d[i]) / std::sqrt(d[j]);
  return out;
}

inline Dense matmul(const Dense& a, const Dense& b) {
  Dense out = zeros(a.size(), b.empty() ? 0 : b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < out[i].size(); ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

// [H0, A H0, A^2 H0, ...] by repeated dense products.
inline std::vector<Dense> propagate(const Dense& a_norm, const Dense& h0, unsigned layers) {
  std::vector<Dense> out{h0};
  for (unsigned k = 0; k < layers; ++k) out.push_back(matmul(a_norm, out.back()));
  return out;
}

inline Dense merge(const std::vector<Dense>& layers, const std::vector<double>& alpha) {
  Dense out = zeros(layers[0].size(), layers[0].empty() ? 0 : layers[0][0].size());
  for (std::size_t k = 0; k < layers.size(); ++k)
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t j = 0; j < out[i].size(); ++j) out[i][j] += alpha[k] * layers[k][i][j];
  return out;
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0 || bb == 0) return 0.0;
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

struct Ranked {
  std::uint32_t index;
  double score;
};

// Full stable sort: score descending, ties keep ascending index order.
inline std::vector<Ranked> argsort(const std::vector<double>& scores,
                                   const std::vector<std::uint32_t>& ids, std::size_t k) {
  std::vector<Ranked> all;
  for (std::size_t i = 0; i < ids.size(); ++i) all.push_back({ids[i], scores[i]});
  std::sort(all.begin(), all.end(), [](const Ranked& a, const Ranked& b) { return a.index < b.index; });
  std::stable_sort(all.begin(), all.end(),
                   [](const Ranked& a, const Ranked& b) { return a.score > b.score; });
  if (all.size() > k) all.resize(k);
  return all;
}

// Per-tool count of adjacent instructions among `instructions`, by scanning pairs.
inline std::vector<std::uint32_t> tool_counts(const std::vector<losemb::Interaction>& pairs,
                                              const std::set<std::uint32_t>& instructions,
                                              std::size_t num_tools) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> unique;
  for (const auto& p : pairs) unique.insert({p.instruction, p.tool});
  std::vector<std::uint32_t> counts(num_tools, 0);
  for (const auto& [i, t] : unique)
    if (instructions.count(i)) ++counts[t];
  return counts;
}

inline double recall(const std::vector<std::string>& ranked, const std::set<std::string>& relevant,
                     std::size_t k) {
  std::set<std::string> hit;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i)
    if (relevant.count(ranked[i])) hit.insert(ranked[i]);
  return static_cast<double>(hit.size()) / static_cast<double>(relevant.size());
}

inline double precision(const std::vector<std::string>& ranked,
                        const std::set<std::string>& relevant, std::size_t k) {
  std::set<std::string> hit;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i)
    if (relevant.count(ranked[i])) hit.insert(ranked[i]);
  return static_cast<double>(hit.size()) / static_cast<double>(k);
}

// KL(N(mu1, var1) || N(mu0, var0)) in one dimension.
inline double gaussian_kl(double mu1, double var1, double mu0, double var0) {
  return 0.5 * (std::log(var0 / var1) + (var1 + (mu1 - mu0) * (mu1 - mu0)) / var0 - 1.0);
}

}  // namespace oracle

namespace gen {

inline std::vector<double> vec(losemb::Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (auto& x : v) x = rng.uniform() * 2.0 - 1.0;
  return v;
}

inline losemb::EmbeddingMatrix matrix(losemb::Rng& rng, std::size_t rows, std::size_t dim) {
  std::vector<double> v(rows * dim);
  for (auto& x : v) x = rng.uniform() * 2.0 - 1.0;
  return losemb::EmbeddingMatrix(rows, dim, std::move(v));
}

inline std::vector<losemb::Interaction> pairs(losemb::Rng& rng, std::uint32_t n, std::uint32_t m,
                                              std::size_t count) {
  std::vector<losemb::Interaction> out;
  if (n == 0 || m == 0) return out;
  for (std::size_t e = 0; e < count; ++e) {
    out.push_back({static_cast<std::uint32_t>(rng.below(n)), static_cast<std::uint32_t>(rng.below(m))});
  }
  return out;
}

inline std::vector<std::string> ids(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// Training index over a random graph with random text embeddings.
inline losemb::AlignedIndex index(losemb::Rng& rng, std::uint32_t n, std::uint32_t m,
                                  std::size_t edges, std::size_t dim, unsigned layers = 3) {
  auto g = losemb::build_graph(pairs(rng, n, m, edges), n, m);
  return losemb::AlignedIndex::build(std::move(g), matrix(rng, std::size_t{n} + m, dim),
                                     ids("q", n), ids("t", m),
                                     losemb::PropagationConfig::uniform(layers));
}

}  // namespace gen
