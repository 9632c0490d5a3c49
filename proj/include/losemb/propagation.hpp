#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "losemb/embedding_matrix.hpp"
#include "losemb/graph.hpp"

namespace losemb {

/// Number of propagation layers and the weight of each layer in the merge.
class PropagationConfig {
 public:
  static constexpr unsigned kDefaultLayers = 3;

  /// Uniform weights 1/(K+1).
  static PropagationConfig uniform(unsigned num_layers = kDefaultLayers);

  /// `coefficients` must have num_layers+1 non-negative entries with a
  /// positive sum; they are normalized to sum to one.
  PropagationConfig(unsigned num_layers, std::vector<double> coefficients);

  /// Restores stored coefficients verbatim; they must already sum to one
  /// within 1e-12.
  static PropagationConfig from_normalized(unsigned num_layers, std::vector<double> coefficients);

  unsigned num_layers() const { return num_layers_; }
  std::span<const double> coefficients() const { return coefficients_; }

 private:
  PropagationConfig() = default;

  unsigned num_layers_ = 0;
  std::vector<double> coefficients_;
};

/// Returns [H0, A H0, A^2 H0, ..., A^K H0] for the normalized adjacency A.
/// Rows are reduced in ascending neighbor order, so the result does not
/// depend on `threads`.
std::vector<EmbeddingMatrix> propagate(const SparseMatrix& adj_norm, const EmbeddingMatrix& h0,
                                       unsigned num_layers, unsigned threads = 1);

/// Elementwise sum of coefficient-weighted layers.
EmbeddingMatrix merge_layers(std::span<const EmbeddingMatrix> layers,
                             std::span<const double> coefficients);

/// Logical features: merged minus text embeddings, elementwise.
EmbeddingMatrix distill_features(const EmbeddingMatrix& merged, const EmbeddingMatrix& h0);

/// text + features, elementwise. This is the graph embedding the index
/// stores, so text + features reproduces it exactly.
EmbeddingMatrix compose_graph_embeddings(const EmbeddingMatrix& h0,
                                         const EmbeddingMatrix& features);

struct LogicalFeatures {
  EmbeddingMatrix merged;    // layer-weighted sum
  EmbeddingMatrix features;  // merged - text
  EmbeddingMatrix graph;     // text + features
};

/// Full extraction: normalize, propagate, merge, distill, compose.
LogicalFeatures extract_logical_features(const LogicalGraph& graph, const EmbeddingMatrix& h0,
                                         const PropagationConfig& config, unsigned threads = 1);

}  // namespace losemb
