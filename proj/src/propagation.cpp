#include "losemb/propagation.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "losemb/error.hpp"
#include "losemb/parallel.hpp"

namespace losemb {

PropagationConfig PropagationConfig::uniform(unsigned num_layers) {
  return PropagationConfig(num_layers, std::vector<double>(num_layers + 1, 1.0));
}

PropagationConfig::PropagationConfig(unsigned num_layers, std::vector<double> coefficients)
    : num_layers_(num_layers), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != std::size_t{num_layers_} + 1) {
    throw ValidationError("expected " + std::to_string(num_layers_ + 1) +
                          " layer coefficients, got " + std::to_string(coefficients_.size()));
  }
  double sum = 0.0;
  for (double c : coefficients_) {
    if (!std::isfinite(c) || c < 0.0) {
      throw ValidationError("layer coefficients must be finite and non-negative");
    }
    sum += c;
  }
  if (sum <= 0.0) throw ValidationError("layer coefficients must not all be zero");
  for (double& c : coefficients_) c /= sum;
}

PropagationConfig PropagationConfig::from_normalized(unsigned num_layers,
                                                   std::vector<double> coefficients) {
  const PropagationConfig check(num_layers, coefficients);
  double sum = 0.0;
  for (double c : coefficients) sum += c;
  if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("stored layer coefficients do not sum to 1");
  PropagationConfig out;
  out.num_layers_ = num_layers;
  out.coefficients_ = std::move(coefficients);
  return out;
}

std::vector<EmbeddingMatrix> propagate(const SparseMatrix& adj_norm, const EmbeddingMatrix& h0,
                                       unsigned num_layers, unsigned threads) {
  if (adj_norm.size != h0.rows()) {
    throw ValidationError("adjacency has side " + std::to_string(adj_norm.size) +
                          " but embeddings have " + std::to_string(h0.rows()) + " rows");
  }
  std::vector<EmbeddingMatrix> layers;
  layers.reserve(num_layers + 1);
  layers.push_back(h0);
  const std::size_t dim = h0.dim();
  for (unsigned k = 0; k < num_layers; ++k) {
    const EmbeddingMatrix& prev = layers.back();
    EmbeddingMatrix next(h0.rows(), dim);
    parallel_for(h0.rows(), threads, [&](std::size_t r) {
      auto out = next.row(r);
      for (std::size_t e = adj_norm.offsets[r]; e < adj_norm.offsets[r + 1]; ++e) {
        const double w = adj_norm.values[e];
        auto in = prev.row(adj_norm.columns[e]);
        for (std::size_t c = 0; c < dim; ++c) out[c] += w * in[c];
      }
    });
    layers.push_back(std::move(next));
  }
  return layers;
}

EmbeddingMatrix merge_layers(std::span<const EmbeddingMatrix> layers,
                             std::span<const double> coefficients) {
  if (layers.empty()) throw ValidationError("merge_layers needs at least one layer");
  if (layers.size() != coefficients.size()) {
    throw ValidationError("merge_layers got " + std::to_string(layers.size()) + " layers but " +
                          std::to_string(coefficients.size()) + " coefficients");
  }
  for (const auto& l : layers) {
    if (!l.same_shape(layers.front())) throw ValidationError("merge_layers shape mismatch");
  }
  EmbeddingMatrix out(layers.front().rows(), layers.front().dim());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto dst = out.row(r);
    for (std::size_t k = 0; k < layers.size(); ++k) {
      auto src = layers[k].row(r);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += coefficients[k] * src[c];
    }
  }
  return out;
}

EmbeddingMatrix distill_features(const EmbeddingMatrix& merged, const EmbeddingMatrix& h0) {
  if (!merged.same_shape(h0)) throw ValidationError("distill_features shape mismatch");
  EmbeddingMatrix out(h0.rows(), h0.dim());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto a = merged.row(r);
    auto b = h0.row(r);
    auto d = out.row(r);
    for (std::size_t c = 0; c < d.size(); ++c) d[c] = a[c] - b[c];
  }
  return out;
}

EmbeddingMatrix compose_graph_embeddings(const EmbeddingMatrix& h0,
                                         const EmbeddingMatrix& features) {
  if (!features.same_shape(h0)) throw ValidationError("compose_graph_embeddings shape mismatch");
  EmbeddingMatrix out(h0.rows(), h0.dim());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto t = h0.row(r);
    auto f = features.row(r);
    auto g = out.row(r);
    for (std::size_t c = 0; c < g.size(); ++c) g[c] = t[c] + f[c];
  }
  return out;
}

LogicalFeatures extract_logical_features(const LogicalGraph& graph, const EmbeddingMatrix& h0,
                                         const PropagationConfig& config, unsigned threads) {
  const auto layers = propagate(normalized_adjacency(graph), h0, config.num_layers(), threads);
  LogicalFeatures out;
  out.merged = merge_layers(layers, config.coefficients());
  out.features = distill_features(out.merged, h0);
  out.graph = compose_graph_embeddings(h0, out.features);
  return out;
}

}  // namespace losemb
