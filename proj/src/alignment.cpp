#include "losemb/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "losemb/error.hpp"
#include "losemb/similarity.hpp"

namespace losemb {

CandidateInstructionSet find_candidate_instructions(std::span<const double> query_text,
                                                    const AlignedIndex& index, unsigned count) {
  if (count == 0) throw ValidationError("candidate instruction count must be at least 1");
  const std::uint32_t n = index.num_training_instructions();
  if (n == 0) throw ValidationError("index has no training instructions");
  if (query_text.size() != index.dim()) {
    throw ValidationError("query has dimension " + std::to_string(query_text.size()) +
                          ", index has " + std::to_string(index.dim()));
  }
  const double q_sq = dot(query_text, query_text);
  std::vector<Scored> scored(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    scored[i] = {i, cosine_with_sq_norms(query_text, q_sq, index.training_instruction_text(i),
                                         index.pool_instruction_sq_norm(i))};
  }
  CandidateInstructionSet out;
  for (const auto& s : top_k(std::move(scored), count)) out.push_back({s.index, s.score});
  return out;
}

CandidateToolSet collect_candidate_tools(const CandidateInstructionSet& candidates,
                                         const LogicalGraph& graph) {
  std::map<std::uint32_t, std::uint32_t> counts;
  for (const auto& c : candidates) {
    if (c.instruction >= graph.num_instructions()) {
      throw ValidationError("candidate instruction " + std::to_string(c.instruction) +
                            " is not in the graph");
    }
    for (std::uint32_t t : graph.tools_of(c.instruction)) ++counts[t];
  }
  if (counts.empty()) throw NoTransferableCandidates();
  CandidateToolSet out;
  for (auto [tool, count] : counts) {
    out.entries.push_back({tool, count});
    out.total_frequency += count;
  }
  return out;
}

std::vector<WeightedNode> frequency_weights(const CandidateToolSet& tools) {
  if (tools.entries.empty() || tools.total_frequency == 0) {
    throw ValidationError("frequency weights of an empty candidate tool set");
  }
  const double total = static_cast<double>(tools.total_frequency);
  std::vector<WeightedNode> out;
  out.reserve(tools.entries.size());
  for (const auto& e : tools.entries) out.push_back({e.tool, static_cast<double>(e.count) / total});
  return out;
}

std::vector<WeightedNode> softmax_weights(const CandidateInstructionSet& candidates) {
  if (candidates.empty()) throw ValidationError("softmax weights of an empty candidate set");
  // Scores are cosines in [-1, 1]; exp() cannot overflow.
  std::vector<double> e;
  e.reserve(candidates.size());
  double sum = 0.0;
  for (const auto& c : candidates) {
    e.push_back(std::exp(c.score));
    sum += e.back();
  }
  std::vector<WeightedNode> out;
  out.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out.push_back({candidates[i].instruction, e[i] / sum});
  }
  return out;
}

namespace {

std::vector<double> transfer(std::span<const double> text, std::span<const WeightedNode> weights,
                             const EmbeddingMatrix& features, const LogicalGraph& graph,
                             NodeKind kind) {
  if (text.size() != features.dim()) {
    throw ValidationError("text embedding has dimension " + std::to_string(text.size()) +
                          ", features have " + std::to_string(features.dim()));
  }
  const std::uint32_t limit = kind == NodeKind::Tool ? graph.num_tools() : graph.num_instructions();
  std::vector<double> acc(text.size(), 0.0);
  for (const auto& w : weights) {
    if (w.index >= limit) throw ValidationError("transfer weight references a missing node");
    auto delta = features.row(graph.node_id({kind, w.index}));
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += w.weight * delta[c];
  }
  std::vector<double> out(text.begin(), text.end());
  // Skipping exact zeros keeps a zero transfer bit-identical to the text (-0.0 + 0.0 is +0.0).
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (acc[c] != 0.0) out[c] += acc[c];
  }
  return out;
}

}  // namespace

std::vector<double> transfer_tool_embedding(std::span<const double> text,
                                            std::span<const WeightedNode> weights,
                                            const EmbeddingMatrix& features,
                                            const LogicalGraph& graph) {
  return transfer(text, weights, features, graph, NodeKind::Tool);
}

std::vector<double> transfer_instruction_embedding(std::span<const double> text,
                                                   std::span<const WeightedNode> weights,
                                                   const EmbeddingMatrix& features,
                                                   const LogicalGraph& graph) {
  return transfer(text, weights, features, graph, NodeKind::Instruction);
}

AlignedEmbedding align_unseen_tool(const UnseenNodeSpec& spec, const AlignedIndex& index,
                                   unsigned candidate_instructions) {
  AlignedEmbedding out;
  if (index.num_training_instructions() == 0 || spec.associated_instruction_embeddings.empty()) {
    out.graph = spec.text_embedding;
    out.fallback = true;
    return out;
  }
  // Several associated instructions: union of their candidate sets, keeping
  // each instruction once with its best score.
  std::map<std::uint32_t, double> best;
  for (const auto& bridge : spec.associated_instruction_embeddings) {
    for (const auto& c : find_candidate_instructions(bridge, index, candidate_instructions)) {
      auto [it, inserted] = best.emplace(c.instruction, c.score);
      if (!inserted) it->second = std::max(it->second, c.score);
    }
  }
  std::vector<Scored> merged;
  for (auto [i, s] : best) merged.push_back({i, s});
  for (const auto& s : top_k(std::move(merged), best.size())) {
    out.instructions.push_back({s.index, s.score});
  }

  try {
    out.weights = frequency_weights(collect_candidate_tools(out.instructions, index.graph()));
  } catch (const NoTransferableCandidates&) {
    out.graph = spec.text_embedding;
    out.fallback = true;
    return out;
  }
  out.graph = transfer_tool_embedding(spec.text_embedding, out.weights, index.features(),
                                      index.graph());
  return out;
}

AlignedEmbedding align_unseen_instruction(std::span<const double> text,
                                          const AlignedIndex& index,
                                          unsigned candidate_instructions) {
  AlignedEmbedding out;
  if (index.num_training_instructions() == 0) {
    out.graph.assign(text.begin(), text.end());
    out.fallback = true;
    return out;
  }
  out.instructions = find_candidate_instructions(text, index, candidate_instructions);
  out.weights = softmax_weights(out.instructions);
  out.graph = transfer_instruction_embedding(text, out.weights, index.features(), index.graph());
  return out;
}

}  // namespace losemb
