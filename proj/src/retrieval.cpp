#include "losemb/retrieval.hpp"

#include <algorithm>
#include <string>

#include "losemb/error.hpp"
#include "losemb/similarity.hpp"

namespace losemb {

void RetrievalConfig::validate() const {
  if (similar_instructions == 0 || top_k == 0 || candidate_instructions == 0) {
    throw ValidationError("retrieval needs T, K and I of at least 1");
  }
}

LogicalConstraint logical_constraint(std::span<const double> query_text,
                                     const AlignedIndex& index, unsigned similar_instructions) {
  if (similar_instructions == 0) throw ValidationError("T must be at least 1");
  if (query_text.size() != index.dim()) {
    throw ValidationError("query has dimension " + std::to_string(query_text.size()) +
                          ", index has " + std::to_string(index.dim()));
  }
  const double q_sq = dot(query_text, query_text);
  std::vector<Scored> scored(index.instruction_pool_size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    scored[i] = {static_cast<std::uint32_t>(i),
                 cosine_with_sq_norms(query_text, q_sq, index.pool_instruction_text(i),
                                      index.pool_instruction_sq_norm(i))};
  }
  LogicalConstraint out;
  out.instructions = top_k(std::move(scored), similar_instructions);
  for (const auto& s : out.instructions) {
    auto tools = index.pool_instruction_tools(s.index);
    out.tools.insert(out.tools.end(), tools.begin(), tools.end());
  }
  std::sort(out.tools.begin(), out.tools.end());
  out.tools.erase(std::unique(out.tools.begin(), out.tools.end()), out.tools.end());
  return out;
}

AlignedEmbedding embed_query(std::span<const double> query_text, const AlignedIndex& index,
                             unsigned candidate_instructions) {
  return align_unseen_instruction(query_text, index, candidate_instructions);
}

RankedList rank_tools(std::span<const double> query, std::span<const std::uint32_t> candidates,
                      const AlignedIndex& index, unsigned top_k_count, ToolSpace space) {
  if (candidates.empty()) throw ValidationError("rank_tools needs at least one candidate");
  if (top_k_count == 0) throw ValidationError("K must be at least 1");
  const double q_sq = dot(query, query);
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (std::uint32_t t : candidates) {
    if (t >= index.repository_size()) throw ValidationError("candidate tool out of range");
    const bool use_text = space == ToolSpace::Text ||
                          (space == ToolSpace::GraphSeenTextUnseen && index.is_unseen_tool(t));
    const double s = use_text
                         ? cosine_with_sq_norms(query, q_sq, index.tool_text(t),
                                                index.tool_text_sq_norm(t))
                         : cosine_with_sq_norms(query, q_sq, index.tool_graph(t),
                                                index.tool_graph_sq_norm(t));
    scored.push_back({t, s});
  }
  RankedList out;
  out.fewer_than_k = top_k_count > candidates.size();
  for (const auto& s : top_k(std::move(scored), top_k_count)) out.ranked.push_back({s.index, s.score});
  return out;
}

RetrievalResult retrieve(const std::string& query_id, std::span<const double> query_text,
                         const AlignedIndex& index, const RetrievalConfig& config) {
  config.validate();
  if (index.repository_size() == 0) throw ValidationError("tool repository is empty");
  const auto& ab = config.ablations;

  RetrievalResult out;
  out.query_id = query_id;
  std::vector<std::uint32_t> everything(index.repository_size());
  for (std::size_t t = 0; t < everything.size(); ++t) everything[t] = static_cast<std::uint32_t>(t);

  if (ab.disable_relational_constraint) {
    out.candidate_set = everything;
  } else {
    out.candidate_set = logical_constraint(query_text, index, config.similar_instructions).tools;
    if (out.candidate_set.empty()) {
      out.flags.constraint_fallback = true;
      out.candidate_set = everything;
    }
  }

  std::vector<double> query;
  ToolSpace space = ToolSpace::Graph;
  if (ab.disable_instruction_transfer) {
    query.assign(query_text.begin(), query_text.end());
    space = ToolSpace::Text;
  } else {
    auto aligned = embed_query(query_text, index, config.candidate_instructions);
    query = std::move(aligned.graph);
    out.flags.alignment_fallback = aligned.fallback;
    if (ab.disable_tool_transfer) space = ToolSpace::GraphSeenTextUnseen;
  }

  auto ranked = rank_tools(query, out.candidate_set, index, config.top_k, space);
  out.ranked = std::move(ranked.ranked);
  out.flags.fewer_than_k = ranked.fewer_than_k;
  return out;
}

std::vector<RankedTool> flat_cosine_retrieve(std::span<const double> query,
                                             const EmbeddingMatrix& tools, unsigned top_k_count) {
  std::vector<Scored> scored(tools.rows());
  for (std::size_t t = 0; t < tools.rows(); ++t) {
    scored[t] = {static_cast<std::uint32_t>(t), cosine_similarity(query, tools.row(t))};
  }
  std::vector<RankedTool> out;
  for (const auto& s : top_k(std::move(scored), top_k_count)) out.push_back({s.index, s.score});
  return out;
}

}  // namespace losemb
