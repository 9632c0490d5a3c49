#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "losemb/aligned_index.hpp"
#include "losemb/alignment.hpp"
#include "losemb/embedding_matrix.hpp"
#include "losemb/similarity.hpp"

namespace losemb {

/// Switches reproducing the three ablation variants.
struct Ablations {
  /// Rank with the query's text embedding. The query then lives in text
  /// space, so tools are compared through their text embeddings too.
  bool disable_instruction_transfer = false;
  /// Unseen tools are ranked through their text embeddings.
  bool disable_tool_transfer = false;
  /// Rank over the whole repository instead of the logical candidate set.
  bool disable_relational_constraint = false;

  static Ablations all() { return {true, true, true}; }
};

struct RetrievalConfig {
  unsigned similar_instructions = 5;  // T
  unsigned top_k = 3;                 // K
  unsigned candidate_instructions = kDefaultCandidateInstructions;  // I
  Ablations ablations;

  /// Throws ValidationError unless T, K, I >= 1.
  void validate() const;
};

struct RankedTool {
  std::uint32_t tool = 0;  // repository index
  double score = 0.0;

  friend bool operator==(const RankedTool&, const RankedTool&) = default;
};

struct RetrievalFlags {
  bool constraint_fallback = false;  // empty logical candidate set; ranked everything
  bool alignment_fallback = false;   // query embedding fell back to text
  bool fewer_than_k = false;         // K exceeded the candidate count

  friend bool operator==(const RetrievalFlags&, const RetrievalFlags&) = default;
};

struct RetrievalResult {
  std::string query_id;
  std::vector<std::uint32_t> candidate_set;  // ascending repository indices
  std::vector<RankedTool> ranked;
  RetrievalFlags flags;

  friend bool operator==(const RetrievalResult&, const RetrievalResult&) = default;
};

struct LogicalConstraint {
  std::vector<Scored> instructions;  // top-T over the instruction pool
  std::vector<std::uint32_t> tools;  // union of their tools, ascending
};

/// Top-T pool instructions (training and inserted unseen) by text cosine and
/// the union of the tools they invoke.
LogicalConstraint logical_constraint(std::span<const double> query_text,
                                     const AlignedIndex& index, unsigned similar_instructions);

/// Graph embedding of a query instruction; the index is not modified.
AlignedEmbedding embed_query(std::span<const double> query_text, const AlignedIndex& index,
                             unsigned candidate_instructions);

enum class ToolSpace : std::uint8_t {
  Graph,              // graph embeddings for every tool
  GraphSeenTextUnseen,  // unseen tools through their text embeddings
  Text,               // text embeddings for every tool
};

struct RankedList {
  std::vector<RankedTool> ranked;
  bool fewer_than_k = false;
};

/// Top-K candidates by cosine against `query`, score descending then
/// repository index ascending. Throws ValidationError on empty candidates.
RankedList rank_tools(std::span<const double> query, std::span<const std::uint32_t> candidates,
                      const AlignedIndex& index, unsigned top_k, ToolSpace space);

/// Two-stage retrieval: logical constraint, query alignment, ranking.
/// Throws ValidationError when the repository is empty.
RetrievalResult retrieve(const std::string& query_id, std::span<const double> query_text,
                         const AlignedIndex& index, const RetrievalConfig& config);

/// Reference retriever: cosine of `query` against every row of `tools`.
std::vector<RankedTool> flat_cosine_retrieve(std::span<const double> query,
                                             const EmbeddingMatrix& tools, unsigned top_k);

}  // namespace losemb
