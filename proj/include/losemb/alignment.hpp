#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "losemb/aligned_index.hpp"
#include "losemb/embedding_matrix.hpp"
#include "losemb/graph.hpp"

namespace losemb {

inline constexpr unsigned kDefaultCandidateInstructions = 5;

struct InstructionCandidate {
  std::uint32_t instruction = 0;  // training instruction index
  double score = 0.0;

  friend bool operator==(const InstructionCandidate&, const InstructionCandidate&) = default;
};

/// Top-I training instructions by text cosine, score descending then index
/// ascending.
using CandidateInstructionSet = std::vector<InstructionCandidate>;

struct ToolFrequency {
  std::uint32_t tool = 0;  // training tool index
  std::uint32_t count = 0;

  friend bool operator==(const ToolFrequency&, const ToolFrequency&) = default;
};

struct CandidateToolSet {
  std::vector<ToolFrequency> entries;  // ascending tool index
  std::uint64_t total_frequency = 0;
};

struct WeightedNode {
  std::uint32_t index = 0;  // tool or instruction index local to its kind
  double weight = 0.0;
};

/// Thrown when no training tool is reachable from the candidate instructions.
class NoTransferableCandidates : public std::runtime_error {
 public:
  NoTransferableCandidates() : std::runtime_error("no transferable candidates") {}
};

/// Throws ValidationError when the index has no training instructions or I == 0.
CandidateInstructionSet find_candidate_instructions(std::span<const double> query_text,
                                                    const AlignedIndex& index, unsigned count);

/// Tools adjacent to the candidates with per-tool frequency. Throws
/// NoTransferableCandidates when the union is empty.
CandidateToolSet collect_candidate_tools(const CandidateInstructionSet& candidates,
                                         const LogicalGraph& graph);

/// freq / total. Throws ValidationError on an empty set.
std::vector<WeightedNode> frequency_weights(const CandidateToolSet& tools);

/// exp(score) / sum exp(score) over the candidates. Throws ValidationError on
/// an empty set.
std::vector<WeightedNode> softmax_weights(const CandidateInstructionSet& candidates);

/// text + sum_j w_j * features[row(j)] where row() maps the local index to a
/// row of `features`.
std::vector<double> transfer_tool_embedding(std::span<const double> text,
                                            std::span<const WeightedNode> weights,
                                            const EmbeddingMatrix& features,
                                            const LogicalGraph& graph);
std::vector<double> transfer_instruction_embedding(std::span<const double> text,
                                                   std::span<const WeightedNode> weights,
                                                   const EmbeddingMatrix& features,
                                                   const LogicalGraph& graph);

struct AlignedEmbedding {
  std::vector<double> graph;
  bool fallback = false;
  CandidateInstructionSet instructions;
  std::vector<WeightedNode> weights;
};

/// Bridge through the associated instruction(s): candidate instructions
/// (unioned across several associated instructions), frequency-weighted
/// tool features. Falls back to the text embedding when no training tool is
/// reachable or the index has no training instructions.
AlignedEmbedding align_unseen_tool(const UnseenNodeSpec& spec, const AlignedIndex& index,
                                   unsigned candidate_instructions);

/// Candidate instructions by the instruction's own text, softmax weights,
/// instruction features. Falls back when the index has no training instructions.
AlignedEmbedding align_unseen_instruction(std::span<const double> text,
                                          const AlignedIndex& index,
                                          unsigned candidate_instructions);

}  // namespace losemb
