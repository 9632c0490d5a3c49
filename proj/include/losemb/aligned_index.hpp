#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "losemb/embedding_matrix.hpp"
#include "losemb/graph.hpp"
#include "losemb/propagation.hpp"

namespace losemb {

/// A tool or instruction that was absent from training and has been inserted
/// with a transferred graph embedding.
struct UnseenRow {
  std::string external_id;
  std::vector<double> text;
  std::vector<double> graph;
  bool fallback = false;  // no transferable candidates; graph == text
  /// Instructions only: repository tool indices the instruction arrived with.
  std::vector<std::uint32_t> linked_tools;

  friend bool operator==(const UnseenRow&, const UnseenRow&) = default;
};

/// The queryable artifact: training graph, text embeddings, graph
/// embeddings and logical features for every training node, plus inserted
/// unseen tools and instructions.
///
/// Tools form one "repository" index space: training tools [0, M) followed by
/// unseen tools in insertion order. Instructions likewise form a search pool:
/// training instructions [0, N) followed by unseen instructions.
///
/// An AlignedIndex is immutable; use IndexBuilder to insert unseen rows.
class AlignedIndex {
 public:
  AlignedIndex() = default;

  /// Runs feature extraction over the training graph. `text` rows follow the
  /// graph's node order (instructions then tools).
  static AlignedIndex build(LogicalGraph graph, EmbeddingMatrix text,
                            std::vector<std::string> instruction_ids,
                            std::vector<std::string> tool_ids, const PropagationConfig& config,
                            unsigned threads = 1);

  /// Assembles an index from stored parts (used by the container reader).
  /// Validates shapes, id uniqueness and the text + features == graph law.
  static AlignedIndex from_parts(LogicalGraph graph, EmbeddingMatrix text,
                                 EmbeddingMatrix graph_embeddings, EmbeddingMatrix features,
                                 std::vector<std::string> instruction_ids,
                                 std::vector<std::string> tool_ids, PropagationConfig config,
                                 std::vector<UnseenRow> unseen_tools,
                                 std::vector<UnseenRow> unseen_instructions);

  const LogicalGraph& graph() const { return graph_; }
  const EmbeddingMatrix& text() const { return text_; }
  const EmbeddingMatrix& graph_embeddings() const { return graph_emb_; }
  const EmbeddingMatrix& features() const { return features_; }
  const PropagationConfig& config() const { return config_; }
  std::size_t dim() const { return text_.dim(); }

  std::uint32_t num_training_instructions() const { return graph_.num_instructions(); }
  std::uint32_t num_training_tools() const { return graph_.num_tools(); }

  const std::vector<std::string>& instruction_ids() const { return instruction_ids_; }
  const std::vector<std::string>& tool_ids() const { return tool_ids_; }
  const std::vector<UnseenRow>& unseen_tools() const { return unseen_tools_; }
  const std::vector<UnseenRow>& unseen_instructions() const { return unseen_instructions_; }

  // Repository view over training + unseen tools.
  std::size_t repository_size() const { return tool_ids_.size() + unseen_tools_.size(); }
  const std::string& repository_id(std::size_t tool) const;
  bool is_unseen_tool(std::size_t tool) const { return tool >= tool_ids_.size(); }
  std::span<const double> tool_text(std::size_t tool) const;
  std::span<const double> tool_graph(std::size_t tool) const;
  double tool_text_sq_norm(std::size_t tool) const { return tool_text_sq_norm_[tool]; }
  double tool_graph_sq_norm(std::size_t tool) const { return tool_graph_sq_norm_[tool]; }
  std::optional<std::uint32_t> find_tool(const std::string& id) const;

  // Instruction search pool over training + unseen instructions.
  std::size_t instruction_pool_size() const {
    return instruction_ids_.size() + unseen_instructions_.size();
  }
  std::span<const double> pool_instruction_text(std::size_t i) const;
  double pool_instruction_sq_norm(std::size_t i) const { return pool_sq_norm_[i]; }
  /// Repository tools adjacent to pool instruction `i`, ascending.
  std::vector<std::uint32_t> pool_instruction_tools(std::size_t i) const;
  bool has_external_id(const std::string& id) const;

  std::span<const double> training_instruction_text(std::uint32_t i) const {
    return text_.row(i);
  }
  std::span<const double> training_tool_text(std::uint32_t t) const {
    return text_.row(graph_.node_id({NodeKind::Tool, t}));
  }

  friend bool operator==(const AlignedIndex& a, const AlignedIndex& b);

 private:
  friend class IndexBuilder;
  void refresh_caches();

  LogicalGraph graph_;
  EmbeddingMatrix text_;
  EmbeddingMatrix graph_emb_;
  EmbeddingMatrix features_;
  PropagationConfig config_ = PropagationConfig::uniform();
  std::vector<std::string> instruction_ids_;
  std::vector<std::string> tool_ids_;
  std::vector<UnseenRow> unseen_tools_;
  std::vector<UnseenRow> unseen_instructions_;

  std::unordered_map<std::string, std::uint32_t> tool_lookup_;
  std::unordered_map<std::string, std::uint32_t> instruction_lookup_;
  std::vector<double> tool_text_sq_norm_;
  std::vector<double> tool_graph_sq_norm_;
  std::vector<double> pool_sq_norm_;
};

enum class UnseenKind : std::uint8_t { Tool, Instruction };

/// Input description of one unseen node.
struct UnseenNodeSpec {
  std::string external_id;
  UnseenKind kind = UnseenKind::Tool;
  std::vector<double> text_embedding;
  /// Tools: the instruction(s) that arrived with the tool; used as the bridge
  /// to functionally similar training tools.
  std::vector<std::vector<double>> associated_instruction_embeddings;
  /// Instructions: repository tool ids the instruction invokes.
  std::vector<std::string> linked_tool_ids;
};

/// Mutable phase of an AlignedIndex. Single-threaded; seal() hands back an
/// immutable index.
class IndexBuilder {
 public:
  explicit IndexBuilder(AlignedIndex index) : index_(std::move(index)) {}

  /// Aligns and appends; returns the new row. Throws ValidationError on a
  /// duplicate id, bad dimension, or unknown linked tool.
  const UnseenRow& add_unseen_tool(const UnseenNodeSpec& spec, unsigned candidate_instructions);
  const UnseenRow& add_unseen_instruction(const UnseenNodeSpec& spec,
                                          unsigned candidate_instructions);
  /// Inserts tools first so instructions may link to tools of the same batch.
  /// All or nothing: on error the builder is left unchanged.
  void add_batch(std::span<const UnseenNodeSpec> batch, unsigned candidate_instructions);

  const AlignedIndex& view() const { return index_; }
  AlignedIndex seal() &&;

 private:
  AlignedIndex index_;
};

}  // namespace losemb
