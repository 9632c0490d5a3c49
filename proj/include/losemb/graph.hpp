#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace losemb {

enum class NodeKind : std::uint8_t { Instruction = 0, Tool = 1 };

struct NodeRef {
  NodeKind kind = NodeKind::Instruction;
  std::uint32_t index = 0;

  friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

/// One observed invocation: instruction `instruction` used tool `tool`.
struct Interaction {
  std::uint32_t instruction = 0;
  std::uint32_t tool = 0;
};

/// Bipartite instruction/tool graph in compressed sparse row form.
///
/// Nodes share one index space [0, N+M): instructions occupy [0, N) and tools
/// occupy [N, N+M). Every neighbor list is sorted ascending and free of
/// duplicates, and the adjacency is symmetric. Immutable after construction.
class LogicalGraph {
 public:
  LogicalGraph() = default;

  std::uint32_t num_instructions() const { return num_instructions_; }
  std::uint32_t num_tools() const { return num_tools_; }
  std::size_t num_nodes() const { return std::size_t{num_instructions_} + num_tools_; }
  /// Undirected edge count.
  std::size_t num_edges() const { return neighbors_.size() / 2; }

  std::size_t node_id(NodeRef ref) const {
    return ref.kind == NodeKind::Instruction ? ref.index : std::size_t{num_instructions_} + ref.index;
  }
  NodeRef node_ref(std::size_t node) const;

  std::span<const std::uint32_t> neighbors(std::size_t node) const {
    return {neighbors_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
  }
  std::size_t degree(std::size_t node) const { return offsets_[node + 1] - offsets_[node]; }

  /// Tool-local indices adjacent to instruction `instruction`, ascending.
  std::vector<std::uint32_t> tools_of(std::uint32_t instruction) const;

  std::span<const std::size_t> offsets() const { return offsets_; }
  std::span<const std::uint32_t> adjacency() const { return neighbors_; }

  /// Rebuilds a graph from raw CSR arrays, validating every invariant.
  /// Throws ValidationError on any violation.
  static LogicalGraph from_csr(std::uint32_t num_instructions, std::uint32_t num_tools,
                               std::vector<std::size_t> offsets,
                               std::vector<std::uint32_t> neighbors);

  friend bool operator==(const LogicalGraph&, const LogicalGraph&) = default;

 private:
  friend LogicalGraph build_graph(std::span<const Interaction>, std::uint32_t, std::uint32_t);

  std::uint32_t num_instructions_ = 0;
  std::uint32_t num_tools_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> neighbors_;
};

/// Builds the deduplicated symmetric graph. Throws ValidationError naming the
/// first pair whose instruction or tool id is out of range.
LogicalGraph build_graph(std::span<const Interaction> pairs, std::uint32_t num_instructions,
                         std::uint32_t num_tools);

/// Square sparse matrix in CSR form with per-entry weights.
struct SparseMatrix {
  std::size_t size = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> columns;
  std::vector<double> values;

  double at(std::size_t row, std::size_t col) const;
};

/// D^{-1/2} A D^{-1/2}. Entry (u, v) is 1 / sqrt(deg(u) * deg(v)); rows of
/// degree-zero nodes are empty.
SparseMatrix normalized_adjacency(const LogicalGraph& graph);

}  // namespace losemb
