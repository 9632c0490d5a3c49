#include "losemb/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "losemb/error.hpp"

namespace losemb {

NodeRef LogicalGraph::node_ref(std::size_t node) const {
  if (node < num_instructions_) return {NodeKind::Instruction, static_cast<std::uint32_t>(node)};
  return {NodeKind::Tool, static_cast<std::uint32_t>(node - num_instructions_)};
}

std::vector<std::uint32_t> LogicalGraph::tools_of(std::uint32_t instruction) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t v : neighbors(instruction)) out.push_back(v - num_instructions_);
  return out;
}

LogicalGraph build_graph(std::span<const Interaction> pairs, std::uint32_t num_instructions,
                         std::uint32_t num_tools) {
  const std::size_t n = std::size_t{num_instructions} + num_tools;
  std::vector<std::vector<std::uint32_t>> lists(n);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (p.instruction >= num_instructions || p.tool >= num_tools) {
      throw ValidationError("interaction #" + std::to_string(i) + " (instruction " +
                            std::to_string(p.instruction) + ", tool " + std::to_string(p.tool) +
                            ") is out of range for N=" + std::to_string(num_instructions) +
                            ", M=" + std::to_string(num_tools));
    }
    const std::uint32_t t = num_instructions + p.tool;
    lists[p.instruction].push_back(t);
    lists[t].push_back(p.instruction);
  }

  LogicalGraph g;
  g.num_instructions_ = num_instructions;
  g.num_tools_ = num_tools;
  g.offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    auto& l = lists[v];
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    g.offsets_[v + 1] = g.offsets_[v] + l.size();
  }
  g.neighbors_.reserve(g.offsets_[n]);
  for (const auto& l : lists) g.neighbors_.insert(g.neighbors_.end(), l.begin(), l.end());
  return g;
}

LogicalGraph LogicalGraph::from_csr(std::uint32_t num_instructions, std::uint32_t num_tools,
                                    std::vector<std::size_t> offsets,
                                    std::vector<std::uint32_t> neighbors) {
  const std::size_t n = std::size_t{num_instructions} + num_tools;
  if (offsets.size() != n + 1 || offsets.front() != 0 || offsets.back() != neighbors.size()) {
    throw ValidationError("graph offsets are inconsistent with node and edge counts");
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (offsets[v] > offsets[v + 1]) throw ValidationError("graph offsets are not monotone");
    const bool is_instruction = v < num_instructions;
    for (std::size_t e = offsets[v]; e < offsets[v + 1]; ++e) {
      const std::uint32_t u = neighbors[e];
      if (u >= n) throw ValidationError("graph neighbor index out of range");
      if ((u < num_instructions) == is_instruction) {
        throw ValidationError("graph edge " + std::to_string(v) + "-" + std::to_string(u) +
                              " is not bipartite");
      }
      if (e > offsets[v] && neighbors[e - 1] >= u) {
        throw ValidationError("graph neighbor list of node " + std::to_string(v) +
                              " is unsorted or has duplicates");
      }
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t e = offsets[v]; e < offsets[v + 1]; ++e) {
      const std::uint32_t u = neighbors[e];
      auto first = neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[u]);
      auto last = neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[u + 1]);
      if (!std::binary_search(first, last, static_cast<std::uint32_t>(v))) {
        throw ValidationError("graph adjacency is not symmetric at " + std::to_string(v) + "-" +
                              std::to_string(u));
      }
    }
  }
  LogicalGraph g;
  g.num_instructions_ = num_instructions;
  g.num_tools_ = num_tools;
  g.offsets_ = std::move(offsets);
  g.neighbors_ = std::move(neighbors);
  return g;
}

double SparseMatrix::at(std::size_t row, std::size_t col) const {
  auto first = columns.begin() + static_cast<std::ptrdiff_t>(offsets[row]);
  auto last = columns.begin() + static_cast<std::ptrdiff_t>(offsets[row + 1]);
  auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(col));
  if (it == last || *it != col) return 0.0;
  return values[static_cast<std::size_t>(it - columns.begin())];
}

SparseMatrix normalized_adjacency(const LogicalGraph& graph) {
  SparseMatrix m;
  m.size = graph.num_nodes();
  m.offsets.assign(graph.offsets().begin(), graph.offsets().end());
  m.columns.assign(graph.adjacency().begin(), graph.adjacency().end());
  m.values.resize(m.columns.size());
  for (std::size_t u = 0; u < m.size; ++u) {
    const double du = static_cast<double>(graph.degree(u));
    for (std::size_t e = m.offsets[u]; e < m.offsets[u + 1]; ++e) {
      const double dv = static_cast<double>(graph.degree(m.columns[e]));
      m.values[e] = 1.0 / std::sqrt(du * dv);
    }
  }
  return m;
}

}  // namespace losemb
