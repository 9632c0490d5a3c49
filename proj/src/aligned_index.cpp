#include "losemb/aligned_index.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "losemb/alignment.hpp"
#include "losemb/error.hpp"
#include "losemb/similarity.hpp"

namespace losemb {

namespace {

void check_unique(const std::vector<std::string>& ids, const char* what,
                  std::unordered_map<std::string, std::uint32_t>& lookup) {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!lookup.emplace(ids[i], static_cast<std::uint32_t>(i)).second) {
      throw ValidationError(std::string("duplicate ") + what + " id '" + ids[i] + "'");
    }
  }
}

}  // namespace

AlignedIndex AlignedIndex::build(LogicalGraph graph, EmbeddingMatrix text,
                                 std::vector<std::string> instruction_ids,
                                 std::vector<std::string> tool_ids,
                                 const PropagationConfig& config, unsigned threads) {
  if (text.rows() != graph.num_nodes()) {
    throw ValidationError("text embeddings have " + std::to_string(text.rows()) +
                          " rows but the graph has " + std::to_string(graph.num_nodes()) +
                          " nodes");
  }
  auto lf = extract_logical_features(graph, text, config, threads);
  return from_parts(std::move(graph), std::move(text), std::move(lf.graph),
                    std::move(lf.features), std::move(instruction_ids), std::move(tool_ids),
                    config, {}, {});
}

AlignedIndex AlignedIndex::from_parts(LogicalGraph graph, EmbeddingMatrix text,
                                      EmbeddingMatrix graph_embeddings, EmbeddingMatrix features,
                                      std::vector<std::string> instruction_ids,
                                      std::vector<std::string> tool_ids, PropagationConfig config,
                                      std::vector<UnseenRow> unseen_tools,
                                      std::vector<UnseenRow> unseen_instructions) {
  if (text.rows() != graph.num_nodes() || !text.same_shape(graph_embeddings) ||
      !text.same_shape(features)) {
    throw ValidationError("index embedding tables do not match the graph");
  }
  if (instruction_ids.size() != graph.num_instructions() ||
      tool_ids.size() != graph.num_tools()) {
    throw ValidationError("index id tables do not match the graph");
  }
  for (std::size_t r = 0; r < text.rows(); ++r) {
    auto t = text.row(r);
    auto f = features.row(r);
    auto g = graph_embeddings.row(r);
    for (std::size_t c = 0; c < t.size(); ++c) {
      if (t[c] + f[c] != g[c]) {
        throw ValidationError("graph embedding of node " + std::to_string(r) +
                              " is not text + logical feature");
      }
    }
  }

  AlignedIndex index;
  index.graph_ = std::move(graph);
  index.text_ = std::move(text);
  index.graph_emb_ = std::move(graph_embeddings);
  index.features_ = std::move(features);
  index.config_ = std::move(config);
  index.instruction_ids_ = std::move(instruction_ids);
  index.tool_ids_ = std::move(tool_ids);
  index.unseen_tools_ = std::move(unseen_tools);
  index.unseen_instructions_ = std::move(unseen_instructions);

  const std::size_t dim = index.dim();
  for (const auto* rows : {&index.unseen_tools_, &index.unseen_instructions_}) {
    for (const auto& row : *rows) {
      if (row.text.size() != dim || row.graph.size() != dim) {
        throw ValidationError("unseen row '" + row.external_id + "' has the wrong dimension");
      }
    }
  }
  for (const auto& row : index.unseen_instructions_) {
    for (auto t : row.linked_tools) {
      if (t >= index.repository_size()) {
        throw ValidationError("unseen instruction '" + row.external_id +
                              "' links to an unknown tool");
      }
    }
  }
  index.refresh_caches();
  return index;
}

void AlignedIndex::refresh_caches() {
  tool_lookup_.clear();
  instruction_lookup_.clear();
  std::vector<std::string> all_tools = tool_ids_;
  for (const auto& r : unseen_tools_) all_tools.push_back(r.external_id);
  std::vector<std::string> all_instructions = instruction_ids_;
  for (const auto& r : unseen_instructions_) all_instructions.push_back(r.external_id);
  check_unique(all_tools, "tool", tool_lookup_);
  check_unique(all_instructions, "instruction", instruction_lookup_);

  tool_text_sq_norm_.clear();
  tool_graph_sq_norm_.clear();
  for (std::size_t t = 0; t < repository_size(); ++t) {
    tool_text_sq_norm_.push_back(dot(tool_text(t), tool_text(t)));
    tool_graph_sq_norm_.push_back(dot(tool_graph(t), tool_graph(t)));
  }
  pool_sq_norm_.clear();
  for (std::size_t i = 0; i < instruction_pool_size(); ++i) {
    pool_sq_norm_.push_back(dot(pool_instruction_text(i), pool_instruction_text(i)));
  }
}

const std::string& AlignedIndex::repository_id(std::size_t tool) const {
  return tool < tool_ids_.size() ? tool_ids_[tool] : unseen_tools_[tool - tool_ids_.size()].external_id;
}

std::span<const double> AlignedIndex::tool_text(std::size_t tool) const {
  if (tool < tool_ids_.size()) return training_tool_text(static_cast<std::uint32_t>(tool));
  return unseen_tools_[tool - tool_ids_.size()].text;
}

std::span<const double> AlignedIndex::tool_graph(std::size_t tool) const {
  if (tool < tool_ids_.size()) {
    return graph_emb_.row(graph_.node_id({NodeKind::Tool, static_cast<std::uint32_t>(tool)}));
  }
  return unseen_tools_[tool - tool_ids_.size()].graph;
}

std::optional<std::uint32_t> AlignedIndex::find_tool(const std::string& id) const {
  auto it = tool_lookup_.find(id);
  if (it == tool_lookup_.end()) return std::nullopt;
  return it->second;
}

bool AlignedIndex::has_external_id(const std::string& id) const {
  return tool_lookup_.contains(id) || instruction_lookup_.contains(id);
}

std::span<const double> AlignedIndex::pool_instruction_text(std::size_t i) const {
  if (i < instruction_ids_.size()) return text_.row(i);
  return unseen_instructions_[i - instruction_ids_.size()].text;
}

std::vector<std::uint32_t> AlignedIndex::pool_instruction_tools(std::size_t i) const {
  if (i < instruction_ids_.size()) return graph_.tools_of(static_cast<std::uint32_t>(i));
  return unseen_instructions_[i - instruction_ids_.size()].linked_tools;
}

bool operator==(const AlignedIndex& a, const AlignedIndex& b) {
  return a.graph_ == b.graph_ && a.text_ == b.text_ && a.graph_emb_ == b.graph_emb_ &&
         a.features_ == b.features_ && a.config_.num_layers() == b.config_.num_layers() &&
         std::ranges::equal(a.config_.coefficients(), b.config_.coefficients()) &&
         a.instruction_ids_ == b.instruction_ids_ && a.tool_ids_ == b.tool_ids_ &&
         a.unseen_tools_ == b.unseen_tools_ && a.unseen_instructions_ == b.unseen_instructions_;
}

namespace {

void check_new_row(const AlignedIndex& index, const UnseenNodeSpec& spec) {
  if (spec.external_id.empty()) throw ValidationError("unseen node without an id");
  if (index.has_external_id(spec.external_id)) {
    throw ValidationError("id '" + spec.external_id + "' already exists in the index");
  }
  auto check_vec = [&](const std::vector<double>& v, const char* what) {
    if (v.size() != index.dim()) {
      throw ValidationError("unseen node '" + spec.external_id + "': " + what + " has dimension " +
                            std::to_string(v.size()) + ", index has " +
                            std::to_string(index.dim()));
    }
    for (double x : v) {
      if (!std::isfinite(x)) {
        throw ValidationError("unseen node '" + spec.external_id + "': non-finite " + what);
      }
    }
  };
  check_vec(spec.text_embedding, "text embedding");
  for (const auto& a : spec.associated_instruction_embeddings) {
    check_vec(a, "associated instruction embedding");
  }
}

}  // namespace

const UnseenRow& IndexBuilder::add_unseen_tool(const UnseenNodeSpec& spec,
                                               unsigned candidate_instructions) {
  if (spec.kind != UnseenKind::Tool) throw ValidationError("add_unseen_tool given an instruction");
  check_new_row(index_, spec);
  auto aligned = align_unseen_tool(spec, index_, candidate_instructions);
  UnseenRow row{spec.external_id, spec.text_embedding, std::move(aligned.graph), aligned.fallback,
                {}};
  const auto repo_index = static_cast<std::uint32_t>(index_.repository_size());
  index_.tool_text_sq_norm_.push_back(dot(row.text, row.text));
  index_.tool_graph_sq_norm_.push_back(dot(row.graph, row.graph));
  index_.tool_lookup_.emplace(row.external_id, repo_index);
  index_.unseen_tools_.push_back(std::move(row));
  return index_.unseen_tools_.back();
}

const UnseenRow& IndexBuilder::add_unseen_instruction(const UnseenNodeSpec& spec,
                                                      unsigned candidate_instructions) {
  if (spec.kind != UnseenKind::Instruction) {
    throw ValidationError("add_unseen_instruction given a tool");
  }
  check_new_row(index_, spec);
  std::vector<std::uint32_t> linked;
  for (const auto& id : spec.linked_tool_ids) {
    auto t = index_.find_tool(id);
    if (!t) {
      throw ValidationError("unseen instruction '" + spec.external_id +
                            "' links to unknown tool '" + id + "'");
    }
    linked.push_back(*t);
  }
  std::sort(linked.begin(), linked.end());
  linked.erase(std::unique(linked.begin(), linked.end()), linked.end());

  auto aligned = align_unseen_instruction(spec.text_embedding, index_, candidate_instructions);
  UnseenRow row{spec.external_id, spec.text_embedding, std::move(aligned.graph), aligned.fallback,
                std::move(linked)};
  const auto pool_index = static_cast<std::uint32_t>(index_.instruction_pool_size());
  index_.pool_sq_norm_.push_back(dot(row.text, row.text));
  index_.instruction_lookup_.emplace(row.external_id, pool_index);
  index_.unseen_instructions_.push_back(std::move(row));
  return index_.unseen_instructions_.back();
}

void IndexBuilder::add_batch(std::span<const UnseenNodeSpec> batch,
                             unsigned candidate_instructions) {
  IndexBuilder staged(index_);
  for (const auto& spec : batch) {
    if (spec.kind == UnseenKind::Tool) staged.add_unseen_tool(spec, candidate_instructions);
  }
  for (const auto& spec : batch) {
    if (spec.kind == UnseenKind::Instruction) {
      staged.add_unseen_instruction(spec, candidate_instructions);
    }
  }
  index_ = std::move(staged.index_);
}

AlignedIndex IndexBuilder::seal() && { return std::move(index_); }

}  // namespace losemb
