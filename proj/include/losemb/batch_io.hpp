#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "losemb/aligned_index.hpp"
#include "losemb/embedding_file.hpp"
#include "losemb/metrics.hpp"

namespace losemb {

/// Unseen-node batch record, one JSON object per line:
///   {"external_id", "kind":"tool"|"instruction", "text_embedding_ref",
///    "associated_instruction_embedding_ref": string or [strings] (tools),
///    "tool_ids": [strings] (instructions)}
/// Refs name rows of an embedding file.
struct UnseenRecord {
  std::string external_id;
  UnseenKind kind = UnseenKind::Tool;
  std::string text_embedding_ref;
  std::vector<std::string> associated_instruction_refs;
  std::vector<std::string> tool_ids;

  friend bool operator==(const UnseenRecord&, const UnseenRecord&) = default;
};

/// Query record: {"external_id", "text_embedding_ref"}.
struct QueryRecord {
  std::string external_id;
  std::string text_embedding_ref;

  friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

std::vector<UnseenRecord> parse_unseen_batch(std::istream& in, const std::string& source);
std::vector<UnseenRecord> load_unseen_batch(const std::filesystem::path& path);
void save_unseen_batch(const std::filesystem::path& path, const std::vector<UnseenRecord>& batch);

/// Resolves refs; throws ValidationError naming any missing ref.
std::vector<UnseenNodeSpec> resolve_batch(const std::vector<UnseenRecord>& batch,
                                          const EmbeddingTable& embeddings);

std::vector<QueryRecord> parse_queries(std::istream& in, const std::string& source);
std::vector<QueryRecord> load_queries(const std::filesystem::path& path);
void save_queries(const std::filesystem::path& path, const std::vector<QueryRecord>& queries);

/// Ground truth: {"external_id", "tools":[...]} per line.
GroundTruth load_ground_truth(const std::filesystem::path& path);
void save_ground_truth(const std::filesystem::path& path, const GroundTruth& truth);

/// Results file as written by retrieval: only ids and ranked tool ids are
/// read. Throws ValidationError on an empty file.
RankedLists load_results(const std::filesystem::path& path);

}  // namespace losemb
