#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace losemb {

struct ToolRecord {
  std::string id;
  std::string name;
  std::string description;

  friend bool operator==(const ToolRecord&, const ToolRecord&) = default;
};

/// Optional pre-assigned side of the base train/test partition.
enum class BaseSplit { Unassigned, Train, Test };

struct InstructionRecord {
  std::string id;
  std::string text;
  std::vector<std::string> tool_ids;
  BaseSplit split = BaseSplit::Unassigned;

  friend bool operator==(const InstructionRecord&, const InstructionRecord&) = default;
};

/// Instructions and tools. Ids are unique within each list and every
/// instruction's tool ids resolve.
struct Corpus {
  std::vector<InstructionRecord> instructions;
  std::vector<ToolRecord> tools;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// One JSON object per line:
///   {"type":"tool","id":...,"name":...,"description":...}
///   {"type":"instruction","id":...,"text":...,"tools":[...],"split":"train"|"test"}
/// Blank lines are ignored. Throws ValidationError with the line number for
/// malformed lines and duplicate ids, and lists dangling tool references.
Corpus parse_corpus(std::istream& in, const std::string& source = "<stream>");
Corpus load_corpus(const std::filesystem::path& path);

/// Canonical form: tools first, then instructions, in list order.
void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

/// Text fed to an encoder for a tool: name and description joined by a newline.
std::string tool_document(const ToolRecord& tool);

}  // namespace losemb
