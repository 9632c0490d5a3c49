#include "losemb/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "losemb/error.hpp"

namespace losemb {

using nlohmann::json;

namespace {

std::string string_field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ValidationError(where + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

Corpus parse_corpus(std::istream& in, const std::string& source) {
  Corpus corpus;
  std::unordered_map<std::string, std::size_t> tool_lines;
  std::unordered_map<std::string, std::size_t> instruction_lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw ValidationError(where + ": not a JSON object");
    }
    const std::string type = string_field(obj, "type", where);
    if (type == "tool") {
      ToolRecord t{string_field(obj, "id", where), obj.value("name", std::string{}),
                   obj.value("description", std::string{})};
      if (auto [it, ok] = tool_lines.emplace(t.id, line_no); !ok) {
        throw ValidationError(where + ": duplicate tool id '" + t.id + "' (first on line " +
                              std::to_string(it->second) + ")");
      }
      corpus.tools.push_back(std::move(t));
    } else if (type == "instruction") {
      InstructionRecord r;
      r.id = string_field(obj, "id", where);
      r.text = obj.value("text", std::string{});
      auto tools = obj.find("tools");
      if (tools == obj.end() || !tools->is_array()) {
        throw ValidationError(where + ": missing array field 'tools'");
      }
      for (const auto& t : *tools) {
        if (!t.is_string()) throw ValidationError(where + ": tool ids must be strings");
        r.tool_ids.push_back(t.get<std::string>());
      }
      if (auto s = obj.find("split"); s != obj.end()) {
        if (*s == "train") {
          r.split = BaseSplit::Train;
        } else if (*s == "test") {
          r.split = BaseSplit::Test;
        } else {
          throw ValidationError(where + ": split must be \"train\" or \"test\"");
        }
      }
      if (auto [it, ok] = instruction_lines.emplace(r.id, line_no); !ok) {
        throw ValidationError(where + ": duplicate instruction id '" + r.id +
                              "' (first on line " + std::to_string(it->second) + ")");
      }
      corpus.instructions.push_back(std::move(r));
    } else {
      throw ValidationError(where + ": unknown record type '" + type + "'");
    }
  }

  std::set<std::string> dangling;
  for (const auto& r : corpus.instructions) {
    for (const auto& t : r.tool_ids) {
      if (!tool_lines.contains(t)) dangling.insert(t);
    }
  }
  if (!dangling.empty()) {
    std::string msg = source + ": instructions reference unknown tools:";
    for (const auto& t : dangling) msg += " " + t;
    throw ValidationError(msg);
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open corpus " + path.string());
  return parse_corpus(in, path.string());
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& t : corpus.tools) {
    json obj = {{"type", "tool"}, {"id", t.id}, {"name", t.name}, {"description", t.description}};
    out << obj.dump() << '\n';
  }
  for (const auto& r : corpus.instructions) {
    json obj = {{"type", "instruction"}, {"id", r.id}, {"text", r.text}, {"tools", r.tool_ids}};
    if (r.split == BaseSplit::Train) obj["split"] = "train";
    if (r.split == BaseSplit::Test) obj["split"] = "test";
    out << obj.dump() << '\n';
  }
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_corpus(out, corpus);
}

std::string tool_document(const ToolRecord& tool) { return tool.name + "\n" + tool.description; }

}  // namespace losemb
