#include "losemb/batch_io.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "losemb/error.hpp"

namespace losemb {

using nlohmann::json;

namespace {

template <typename Fn>
void for_each_record(std::istream& in, const std::string& source, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) throw ValidationError(where + ": not a JSON object");
    fn(obj, where);
  }
}

std::string str(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ValidationError(where + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

std::vector<std::string> str_list(const json& obj, const char* key, const std::string& where,
                                  bool required) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) throw ValidationError(where + ": missing field '" + key + "'");
    return out;
  }
  if (it->is_string()) {
    out.push_back(it->get<std::string>());
    return out;
  }
  if (!it->is_array()) throw ValidationError(where + ": field '" + key + "' must be a list");
  for (const auto& v : *it) {
    if (!v.is_string()) throw ValidationError(where + ": field '" + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

}  // namespace

std::vector<UnseenRecord> parse_unseen_batch(std::istream& in, const std::string& source) {
  std::vector<UnseenRecord> out;
  std::set<std::string> ids;
  for_each_record(in, source, [&](const json& obj, const std::string& where) {
    UnseenRecord r;
    r.external_id = str(obj, "external_id", where);
    const auto kind = str(obj, "kind", where);
    if (kind == "tool") {
      r.kind = UnseenKind::Tool;
    } else if (kind == "instruction") {
      r.kind = UnseenKind::Instruction;
    } else {
      throw ValidationError(where + ": kind must be \"tool\" or \"instruction\"");
    }
    r.text_embedding_ref = str(obj, "text_embedding_ref", where);
    r.associated_instruction_refs =
        str_list(obj, "associated_instruction_embedding_ref", where, false);
    r.tool_ids = str_list(obj, "tool_ids", where, false);
    if (!ids.insert(r.external_id).second) {
      throw ValidationError(where + ": duplicate id '" + r.external_id + "' in batch");
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<UnseenRecord> load_unseen_batch(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_unseen_batch(in, path.string());
}

void save_unseen_batch(const std::filesystem::path& path, const std::vector<UnseenRecord>& batch) {
  auto out = open_out(path);
  for (const auto& r : batch) {
    json obj = {{"external_id", r.external_id},
                {"kind", r.kind == UnseenKind::Tool ? "tool" : "instruction"},
                {"text_embedding_ref", r.text_embedding_ref}};
    if (!r.associated_instruction_refs.empty()) {
      obj["associated_instruction_embedding_ref"] = r.associated_instruction_refs;
    }
    if (!r.tool_ids.empty()) obj["tool_ids"] = r.tool_ids;
    out << obj.dump() << '\n';
  }
}

std::vector<UnseenNodeSpec> resolve_batch(const std::vector<UnseenRecord>& batch,
                                          const EmbeddingTable& embeddings) {
  auto lookup = [&](const std::string& ref, const std::string& owner) {
    auto row = embeddings.find(ref);
    if (!row) {
      throw ValidationError("batch record '" + owner + "' references missing embedding '" + ref +
                            "'");
    }
    return std::vector<double>(row->begin(), row->end());
  };
  std::vector<UnseenNodeSpec> out;
  for (const auto& r : batch) {
    UnseenNodeSpec spec;
    spec.external_id = r.external_id;
    spec.kind = r.kind;
    spec.text_embedding = lookup(r.text_embedding_ref, r.external_id);
    for (const auto& ref : r.associated_instruction_refs) {
      spec.associated_instruction_embeddings.push_back(lookup(ref, r.external_id));
    }
    spec.linked_tool_ids = r.tool_ids;
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<QueryRecord> parse_queries(std::istream& in, const std::string& source) {
  std::vector<QueryRecord> out;
  for_each_record(in, source, [&](const json& obj, const std::string& where) {
    out.push_back({str(obj, "external_id", where), str(obj, "text_embedding_ref", where)});
  });
  return out;
}

std::vector<QueryRecord> load_queries(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_queries(in, path.string());
}

void save_queries(const std::filesystem::path& path, const std::vector<QueryRecord>& queries) {
  auto out = open_out(path);
  for (const auto& q : queries) {
    out << json{{"external_id", q.external_id}, {"text_embedding_ref", q.text_embedding_ref}}.dump()
        << '\n';
  }
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  auto in = open_in(path);
  GroundTruth truth;
  for_each_record(in, path.string(), [&](const json& obj, const std::string& where) {
    const auto id = str(obj, "external_id", where);
    if (!truth.emplace(id, str_list(obj, "tools", where, true)).second) {
      throw ValidationError(where + ": duplicate query '" + id + "'");
    }
  });
  return truth;
}

void save_ground_truth(const std::filesystem::path& path, const GroundTruth& truth) {
  auto out = open_out(path);
  for (const auto& [id, tools] : truth) {
    out << json{{"external_id", id}, {"tools", tools}}.dump() << '\n';
  }
}

RankedLists load_results(const std::filesystem::path& path) {
  auto in = open_in(path);
  RankedLists results;
  for_each_record(in, path.string(), [&](const json& obj, const std::string& where) {
    const auto id = str(obj, "external_id", where);
    auto ranked = obj.find("ranked");
    if (ranked == obj.end() || !ranked->is_array()) {
      throw ValidationError(where + ": missing array field 'ranked'");
    }
    std::vector<std::string> tools;
    for (const auto& entry : *ranked) {
      if (!entry.is_object()) throw ValidationError(where + ": ranked entries must be objects");
      tools.push_back(str(entry, "tool", where));
    }
    if (!results.emplace(id, std::move(tools)).second) {
      throw ValidationError(where + ": duplicate result for '" + id + "'");
    }
  });
  if (results.empty()) throw ValidationError(path.string() + ": results file is empty");
  return results;
}

}  // namespace losemb
