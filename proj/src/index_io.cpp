#include "losemb/index_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "losemb/digest.hpp"
#include "losemb/error.hpp"

namespace losemb {

namespace {

constexpr std::size_t kDigestBytes = 64;  // hex SHA-256

void put_values(detail::LeWriter& w, std::span<const double> values) {
  for (double v : values) w.put(v);
}

std::vector<double> get_values(detail::LeReader& r, std::size_t n, const char* what) {
  std::vector<double> out(n);
  for (auto& v : out) v = r.get<double>(what);
  return out;
}

void put_row(detail::LeWriter& w, const UnseenRow& row) {
  w.string(row.external_id);
  w.put(static_cast<std::uint8_t>(row.fallback));
  w.put(static_cast<std::uint32_t>(row.linked_tools.size()));
  for (auto t : row.linked_tools) w.put(t);
  put_values(w, row.text);
  put_values(w, row.graph);
}

UnseenRow get_row(detail::LeReader& r, std::size_t dim) {
  UnseenRow row;
  row.external_id = r.string("unseen id");
  const auto flag = r.get<std::uint8_t>("fallback flag");
  if (flag > 1) r.fail("bad fallback flag");
  row.fallback = flag == 1;
  const auto linked = r.get<std::uint32_t>("linked tool count");
  for (std::uint32_t i = 0; i < linked; ++i) row.linked_tools.push_back(r.get<std::uint32_t>("linked tool"));
  row.text = get_values(r, dim, "unseen text");
  row.graph = get_values(r, dim, "unseen graph embedding");
  return row;
}

}  // namespace

std::string serialize_index(const AlignedIndex& index) {
  std::ostringstream body;
  detail::LeWriter w(body);
  w.bytes(kIndexMagic, 4);
  w.put(kIndexVersion);

  const auto& cfg = index.config();
  w.put(static_cast<std::uint32_t>(cfg.num_layers()));
  put_values(w, cfg.coefficients());

  const auto& g = index.graph();
  w.put(static_cast<std::uint32_t>(index.dim()));
  w.put(g.num_instructions());
  w.put(g.num_tools());
  w.put(static_cast<std::uint64_t>(g.adjacency().size()));
  for (auto o : g.offsets()) w.put(static_cast<std::uint64_t>(o));
  for (auto v : g.adjacency()) w.put(v);

  for (const auto& id : index.instruction_ids()) w.string(id);
  for (const auto& id : index.tool_ids()) w.string(id);

  put_values(w, index.text().values());
  put_values(w, index.graph_embeddings().values());
  put_values(w, index.features().values());

  w.put(static_cast<std::uint64_t>(index.unseen_tools().size()));
  for (const auto& row : index.unseen_tools()) put_row(w, row);
  w.put(static_cast<std::uint64_t>(index.unseen_instructions().size()));
  for (const auto& row : index.unseen_instructions()) put_row(w, row);

  std::string bytes = body.str();
  bytes += sha256_hex(bytes);
  return bytes;
}

AlignedIndex deserialize_index(const std::string& bytes, const std::string& source) {
  if (bytes.size() < 6 + kDigestBytes) {
    throw ValidationError(source + ": truncated index container at byte offset " +
                          std::to_string(bytes.size()));
  }
  if (std::memcmp(bytes.data(), kIndexMagic, 4) != 0) {
    throw ValidationError(source + ": bad magic (expected LSIX) at byte offset 0");
  }
  const std::string_view body(bytes.data(), bytes.size() - kDigestBytes);
  if (sha256_hex(body) != bytes.substr(bytes.size() - kDigestBytes)) {
    throw ValidationError(source + ": checksum mismatch at byte offset " +
                          std::to_string(body.size()));
  }

  std::istringstream in{std::string(body)};
  detail::LeReader r(in, source);
  char magic[4];
  r.raw(magic, 4, "magic");
  const auto version = r.get<std::uint16_t>("version");
  if (version != kIndexVersion) {
    throw ValidationError(source + ": unsupported index version " + std::to_string(version) +
                          " at byte offset 4");
  }

  const auto layers = r.get<std::uint32_t>("layer count");
  if (layers > 64) r.fail("implausible layer count");
  auto config = PropagationConfig::from_normalized(layers, get_values(r, layers + 1, "layer coefficients"));

  const auto dim = r.get<std::uint32_t>("dimension");
  const auto n = r.get<std::uint32_t>("instruction count");
  const auto m = r.get<std::uint32_t>("tool count");
  const auto n_adj = r.get<std::uint64_t>("adjacency size");
  const std::uint64_t nodes = std::uint64_t{n} + m;
  if ((nodes + 1) * 8 + n_adj * 4 + nodes * dim * 24 > body.size()) r.fail("section sizes exceed file");
  std::vector<std::size_t> offsets(static_cast<std::size_t>(nodes + 1));
  for (auto& o : offsets) o = static_cast<std::size_t>(r.get<std::uint64_t>("graph offsets"));
  std::vector<std::uint32_t> adjacency(static_cast<std::size_t>(n_adj));
  for (auto& v : adjacency) v = r.get<std::uint32_t>("adjacency");
  auto graph = LogicalGraph::from_csr(n, m, std::move(offsets), std::move(adjacency));

  std::vector<std::string> instruction_ids(n), tool_ids(m);
  for (auto& id : instruction_ids) id = r.string("instruction id");
  for (auto& id : tool_ids) id = r.string("tool id");

  const auto cells = static_cast<std::size_t>(nodes * dim);
  EmbeddingMatrix text(nodes, dim, get_values(r, cells, "text embeddings"));
  EmbeddingMatrix graph_emb(nodes, dim, get_values(r, cells, "graph embeddings"));
  EmbeddingMatrix features(nodes, dim, get_values(r, cells, "logical features"));

  std::vector<UnseenRow> unseen_tools, unseen_instructions;
  const auto n_tools = r.get<std::uint64_t>("unseen tool count");
  if (n_tools * dim * 16 > body.size()) r.fail("implausible unseen tool count");
  for (std::uint64_t i = 0; i < n_tools; ++i) unseen_tools.push_back(get_row(r, dim));
  const auto n_instr = r.get<std::uint64_t>("unseen instruction count");
  if (n_instr * dim * 16 > body.size()) r.fail("implausible unseen instruction count");
  for (std::uint64_t i = 0; i < n_instr; ++i) unseen_instructions.push_back(get_row(r, dim));
  if (!r.at_end()) r.fail("trailing bytes before checksum");

  return AlignedIndex::from_parts(std::move(graph), std::move(text), std::move(graph_emb),
                                  std::move(features), std::move(instruction_ids),
                                  std::move(tool_ids), std::move(config), std::move(unseen_tools),
                                  std::move(unseen_instructions));
}

void save_index(const std::filesystem::path& path, const AlignedIndex& index) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  const auto bytes = serialize_index(index);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ValidationError("failed writing " + path.string());
}

AlignedIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open index " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_index(ss.str(), path.string());
}

}  // namespace losemb
