#include "losemb/embedding_file.hpp"

#include <cstring>
#include <fstream>
#include <limits>

#include "binary_io.hpp"
#include "losemb/error.hpp"

namespace losemb {

EmbeddingTable::EmbeddingTable(EmbeddingMatrix matrix, std::vector<std::string> ids)
    : matrix_(std::move(matrix)), ids_(std::move(ids)) {
  if (ids_.size() != matrix_.rows()) {
    throw ValidationError("embedding table has " + std::to_string(matrix_.rows()) + " rows but " +
                          std::to_string(ids_.size()) + " ids");
  }
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!lookup_.emplace(ids_[i], i).second) {
      throw ValidationError("duplicate embedding id '" + ids_[i] + "'");
    }
  }
}

std::optional<std::span<const double>> EmbeddingTable::find(const std::string& id) const {
  auto it = lookup_.find(id);
  if (it == lookup_.end()) return std::nullopt;
  return matrix_.row(it->second);
}

std::span<const double> EmbeddingTable::at(const std::string& id) const {
  auto row = find(id);
  if (!row) throw ValidationError("no embedding for id '" + id + "'");
  return *row;
}

void write_embeddings(std::ostream& out, const EmbeddingMatrix& matrix,
                      std::span<const std::string> ids) {
  if (ids.size() != matrix.rows()) {
    throw ValidationError("write_embeddings: " + std::to_string(ids.size()) + " ids for " +
                          std::to_string(matrix.rows()) + " rows");
  }
  detail::LeWriter w(out);
  w.bytes(kEmbeddingMagic, 4);
  w.put(kEmbeddingVersion);
  w.put(static_cast<std::uint64_t>(matrix.rows()));
  w.put(static_cast<std::uint32_t>(matrix.dim()));
  for (double v : matrix.values()) w.put(static_cast<float>(v));
  for (const auto& id : ids) w.string(id);
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& matrix,
                      std::span<const std::string> ids) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_embeddings(out, matrix, ids);
  if (!out) throw ValidationError("failed writing " + path.string());
}

EmbeddingTable read_embeddings(std::istream& in, const std::string& source) {
  // Remaining size bounds the header counts before allocating.
  std::optional<std::uint64_t> available;
  if (auto start = in.tellg(); start != std::streampos(-1)) {
    in.seekg(0, std::ios::end);
    available = static_cast<std::uint64_t>(in.tellg() - start);
    in.seekg(start);
  }

  detail::LeReader r(in, source);
  char magic[4];
  r.raw(magic, 4, "magic");
  if (std::memcmp(magic, kEmbeddingMagic, 4) != 0) {
    throw ValidationError(source + ": bad magic (expected LSEM) at byte offset 0");
  }
  const auto version = r.get<std::uint16_t>("version");
  if (version != kEmbeddingVersion) {
    throw ValidationError(source + ": unsupported version " + std::to_string(version) +
                          " at byte offset 4");
  }
  const auto rows = r.get<std::uint64_t>("row count");
  const auto dim = r.get<std::uint32_t>("dimension");
  const std::uint64_t max_values = std::numeric_limits<std::uint64_t>::max() / 4;
  if (dim != 0 && rows > max_values / dim) r.fail("row count overflows");
  const std::uint64_t payload = rows * dim * 4;
  if (available && payload > *available - r.offset()) {
    throw ValidationError(source + ": truncated payload (header declares " +
                          std::to_string(payload) + " bytes) at byte offset " +
                          std::to_string(*available));
  }

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(rows * dim));
  for (std::uint64_t i = 0; i < rows * dim; ++i) {
    values.push_back(static_cast<double>(r.get<float>("payload")));
  }
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(rows));
  for (std::uint64_t i = 0; i < rows; ++i) ids.push_back(r.string("id footer"));
  if (!r.at_end()) r.fail("trailing bytes after id footer");

  EmbeddingMatrix matrix(static_cast<std::size_t>(rows), dim, std::move(values));
  return EmbeddingTable(std::move(matrix), std::move(ids));
}

EmbeddingTable read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open embeddings " + path.string());
  return read_embeddings(in, path.string());
}

}  // namespace losemb
