#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "losemb/embedding_matrix.hpp"

namespace losemb {

/// Binary layout, little-endian throughout:
///   "LSEM" | version u16 | rows u64 | dim u32
///   rows*dim float32 values, row-major
///   rows ids, each u32 byte length + UTF-8 bytes
inline constexpr char kEmbeddingMagic[4] = {'L', 'S', 'E', 'M'};
inline constexpr std::uint16_t kEmbeddingVersion = 1;

/// Embeddings keyed by external id. Values are widened from float32.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  /// Throws ValidationError if ids and rows disagree or ids repeat.
  EmbeddingTable(EmbeddingMatrix matrix, std::vector<std::string> ids);

  const EmbeddingMatrix& matrix() const { return matrix_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::size_t dim() const { return matrix_.dim(); }

  std::optional<std::span<const double>> find(const std::string& id) const;
  /// Throws ValidationError naming the id when absent.
  std::span<const double> at(const std::string& id) const;

 private:
  EmbeddingMatrix matrix_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

/// Values are narrowed to float32. Throws ValidationError if ids.size() != rows.
void write_embeddings(std::ostream& out, const EmbeddingMatrix& matrix,
                      std::span<const std::string> ids);
void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& matrix,
                      std::span<const std::string> ids);

/// Throws ValidationError naming the byte offset on a bad magic, unsupported
/// version, truncation or trailing bytes.
EmbeddingTable read_embeddings(std::istream& in, const std::string& source = "<stream>");
EmbeddingTable read_embeddings(const std::filesystem::path& path);

}  // namespace losemb
