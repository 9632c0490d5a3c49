#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "losemb/aligned_index.hpp"

namespace losemb {

/// Single-file index container: "LSIX", a u16 version, then sections for the
/// propagation config, graph, id maps, text/graph/feature tables and the
/// unseen rows, all little-endian with float64 values. A trailing SHA-256 of
/// everything before it guards against corruption.
inline constexpr char kIndexMagic[4] = {'L', 'S', 'I', 'X'};
inline constexpr std::uint16_t kIndexVersion = 1;

std::string serialize_index(const AlignedIndex& index);
/// Throws ValidationError on any corruption.
AlignedIndex deserialize_index(const std::string& bytes, const std::string& source = "<bytes>");

void save_index(const std::filesystem::path& path, const AlignedIndex& index);
AlignedIndex load_index(const std::filesystem::path& path);

}  // namespace losemb
