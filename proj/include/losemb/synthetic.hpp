#pragma once

#include <cstdint>

#include "losemb/corpus.hpp"

namespace losemb {

/// Shape of a generated corpus with clustered tool usage.
///
/// Each cluster is a functional domain with its own vocabulary. Its tools are
/// partitioned into workflows; an instruction invokes the tools of one
/// workflow. Instruction texts are drawn mostly from per-workflow task words
/// that never appear in tool descriptions, while tool descriptions mix their
/// own keywords, domain words and words shared across all clusters. Text
/// similarity between instructions therefore tracks tool usage more closely
/// than text similarity between instructions and tools.
struct SyntheticCorpusConfig {
  unsigned clusters = 8;
  unsigned tools_per_cluster = 12;
  unsigned instructions = 400;
  unsigned min_workflow = 2;
  unsigned max_workflow = 3;
  /// Chance that an instruction mentions one keyword of each invoked tool.
  double keyword_mention = 0.35;
  /// Chance that an instruction drops one tool of its workflow (kept >= 1).
  double drop_tool = 0.15;
  std::uint64_t seed = 0;
};

Corpus make_synthetic_corpus(const SyntheticCorpusConfig& config);

}  // namespace losemb
