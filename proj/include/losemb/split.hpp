#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "losemb/corpus.hpp"

namespace losemb {

/// Which fraction of test tools to hold out and how to draw them.
struct SplitSpec {
  double unseen_ratio = 0.0;  // one of 0.0, 0.1, 0.2, 0.3
  std::uint64_t seed = 0;
  /// Share of instructions without a pre-assigned side that go to the base
  /// test set. Drawn from `seed` alone, so the test set does not depend on
  /// the ratio.
  double test_fraction = 0.2;
};

struct Split {
  Corpus train;     // base-train instructions not touching unseen tools; all non-unseen tools
  Corpus test;      // transductively filtered base-test instructions; all tools
  Corpus held_out;  // base-train instructions dropped because they use an unseen tool
  std::vector<std::string> unseen_tool_ids;  // corpus tool order
  unsigned unseen_percent = 0;
};

/// Validates the ratio (throws ValidationError otherwise) and returns it as
/// an integer percentage.
unsigned unseen_percent(double ratio);

/// Base partition, transductive test filter, then ceil(ratio * |test tools|)
/// unseen tools drawn uniformly without replacement. The draw is a prefix of
/// one seeded permutation, so larger ratios extend smaller ones.
Split make_split(const Corpus& corpus, const SplitSpec& spec);

}  // namespace losemb
