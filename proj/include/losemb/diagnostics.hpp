#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "losemb/aligned_index.hpp"
#include "losemb/embedding_matrix.hpp"
#include "losemb/graph.hpp"

namespace losemb {

inline constexpr double kVarianceFloor = 1e-8;

/// Per-dimension mean and population variance.
struct DiagonalGaussian {
  std::vector<double> mean;
  std::vector<double> variance;
  std::size_t floored_dimensions = 0;  // variances raised to kVarianceFloor
};

/// Throws ValidationError with fewer than 2 rows.
DiagonalGaussian fit_diagonal_gaussian(const EmbeddingMatrix& rows);

/// KL(from || to) between two diagonal Gaussians, summed over dimensions.
double diagonal_gaussian_kl(const DiagonalGaussian& from, const DiagonalGaussian& to);

struct KlShift {
  double value = 0.0;
  std::size_t floored_dimensions = 0;
  std::string estimator = "diagonal-gaussian";
};

/// KL(unseen || seen) under diagonal-Gaussian fits of both sets.
KlShift kl_shift(const EmbeddingMatrix& seen, const EmbeddingMatrix& unseen);

struct Bucket {
  std::uint32_t lower = 0;
  std::optional<std::uint32_t> upper;  // exclusive; none = unbounded
  std::size_t count = 0;
  double fraction = 0.0;
};

struct CooccurrenceHistogram {
  std::vector<std::uint32_t> per_tool;  // distinct co-occurring tools per tool
  std::vector<Bucket> coarse;           // [0,10) [10,20) [20,inf)
  std::vector<Bucket> fine;             // width 5 up to 50, then [50,inf)
};

/// Two tools co-occur when some instruction invokes both.
CooccurrenceHistogram cooccurrence_histogram(const LogicalGraph& graph);

struct OverlapStats {
  /// Per instruction with a non-empty tool set: percentage of its tools found
  /// among the tools of its top-n most text-similar other instructions.
  std::vector<double> per_instruction;
  std::size_t skipped = 0;  // instructions without tools
  double mean = 0.0;
  double median = 0.0;
  std::vector<Bucket> deciles;  // [0,10) ... [80,90) [90,100]
};

/// `tool_sets[i]` are the tools of instruction i, `texts` row i its text
/// embedding. Ties in similarity go to the lower index.
OverlapStats overlap_stats(std::span<const std::vector<std::uint32_t>> tool_sets,
                           const EmbeddingMatrix& texts, std::size_t top_n = 5);

struct DiagnosticsReport {
  std::optional<KlShift> kl_instructions;  // absent without >= 2 unseen instructions
  std::optional<KlShift> kl_tools;         // absent without >= 2 unseen tools
  CooccurrenceHistogram cooccurrence;
  OverlapStats overlap;
};

/// Training graph statistics plus seen/unseen shift of the inserted rows.
DiagnosticsReport diagnose(const AlignedIndex& index, std::size_t top_n = 5);

}  // namespace losemb
