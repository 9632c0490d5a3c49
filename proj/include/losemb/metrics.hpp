#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace losemb {

/// |top-k ∩ relevant| / |relevant|. Relevance is binary and order inside
/// the top k is ignored. Throws ValidationError on k == 0 or empty relevant.
double recall_at_k(std::span<const std::string> ranked,
                   const std::unordered_set<std::string>& relevant, std::size_t k);

/// |top-k ∩ relevant| / k; missing slots count as misses.
double precision_at_k(std::span<const std::string> ranked,
                      const std::unordered_set<std::string>& relevant, std::size_t k);

struct CutoffMetrics {
  std::size_t k = 0;
  double recall = 0.0;
  double precision = 0.0;
};

/// Macro averages over judged queries.
struct EvalReport {
  std::vector<CutoffMetrics> cutoffs;
  double average = 0.0;  // mean of every recall and precision value
  std::size_t evaluated_queries = 0;
  std::size_t skipped_queries = 0;    // empty ground truth
  std::size_t missing_results = 0;    // judged but absent from results; scored as empty
  std::size_t unjudged_results = 0;   // results without ground truth; ignored
  double runtime_seconds = 0.0;

  double recall(std::size_t k) const;
  double precision(std::size_t k) const;
};

using RankedLists = std::map<std::string, std::vector<std::string>>;  // query -> ranked tool ids
using GroundTruth = std::map<std::string, std::vector<std::string>>;  // query -> relevant tool ids

inline const std::vector<std::size_t> kDefaultCutoffs = {3, 7};

/// Throws ValidationError when no query could be evaluated.
EvalReport evaluate(const RankedLists& results, const GroundTruth& truth,
                    std::span<const std::size_t> cutoffs = kDefaultCutoffs);

/// (base - value) / base as a percentage; nullopt when base is not positive.
std::optional<double> relative_drop_percent(double base, double value);

struct MetricCell {
  std::string metric;  // "R@3", "P@7", "Avg", ...
  double value = 0.0;
  std::optional<double> drop_percent;
};

struct DegradationRow {
  std::string label;
  unsigned unseen_percent = 0;
  std::vector<MetricCell> cells;
};

struct RatioReport {
  unsigned unseen_percent = 0;
  EvalReport report;
};

/// Named metric values of a report in display order: R@k..., P@k..., Avg.
std::vector<MetricCell> metric_cells(const EvalReport& report);

/// One row per ratio with drops relative to the 0% row, which must be present.
std::vector<DegradationRow> degradation_report(std::span<const RatioReport> reports,
                                               const std::string& label = "");

}  // namespace losemb
