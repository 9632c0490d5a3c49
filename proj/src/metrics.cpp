#include "losemb/metrics.hpp"

#include <algorithm>

#include "losemb/error.hpp"

namespace losemb {

namespace {

std::size_t hits(std::span<const std::string> ranked, const std::unordered_set<std::string>& relevant,
                 std::size_t k) {
  std::size_t n = 0;
  const std::size_t limit = std::min(k, ranked.size());
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < limit; ++i) {
    if (relevant.contains(ranked[i]) && seen.insert(ranked[i]).second) ++n;
  }
  return n;
}

}  // namespace

double recall_at_k(std::span<const std::string> ranked,
                   const std::unordered_set<std::string>& relevant, std::size_t k) {
  if (k == 0) throw ValidationError("cutoff k must be at least 1");
  if (relevant.empty()) throw ValidationError("recall of an empty relevant set");
  return static_cast<double>(hits(ranked, relevant, k)) / static_cast<double>(relevant.size());
}

double precision_at_k(std::span<const std::string> ranked,
                      const std::unordered_set<std::string>& relevant, std::size_t k) {
  if (k == 0) throw ValidationError("cutoff k must be at least 1");
  return static_cast<double>(hits(ranked, relevant, k)) / static_cast<double>(k);
}

double EvalReport::recall(std::size_t k) const {
  for (const auto& c : cutoffs) {
    if (c.k == k) return c.recall;
  }
  throw ValidationError("report has no cutoff " + std::to_string(k));
}

double EvalReport::precision(std::size_t k) const {
  for (const auto& c : cutoffs) {
    if (c.k == k) return c.precision;
  }
  throw ValidationError("report has no cutoff " + std::to_string(k));
}

EvalReport evaluate(const RankedLists& results, const GroundTruth& truth,
                    std::span<const std::size_t> cutoffs) {
  if (cutoffs.empty()) throw ValidationError("no cutoffs requested");
  EvalReport report;
  for (std::size_t k : cutoffs) report.cutoffs.push_back({k, 0.0, 0.0});

  static const std::vector<std::string> kEmpty;
  for (const auto& [query, relevant_list] : truth) {
    if (relevant_list.empty()) {
      ++report.skipped_queries;
      continue;
    }
    const std::unordered_set<std::string> relevant(relevant_list.begin(), relevant_list.end());
    auto it = results.find(query);
    if (it == results.end()) ++report.missing_results;
    const auto& ranked = it == results.end() ? kEmpty : it->second;
    for (auto& c : report.cutoffs) {
      c.recall += recall_at_k(ranked, relevant, c.k);
      c.precision += precision_at_k(ranked, relevant, c.k);
    }
    ++report.evaluated_queries;
  }
  for (const auto& [query, ranked] : results) {
    if (!truth.contains(query)) ++report.unjudged_results;
  }
  if (report.evaluated_queries == 0) throw ValidationError("no query could be evaluated");

  const double n = static_cast<double>(report.evaluated_queries);
  double sum = 0.0;
  for (auto& c : report.cutoffs) {
    c.recall /= n;
    c.precision /= n;
  }
  for (const auto& c : report.cutoffs) sum += c.recall;
  for (const auto& c : report.cutoffs) sum += c.precision;
  report.average = sum / static_cast<double>(2 * report.cutoffs.size());
  return report;
}

std::optional<double> relative_drop_percent(double base, double value) {
  if (!(base > 0.0)) return std::nullopt;
  return (base - value) / base * 100.0;
}

std::vector<MetricCell> metric_cells(const EvalReport& report) {
  std::vector<MetricCell> cells;
  for (const auto& c : report.cutoffs) cells.push_back({"R@" + std::to_string(c.k), c.recall, {}});
  for (const auto& c : report.cutoffs) {
    cells.push_back({"P@" + std::to_string(c.k), c.precision, {}});
  }
  cells.push_back({"Avg", report.average, {}});
  return cells;
}

std::vector<DegradationRow> degradation_report(std::span<const RatioReport> reports,
                                               const std::string& label) {
  auto base = std::find_if(reports.begin(), reports.end(),
                           [](const RatioReport& r) { return r.unseen_percent == 0; });
  if (base == reports.end()) throw ValidationError("degradation report needs a 0% baseline");
  const auto base_cells = metric_cells(base->report);

  std::vector<DegradationRow> rows;
  for (const auto& r : reports) {
    DegradationRow row{label, r.unseen_percent, metric_cells(r.report)};
    if (row.cells.size() != base_cells.size()) {
      throw ValidationError("reports use different cutoffs");
    }
    for (std::size_t i = 0; i < row.cells.size(); ++i) {
      row.cells[i].drop_percent = relative_drop_percent(base_cells[i].value, row.cells[i].value);
    }
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(),
            [](const DegradationRow& a, const DegradationRow& b) { return a.unseen_percent < b.unseen_percent; });
  return rows;
}

}  // namespace losemb
