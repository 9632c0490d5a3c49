#include "losemb/report.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

namespace losemb {

using nlohmann::json;

namespace {

json buckets_json(std::span<const Bucket> buckets) {
  json out = json::array();
  for (const auto& b : buckets) {
    out.push_back({{"lower", b.lower},
                   {"upper", b.upper ? json(*b.upper) : json(nullptr)},
                   {"count", b.count},
                   {"fraction", b.fraction}});
  }
  return out;
}

json kl_json(const std::optional<KlShift>& kl) {
  if (!kl) return nullptr;
  return {{"value", kl->value},
          {"floored_dimensions", kl->floored_dimensions},
          {"estimator", kl->estimator}};
}

std::string fixed(double v, int precision) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(precision) << v;
  return ss.str();
}

}  // namespace

json to_json(const EvalReport& report) {
  json metrics = json::object();
  for (const auto& cell : metric_cells(report)) metrics[cell.metric] = cell.value;
  return {{"metrics", metrics},
          {"averaging", "macro"},
          {"evaluated_queries", report.evaluated_queries},
          {"skipped_queries", report.skipped_queries},
          {"missing_results", report.missing_results},
          {"unjudged_results", report.unjudged_results}};
}

json to_json(const DiagnosticsReport& report) {
  json out;
  json kl = json::object();
  if (report.kl_instructions) kl["instructions"] = kl_json(report.kl_instructions);
  if (report.kl_tools) kl["tools"] = kl_json(report.kl_tools);
  if (!kl.empty()) out["kl_divergence"] = kl;
  out["cooccurrence"] = {{"per_tool", report.cooccurrence.per_tool},
                         {"coarse", buckets_json(report.cooccurrence.coarse)},
                         {"fine", buckets_json(report.cooccurrence.fine)}};
  out["overlap"] = {{"top_n_per_instruction", report.overlap.per_instruction},
                    {"skipped", report.overlap.skipped},
                    {"mean_percent", report.overlap.mean},
                    {"median_percent", report.overlap.median},
                    {"deciles", buckets_json(report.overlap.deciles)}};
  return out;
}

json to_json(std::span<const DegradationRow> rows) {
  json out = json::array();
  for (const auto& row : rows) {
    json cells = json::object();
    for (const auto& c : row.cells) {
      cells[c.metric] = {{"value", c.value},
                         {"drop_percent", c.drop_percent ? json(*c.drop_percent) : json(nullptr)}};
    }
    out.push_back({{"variant", row.label}, {"unseen_percent", row.unseen_percent}, {"metrics", cells}});
  }
  return out;
}

json to_json(const RetrievalResult& result, const AlignedIndex& index) {
  json ranked = json::array();
  for (const auto& r : result.ranked) {
    ranked.push_back({{"tool", index.repository_id(r.tool)}, {"score", r.score}});
  }
  json flags = json::array();
  if (result.flags.constraint_fallback) flags.push_back("constraint_fallback");
  if (result.flags.alignment_fallback) flags.push_back("alignment_fallback");
  if (result.flags.fewer_than_k) flags.push_back("fewer_than_k");
  return {{"external_id", result.query_id},
          {"ranked", ranked},
          {"candidate_count", result.candidate_set.size()},
          {"flags", flags}};
}

std::string format_report_table(const EvalReport& report) {
  const auto cells = metric_cells(report);
  std::ostringstream ss;
  for (const auto& c : cells) ss << std::setw(9) << c.metric;
  ss << '\n';
  for (const auto& c : cells) ss << std::setw(9) << fixed(c.value, 4);
  ss << "\nqueries: " << report.evaluated_queries << " evaluated, " << report.skipped_queries
     << " skipped (empty ground truth), " << report.missing_results << " without results\n";
  return ss.str();
}

std::string format_degradation_table(std::span<const DegradationRow> rows) {
  if (rows.empty()) return {};
  std::ostringstream ss;
  ss << std::left << std::setw(24) << "variant" << std::setw(8) << "ratio";
  for (const auto& c : rows.front().cells) ss << std::setw(24) << c.metric;
  ss << '\n';
  for (const auto& row : rows) {
    ss << std::setw(24) << row.label << std::setw(8) << (std::to_string(row.unseen_percent) + "%");
    for (const auto& c : row.cells) {
      std::string cell = fixed(c.value, 4);
      if (c.drop_percent && row.unseen_percent != 0) cell += " (drop " + fixed(*c.drop_percent, 2) + "%)";
      ss << std::setw(24) << cell;
    }
    ss << '\n';
  }
  return ss.str();
}

void write_grid_csv(std::ostream& out, std::span<const DegradationRow> rows) {
  if (rows.empty()) return;
  out << "variant,unseen_percent";
  for (const auto& c : rows.front().cells) out << ',' << c.metric;
  for (const auto& c : rows.front().cells) out << ",drop_" << c.metric;
  out << '\n';
  out << std::setprecision(17);
  for (const auto& row : rows) {
    out << row.label << ',' << row.unseen_percent;
    for (const auto& c : row.cells) out << ',' << c.value;
    for (const auto& c : row.cells) {
      out << ',';
      if (c.drop_percent) out << *c.drop_percent;
    }
    out << '\n';
  }
}

}  // namespace losemb
