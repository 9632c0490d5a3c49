#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include <json.hpp>

#include "losemb/aligned_index.hpp"
#include "losemb/diagnostics.hpp"
#include "losemb/metrics.hpp"
#include "losemb/retrieval.hpp"

namespace losemb {

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const DiagnosticsReport& report);
nlohmann::json to_json(std::span<const DegradationRow> rows);

/// One results-file record: {"external_id", "ranked":[{"tool","score"}],
/// "candidate_count", "flags":[...]}.
nlohmann::json to_json(const RetrievalResult& result, const AlignedIndex& index);

/// Human-readable aligned table of an evaluation report.
std::string format_report_table(const EvalReport& report);

/// Human-readable degradation table with relative drops next to each value.
std::string format_degradation_table(std::span<const DegradationRow> rows);

/// CSV grid, one row per (variant, ratio):
///   variant,unseen_percent,R@3,R@7,P@3,P@7,Avg,drop_R@3,...,drop_Avg
/// Undefined drops are left empty.
void write_grid_csv(std::ostream& out, std::span<const DegradationRow> rows);

}  // namespace losemb
