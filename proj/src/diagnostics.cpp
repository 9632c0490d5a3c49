#include "losemb/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "losemb/error.hpp"
#include "losemb/similarity.hpp"

namespace losemb {

DiagonalGaussian fit_diagonal_gaussian(const EmbeddingMatrix& rows) {
  if (rows.rows() < 2) throw ValidationError("a Gaussian fit needs at least 2 rows");
  const std::size_t d = rows.dim();
  const double n = static_cast<double>(rows.rows());
  DiagonalGaussian g;
  g.mean.assign(d, 0.0);
  g.variance.assign(d, 0.0);
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) g.mean[c] += rows(r, c);
  }
  for (double& m : g.mean) m /= n;
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double x = rows(r, c) - g.mean[c];
      g.variance[c] += x * x;
    }
  }
  for (double& v : g.variance) {
    v /= n;
    if (v < kVarianceFloor) {
      v = kVarianceFloor;
      ++g.floored_dimensions;
    }
  }
  return g;
}

double diagonal_gaussian_kl(const DiagonalGaussian& from, const DiagonalGaussian& to) {
  if (from.mean.size() != to.mean.size()) throw ValidationError("KL of Gaussians of different dimension");
  double kl = 0.0;
  for (std::size_t c = 0; c < from.mean.size(); ++c) {
    const double diff = from.mean[c] - to.mean[c];
    kl += 0.5 * (std::log(to.variance[c] / from.variance[c]) +
                 (from.variance[c] + diff * diff) / to.variance[c] - 1.0);
  }
  return std::max(kl, 0.0);
}

KlShift kl_shift(const EmbeddingMatrix& seen, const EmbeddingMatrix& unseen) {
  if (seen.dim() != unseen.dim()) throw ValidationError("KL of embedding sets of different dimension");
  const auto p = fit_diagonal_gaussian(seen);
  const auto q = fit_diagonal_gaussian(unseen);
  return {diagonal_gaussian_kl(q, p), p.floored_dimensions + q.floored_dimensions};
}

namespace {

void fill_fractions(std::vector<Bucket>& buckets, std::size_t total) {
  for (auto& b : buckets) {
    b.fraction = total == 0 ? 0.0 : static_cast<double>(b.count) / static_cast<double>(total);
  }
}

void add_to(std::vector<Bucket>& buckets, double value) {
  for (auto& b : buckets) {
    if (value >= b.lower && (!b.upper || value < *b.upper)) {
      ++b.count;
      return;
    }
  }
}

}  // namespace

CooccurrenceHistogram cooccurrence_histogram(const LogicalGraph& graph) {
  CooccurrenceHistogram h;
  const std::uint32_t n = graph.num_instructions();
  for (std::uint32_t t = 0; t < graph.num_tools(); ++t) {
    std::unordered_set<std::uint32_t> partners;
    for (std::uint32_t q : graph.neighbors(graph.node_id({NodeKind::Tool, t}))) {
      for (std::uint32_t other : graph.neighbors(q)) {
        if (other - n != t) partners.insert(other - n);
      }
    }
    h.per_tool.push_back(static_cast<std::uint32_t>(partners.size()));
  }
  h.coarse = {{0, 10}, {10, 20}, {20, std::nullopt}};
  for (std::uint32_t lo = 0; lo < 50; lo += 5) h.fine.push_back({lo, lo + 5});
  h.fine.push_back({50, std::nullopt});
  for (auto c : h.per_tool) {
    add_to(h.coarse, c);
    add_to(h.fine, c);
  }
  fill_fractions(h.coarse, h.per_tool.size());
  fill_fractions(h.fine, h.per_tool.size());
  return h;
}

OverlapStats overlap_stats(std::span<const std::vector<std::uint32_t>> tool_sets,
                           const EmbeddingMatrix& texts, std::size_t top_n) {
  if (tool_sets.size() != texts.rows()) {
    throw ValidationError("overlap_stats: tool sets and text rows differ in count");
  }
  OverlapStats s;
  for (std::uint32_t lo = 0; lo < 100; lo += 10) s.deciles.push_back({lo, lo + 10});
  s.deciles.back().upper = std::nullopt;  // [90, 100] closes on the right

  std::vector<double> sq(texts.rows());
  for (std::size_t i = 0; i < texts.rows(); ++i) sq[i] = dot(texts.row(i), texts.row(i));

  for (std::size_t i = 0; i < tool_sets.size(); ++i) {
    if (tool_sets[i].empty()) {
      ++s.skipped;
      continue;
    }
    std::vector<Scored> scored;
    for (std::size_t j = 0; j < texts.rows(); ++j) {
      if (j == i) continue;
      scored.push_back({static_cast<std::uint32_t>(j),
                        cosine_with_sq_norms(texts.row(i), sq[i], texts.row(j), sq[j])});
    }
    std::unordered_set<std::uint32_t> pooled;
    for (const auto& nb : top_k(std::move(scored), top_n)) {
      pooled.insert(tool_sets[nb.index].begin(), tool_sets[nb.index].end());
    }
    const std::unordered_set<std::uint32_t> own(tool_sets[i].begin(), tool_sets[i].end());
    std::size_t covered = 0;
    for (auto t : own) covered += pooled.contains(t) ? 1 : 0;
    s.per_instruction.push_back(100.0 * static_cast<double>(covered) /
                                static_cast<double>(own.size()));
  }

  if (!s.per_instruction.empty()) {
    double sum = 0.0;
    for (double p : s.per_instruction) {
      sum += p;
      add_to(s.deciles, p);
    }
    s.mean = sum / static_cast<double>(s.per_instruction.size());
    auto sorted = s.per_instruction;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    s.median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  }
  fill_fractions(s.deciles, s.per_instruction.size());
  return s;
}

DiagnosticsReport diagnose(const AlignedIndex& index, std::size_t top_n) {
  DiagnosticsReport report;
  const auto& g = index.graph();
  report.cooccurrence = cooccurrence_histogram(g);

  std::vector<std::vector<std::uint32_t>> tool_sets;
  EmbeddingMatrix instruction_text(0, index.dim());
  for (std::uint32_t i = 0; i < g.num_instructions(); ++i) {
    tool_sets.push_back(g.tools_of(i));
    instruction_text.append_row(index.training_instruction_text(i));
  }
  report.overlap = overlap_stats(tool_sets, instruction_text, top_n);

  auto shift = [&](const std::vector<UnseenRow>& unseen, auto seen_row,
                   std::size_t seen_count) -> std::optional<KlShift> {
    if (unseen.size() < 2 || seen_count < 2) return std::nullopt;
    EmbeddingMatrix seen(0, index.dim()), fresh(0, index.dim());
    for (std::size_t i = 0; i < seen_count; ++i) seen.append_row(seen_row(i));
    for (const auto& row : unseen) fresh.append_row(row.text);
    return kl_shift(seen, fresh);
  };
  report.kl_tools = shift(
      index.unseen_tools(),
      [&](std::size_t t) { return index.training_tool_text(static_cast<std::uint32_t>(t)); },
      g.num_tools());
  report.kl_instructions = shift(
      index.unseen_instructions(),
      [&](std::size_t i) { return index.training_instruction_text(static_cast<std::uint32_t>(i)); },
      g.num_instructions());
  return report;
}

}  // namespace losemb
