#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "losemb/diagnostics.hpp"
#include "losemb/error.hpp"
#include "losemb/metrics.hpp"
#include "losemb/pipeline.hpp"
#include "losemb/report.hpp"
#include "losemb/split.hpp"
#include "losemb/synthetic.hpp"
#include "metric_fixtures.hpp"
#include "support.hpp"

using namespace losemb;

namespace {

std::unordered_set<std::string> uset(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

EvalReport report_with(double r3, double r7, double p3, double p7) {
  EvalReport r;
  r.cutoffs = {{3, r3, p3}, {7, r7, p7}};
  r.average = (r3 + r7 + p3 + p7) / 4;
  r.evaluated_queries = 1;
  return r;
}

}  // namespace

TEST_CASE("metric fixtures") {
  for (const auto& f : metric_fixtures()) {
    CAPTURE(f.k);
    CHECK(recall_at_k(f.ranked, uset(f.relevant), f.k) == doctest::Approx(f.recall).epsilon(1e-15));
    CHECK(precision_at_k(f.ranked, uset(f.relevant), f.k) ==
          doctest::Approx(f.precision).epsilon(1e-15));
  }
}

TEST_CASE("metrics: argument errors") {
  std::vector<std::string> r{"a"};
  CHECK_THROWS_AS(recall_at_k(r, {"a"}, 0), ValidationError);
  CHECK_THROWS_AS(precision_at_k(r, {"a"}, 0), ValidationError);
  CHECK_THROWS_AS(recall_at_k(r, {}, 3), ValidationError);
}

TEST_CASE("metrics: random cases against set arithmetic; bounds and order insensitivity") {
  Rng rng(1);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::string> pool = gen::ids("x", 15);
    rng.shuffle(pool);
    std::vector<std::string> ranked(pool.begin(), pool.begin() + static_cast<long>(rng.below(12)));
    std::set<std::string> rel;
    const auto nrel = 1 + rng.below(6);
    while (rel.size() < nrel) rel.insert(pool[rng.below(pool.size())]);
    const std::unordered_set<std::string> relevant(rel.begin(), rel.end());
    double prev_recall = 0.0;
    for (std::size_t k = 1; k <= 10; ++k) {
      const double r = recall_at_k(ranked, relevant, k);
      const double p = precision_at_k(ranked, relevant, k);
      CHECK(r == oracle::recall(ranked, rel, k));
      CHECK(p == oracle::precision(ranked, rel, k));
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      CHECK(r >= prev_recall);
      prev_recall = r;
      if (ranked.size() >= k) {
        const double hits = p * static_cast<double>(k);
        CHECK(std::abs(hits - std::round(hits)) <= 1e-12);
      }
      auto permuted = ranked;
      const auto prefix = std::min(k, permuted.size());
      std::vector<std::string> head(permuted.begin(), permuted.begin() + static_cast<long>(prefix));
      rng.shuffle(head);
      std::copy(head.begin(), head.end(), permuted.begin());
      CHECK(recall_at_k(permuted, relevant, k) == r);
      CHECK(precision_at_k(permuted, relevant, k) == p);
    }
  }
}

TEST_CASE("evaluate: single perfect query caps P@7 at 3/7") {
  RankedLists results{{"q", {"a", "b", "c"}}};
  GroundTruth truth{{"q", {"a", "b", "c"}}};
  auto r = evaluate(results, truth);
  CHECK(r.recall(3) == 1.0);
  CHECK(r.recall(7) == 1.0);
  CHECK(r.precision(3) == 1.0);
  CHECK(r.precision(7) == doctest::Approx(3.0 / 7).epsilon(1e-15));
  CHECK(r.average == doctest::Approx((3.0 + 3.0 / 7) / 4).epsilon(1e-15));
  CHECK_THROWS_AS(r.recall(5), ValidationError);
}

TEST_CASE("evaluate: two queries average; tallies") {
  RankedLists results{{"q1", {"a", "b", "c"}}, {"q2", {"x", "y", "z"}}, {"extra", {"a"}}};
  GroundTruth truth{{"q1", {"a", "d"}}, {"q2", {"z"}}, {"empty", {}}, {"absent", {"a"}}};
  auto r = evaluate(results, truth);
  CHECK(r.evaluated_queries == 3);
  CHECK(r.skipped_queries == 1);
  CHECK(r.missing_results == 1);
  CHECK(r.unjudged_results == 1);
  CHECK(r.recall(3) == doctest::Approx((0.5 + 1.0 + 0.0) / 3).epsilon(1e-15));
  CHECK(r.precision(3) == doctest::Approx((1.0 / 3 + 1.0 / 3 + 0.0) / 3).epsilon(1e-15));

  RankedLists two{{"q1", {"a", "b", "c"}}, {"q2", {"x", "y", "z"}}};
  GroundTruth known{{"q1", {"a", "d"}}, {"q2", {"z"}}};
  CHECK(evaluate(two, known).recall(3) == 0.75);

  CHECK_THROWS_AS(evaluate(results, GroundTruth{{"e", {}}}), ValidationError);
  std::vector<std::size_t> none;
  CHECK_THROWS_AS(evaluate(results, truth, none), ValidationError);
}

TEST_CASE("evaluate: randomized batches match per-query oracle averages") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    RankedLists results;
    GroundTruth truth;
    const auto tools = gen::ids("t", 20);
    std::vector<double> r3, r7, p3, p7;
    for (int q = 0; q < 30; ++q) {
      const std::string id = "q" + std::to_string(q);
      auto pool = tools;
      rng.shuffle(pool);
      std::vector<std::string> ranked(pool.begin(), pool.begin() + 7);
      rng.shuffle(pool);
      std::vector<std::string> rel(pool.begin(), pool.begin() + static_cast<long>(1 + rng.below(4)));
      results[id] = ranked;
      truth[id] = rel;
      std::set<std::string> rs(rel.begin(), rel.end());
      r3.push_back(oracle::recall(ranked, rs, 3));
      r7.push_back(oracle::recall(ranked, rs, 7));
      p3.push_back(oracle::precision(ranked, rs, 3));
      p7.push_back(oracle::precision(ranked, rs, 7));
    }
    auto mean = [](const std::vector<double>& v) {
      double s = 0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    auto r = evaluate(results, truth);
    CHECK(std::abs(r.recall(3) - mean(r3)) <= 1e-12);
    CHECK(std::abs(r.recall(7) - mean(r7)) <= 1e-12);
    CHECK(std::abs(r.precision(3) - mean(p3)) <= 1e-12);
    CHECK(std::abs(r.precision(7) - mean(p7)) <= 1e-12);
    CHECK(std::abs(r.average - (mean(r3) + mean(r7) + mean(p3) + mean(p7)) / 4) <= 1e-12);
    CHECK(to_json(r) == to_json(evaluate(results, truth)));
  }
}

TEST_CASE("relative_drop_percent") {
  CHECK(*relative_drop_percent(0.5, 0.5) == 0.0);
  CHECK(*relative_drop_percent(0.80, 0.72) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(*relative_drop_percent(0.5, 0.6) < 0.0);
  CHECK_FALSE(relative_drop_percent(0.0, 0.1).has_value());
}

TEST_CASE("degradation_report: drops against the 0% row") {
  std::vector<RatioReport> reports{{20, report_with(0.6, 0.8, 0.4, 0.2)},
                                   {0, report_with(0.8, 0.9, 0.5, 0.25)}};
  auto rows = degradation_report(reports, "LoSemB");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].unseen_percent == 0);
  CHECK(rows[1].unseen_percent == 20);
  CHECK(rows[1].label == "LoSemB");
  REQUIRE(rows[1].cells.size() == 5);
  CHECK(rows[1].cells[0].metric == "R@3");
  CHECK(rows[1].cells[4].metric == "Avg");
  for (std::size_t c = 0; c < 5; ++c) {
    CHECK(*rows[0].cells[c].drop_percent == 0.0);
    const double base = rows[0].cells[c].value, v = rows[1].cells[c].value;
    CHECK(std::abs(*rows[1].cells[c].drop_percent - (base - v) / base * 100.0) <= 1e-12);
  }
  std::vector<RatioReport> no_base{{10, report_with(0.5, 0.5, 0.5, 0.5)}};
  CHECK_THROWS_AS(degradation_report(no_base), ValidationError);

  auto table = format_degradation_table(rows);
  CHECK(table.find("LoSemB") != std::string::npos);
  CHECK(table.find("(drop 25.00%)") != std::string::npos);
  std::ostringstream csv;
  write_grid_csv(csv, rows);
  CHECK(csv.str().rfind("variant,unseen_percent,R@3,R@7,P@3,P@7,Avg,drop_R@3", 0) == 0);
  const double json_drop =
      to_json(std::span<const DegradationRow>(rows))[1]["metrics"]["R@3"]["drop_percent"];
  CHECK(json_drop == doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("KL: identical sets, closed-form 1-d case, convergence, flooring") {
  Rng rng(3);
  auto a = gen::matrix(rng, 50, 6);
  CHECK(kl_shift(a, a).value < 1e-9);

  EmbeddingMatrix seen(2, 1, {-1.0, 1.0}), unseen(2, 1, {0.0, 2.0});
  const auto kl = kl_shift(seen, unseen);
  CHECK(std::abs(kl.value - 0.5) <= 1e-6);
  CHECK(std::abs(kl.value - oracle::gaussian_kl(1, 1, 0, 1)) <= 1e-12);
  CHECK(kl.estimator == "diagonal-gaussian");

  // Box-Muller samples of N(0,1) and N(1, 4): KL(N(1,4) || N(0,1)) = 0.5 (ln(1/4) + 4 + 1 - 1).
  auto normal = [&] {
    return std::sqrt(-2 * std::log(1 - rng.uniform())) * std::cos(2 * M_PI * rng.uniform());
  };
  const double exact = oracle::gaussian_kl(1, 4, 0, 1);
  EmbeddingMatrix s, u;
  for (std::size_t i = 0; i < 200000; ++i) {
    std::vector<double> x{normal()}, y{1 + 2 * normal()};
    s.append_row(x);
    u.append_row(y);
  }
  CHECK(std::abs(kl_shift(s, u).value - exact) < 0.02);

  EmbeddingMatrix constant(3, 2, {1, 5, 1, 6, 1, 7});
  auto fit = fit_diagonal_gaussian(constant);
  CHECK(fit.floored_dimensions == 1);
  CHECK(fit.variance[0] == kVarianceFloor);
  CHECK(kl_shift(constant, constant).floored_dimensions == 2);
  CHECK_THROWS_AS(fit_diagonal_gaussian(EmbeddingMatrix(1, 2)), ValidationError);
  CHECK_THROWS_AS(kl_shift(EmbeddingMatrix(2, 2), EmbeddingMatrix(2, 3)), ValidationError);
}

TEST_CASE("KL is non-negative on random sets") {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    auto a = gen::matrix(rng, 2 + rng.below(20), 4);
    auto b = gen::matrix(rng, 2 + rng.below(20), 4);
    CHECK(kl_shift(a, b).value >= 0.0);
  }
}

TEST_CASE("cooccurrence: star, disjoint pairs, random scan, bucket partition") {
  std::vector<Interaction> star{{0, 0}, {0, 1}, {0, 2}};
  auto h = cooccurrence_histogram(build_graph(star, 1, 3));
  CHECK(h.per_tool == std::vector<std::uint32_t>{2, 2, 2});
  CHECK(h.coarse[0].count == 3);
  CHECK(h.coarse[0].fraction == 1.0);

  std::vector<Interaction> disjoint{{0, 0}, {1, 1}, {2, 2}};
  CHECK(cooccurrence_histogram(build_graph(disjoint, 3, 3)).per_tool ==
        std::vector<std::uint32_t>{0, 0, 0});

  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::uint32_t n = 60, m = 40;
    auto pairs = gen::pairs(rng, n, m, 150 + rng.below(300));
    auto g = build_graph(pairs, n, m);
    auto hist = cooccurrence_histogram(g);
    auto a = oracle::adjacency(pairs, n, m);
    for (std::uint32_t t = 0; t < m; ++t) {
      std::uint32_t count = 0;
      for (std::uint32_t u = 0; u < m; ++u) {
        if (u == t) continue;
        bool shared = false;
        for (std::uint32_t i = 0; i < n; ++i) shared |= a[i][n + t] != 0 && a[i][n + u] != 0;
        count += shared;
      }
      CHECK(hist.per_tool[t] == count);
    }
    for (const auto* buckets : {&hist.coarse, &hist.fine}) {
      std::size_t total = 0;
      CHECK(buckets->front().lower == 0);
      CHECK_FALSE(buckets->back().upper.has_value());
      for (std::size_t b = 0; b < buckets->size(); ++b) {
        total += (*buckets)[b].count;
        if (b + 1 < buckets->size()) CHECK(*(*buckets)[b].upper == (*buckets)[b + 1].lower);
      }
      CHECK(total == m);
    }
  }
  auto fine = cooccurrence_histogram(build_graph(star, 1, 3)).fine;
  CHECK(fine.size() == 11);
  CHECK(fine[0].upper == 5u);
  CHECK(fine[10].lower == 50);
}

TEST_CASE("overlap: duplicated pairs, unique tools, brute force") {
  // q0/q1 duplicate text and tools; q2 uses a tool nobody else uses.
  EmbeddingMatrix texts(3, 2, {1, 0, 1, 0, 0, 1});
  std::vector<std::vector<std::uint32_t>> tools{{0, 1}, {0, 1}, {2}};
  auto s = overlap_stats(tools, texts, 1);
  CHECK(s.per_instruction == std::vector<double>{100.0, 100.0, 0.0});

  std::vector<std::vector<std::uint32_t>> with_empty{{0}, {}, {0}};
  auto e = overlap_stats(with_empty, texts, 5);
  CHECK(e.skipped == 1);
  CHECK(e.per_instruction.size() == 2);
  CHECK_THROWS_AS(overlap_stats(with_empty, EmbeddingMatrix(2, 2), 5), ValidationError);

  SyntheticCorpusConfig sc;
  sc.seed = 6;
  sc.instructions = 120;
  auto corpus = make_synthetic_corpus(sc);
  auto table = encode_corpus(corpus, 64);
  auto index = build_training_index(corpus, table, PropagationConfig::uniform());
  std::vector<std::vector<std::uint32_t>> sets;
  EmbeddingMatrix tx;
  for (std::uint32_t i = 0; i < index.num_training_instructions(); ++i) {
    sets.push_back(index.graph().tools_of(i));
    tx.append_row(index.text().row(i));
  }
  auto got = overlap_stats(sets, tx, 5);
  REQUIRE(got.per_instruction.size() == sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    std::vector<double> scores;
    std::vector<std::uint32_t> ids;
    for (std::uint32_t j = 0; j < sets.size(); ++j) {
      if (j == i) continue;
      scores.push_back(oracle::cosine(tx.row(i), tx.row(j)));
      ids.push_back(j);
    }
    std::set<std::uint32_t> near;
    for (const auto& r : oracle::argsort(scores, ids, 5))
      for (auto t : sets[r.index]) near.insert(t);
    std::size_t hit = 0;
    for (auto t : sets[i]) hit += near.count(t);
    const double want = 100.0 * static_cast<double>(hit) / static_cast<double>(sets[i].size());
    CHECK(std::abs(got.per_instruction[i] - want) <= 1e-9);
    CHECK(got.per_instruction[i] >= 0.0);
    CHECK(got.per_instruction[i] <= 100.0);
  }
  std::size_t total = 0;
  for (const auto& b : got.deciles) total += b.count;
  CHECK(total == sets.size());
}

TEST_CASE("diagnose: KL section only with unseen rows; report is deterministic") {
  SyntheticCorpusConfig sc;
  sc.seed = 7;
  sc.instructions = 150;
  auto corpus = make_synthetic_corpus(sc);
  auto table = encode_corpus(corpus, 32);

  auto transductive = build_training_index(make_split(corpus, {0.0, 7}).train, table,
                                           PropagationConfig::uniform());
  auto d0 = diagnose(transductive);
  CHECK_FALSE(d0.kl_tools.has_value());
  CHECK_FALSE(d0.kl_instructions.has_value());
  CHECK_FALSE(to_json(d0).contains("kl_divergence"));

  auto split = make_split(corpus, {0.3, 7});
  IndexBuilder b(build_training_index(split.train, table, PropagationConfig::uniform()));
  b.add_batch(resolve_batch(unseen_batch(split), table), 5);
  auto index = std::move(b).seal();
  auto d = diagnose(index);
  REQUIRE(d.kl_tools.has_value());
  REQUIRE(d.kl_instructions.has_value());
  CHECK(d.kl_tools->value >= 0.0);
  CHECK(to_json(d) == to_json(diagnose(index)));
  CHECK(to_json(d)["kl_divergence"]["tools"]["estimator"] == "diagonal-gaussian");
}

TEST_CASE("report JSON and tables") {
  RankedLists results{{"q", {"a", "b", "c"}}};
  GroundTruth truth{{"q", {"a", "d"}}};
  auto r = evaluate(results, truth);
  auto j = to_json(r);
  CHECK(j["metrics"]["R@3"] == 0.5);
  CHECK(j["averaging"] == "macro");
  CHECK(j["evaluated_queries"] == 1);
  auto table = format_report_table(r);
  CHECK(table.find("R@3") != std::string::npos);
  CHECK(table.find("0.5000") != std::string::npos);
}
