#include <doctest.h>

#include <set>

#include "losemb/error.hpp"
#include "losemb/pipeline.hpp"
#include "losemb/retrieval.hpp"
#include "losemb/split.hpp"
#include "losemb/synthetic.hpp"
#include "support.hpp"

using namespace losemb;

namespace {

std::vector<std::uint32_t> all_tools(const AlignedIndex& index) {
  std::vector<std::uint32_t> v(index.repository_size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<std::uint32_t>(i);
  return v;
}

// Brute-force constraint: full sort of oracle cosines over the pool, union of tools.
std::set<std::uint32_t> oracle_constraint(std::span<const double> q, const AlignedIndex& index,
                                          unsigned t) {
  std::vector<double> scores;
  std::vector<std::uint32_t> ids;
  for (std::uint32_t i = 0; i < index.instruction_pool_size(); ++i) {
    scores.push_back(oracle::cosine(q, index.pool_instruction_text(i)));
    ids.push_back(i);
  }
  std::set<std::uint32_t> tools;
  for (const auto& r : oracle::argsort(scores, ids, t))
    for (auto tool : index.pool_instruction_tools(r.index)) tools.insert(tool);
  return tools;
}

std::vector<oracle::Ranked> oracle_rank(std::span<const double> q,
                                        const std::vector<std::uint32_t>& candidates,
                                        const AlignedIndex& index, unsigned k, bool text) {
  std::vector<double> scores;
  for (auto t : candidates) scores.push_back(oracle::cosine(q, text ? index.tool_text(t) : index.tool_graph(t)));
  return oracle::argsort(scores, candidates, k);
}

// Index from a synthetic split with unseen rows inserted.
struct Fixture {
  Corpus corpus;
  EmbeddingTable table;
  Split split;
  AlignedIndex index;
};

Fixture synthetic_fixture(double ratio, std::uint64_t seed = 5) {
  SyntheticCorpusConfig sc;
  sc.seed = seed;
  sc.instructions = 200;
  Fixture f;
  f.corpus = make_synthetic_corpus(sc);
  f.table = encode_corpus(f.corpus, 64);
  f.split = make_split(f.corpus, {ratio, seed});
  IndexBuilder b(build_training_index(f.split.train, f.table, PropagationConfig::uniform()));
  b.add_batch(resolve_batch(unseen_batch(f.split), f.table), 5);
  f.index = std::move(b).seal();
  return f;
}

}  // namespace

TEST_CASE("RetrievalConfig validation") {
  RetrievalConfig c;
  CHECK_NOTHROW(c.validate());
  c.top_k = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.similar_instructions = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.candidate_instructions = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("logical_constraint: nearest instruction's tools") {
  // q0-{t3,t7}, q1-{t1}
  std::vector<Interaction> p{{0, 3}, {0, 7}, {1, 1}};
  std::vector<double> v(10 * 2, 0.0);
  v[0] = 1;  // q0 = (1,0)
  v[3] = 1;  // q1 = (0,1)
  for (int t = 2; t < 10; ++t) v[t * 2] = 1;
  auto index = AlignedIndex::build(build_graph(p, 2, 8), EmbeddingMatrix(10, 2, v), {"q0", "q1"},
                                   gen::ids("t", 8), PropagationConfig::uniform());
  std::vector<double> q{0.9, 0.1};
  auto c = logical_constraint(q, index, 1);
  CHECK(c.tools == std::vector<std::uint32_t>{3, 7});
  REQUIRE(c.instructions.size() == 1);
  CHECK(c.instructions[0].index == 0);

  auto exact = logical_constraint(index.pool_instruction_text(1), index, 1);
  CHECK(exact.tools == std::vector<std::uint32_t>{1});
  CHECK(exact.instructions[0].score == 1.0);
  CHECK_THROWS_AS(logical_constraint(q, index, 0), ValidationError);
}

TEST_CASE("logical_constraint: unseen instructions contribute their linked tools") {
  auto f = synthetic_fixture(0.3);
  REQUIRE_FALSE(f.index.unseen_instructions().empty());
  const auto pool_row = f.index.num_training_instructions();
  auto c = logical_constraint(f.index.pool_instruction_text(pool_row), f.index, 1);
  REQUIRE(c.instructions.size() == 1);
  CHECK(c.instructions[0].index == pool_row);
  CHECK(c.tools == f.index.unseen_instructions()[0].linked_tools);
}

TEST_CASE("logical_constraint: brute-force oracle and monotone in T") {
  auto f = synthetic_fixture(0.2);
  Rng rng(1);
  for (int trial = 0; trial < 40; ++trial) {
    auto q = gen::vec(rng, 64);
    std::vector<std::uint32_t> previous;
    for (unsigned t = 1; t <= 8; ++t) {
      auto got = logical_constraint(q, f.index, t).tools;
      auto want = oracle_constraint(q, f.index, t);
      CHECK(got == std::vector<std::uint32_t>(want.begin(), want.end()));
      CHECK(std::includes(got.begin(), got.end(), previous.begin(), previous.end()));
      previous = got;
    }
  }
}

TEST_CASE("embed_query delegates to instruction alignment without modifying the index") {
  auto f = synthetic_fixture(0.1);
  const auto before = f.index;
  auto q = f.table.at(f.split.test.instructions[0].id);
  auto a = embed_query(q, f.index, 5);
  auto b = align_unseen_instruction(q, f.index, 5);
  CHECK(a.graph == b.graph);
  CHECK(f.index == before);
}

TEST_CASE("rank_tools: single candidate, exact match, errors") {
  Rng rng(2);
  auto index = gen::index(rng, 10, 20, 30, 8);
  auto q = gen::vec(rng, 8);
  std::vector<std::uint32_t> one{13};
  auto r = rank_tools(q, one, index, 3, ToolSpace::Graph);
  REQUIRE(r.ranked.size() == 1);
  CHECK(r.ranked[0].tool == 13);
  CHECK(r.fewer_than_k);

  auto target = index.tool_graph(4);
  auto all = all_tools(index);
  auto best = rank_tools(std::vector<double>(target.begin(), target.end()), all, index, 1, ToolSpace::Graph);
  CHECK(best.ranked[0].tool == 4);
  CHECK(best.ranked[0].score == 1.0);
  CHECK_FALSE(best.fewer_than_k);

  CHECK_THROWS_AS(rank_tools(q, {}, index, 3, ToolSpace::Graph), ValidationError);
  CHECK_THROWS_AS(rank_tools(q, all, index, 0, ToolSpace::Graph), ValidationError);
  std::vector<std::uint32_t> out_of_range{99};
  CHECK_THROWS_AS(rank_tools(q, out_of_range, index, 1, ToolSpace::Graph), ValidationError);
}

TEST_CASE("rank_tools: 100 candidates, K=7 matches exhaustive argsort with ties") {
  Rng rng(3);
  const std::uint32_t n = 30, m = 100;
  auto g = build_graph(gen::pairs(rng, n, m, 0), n, m);  // no edges: graph == text
  auto text = gen::matrix(rng, n + m, 6);
  // Duplicate some tool rows so exact ties occur.
  for (int d = 0; d < 20; ++d) {
    const auto src = n + rng.below(m), dst = n + rng.below(m);
    for (std::size_t c = 0; c < 6; ++c) text(dst, c) = text(src, c);
  }
  auto index = AlignedIndex::build(g, text, gen::ids("q", n), gen::ids("t", m),
                                   PropagationConfig::uniform());
  auto cands = all_tools(index);
  for (int trial = 0; trial < 50; ++trial) {
    auto q = gen::vec(rng, 6);
    auto got = rank_tools(q, cands, index, 7, ToolSpace::Graph).ranked;
    auto want = oracle_rank(q, cands, index, 7, false);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].tool == want[i].index);
      CHECK(std::abs(got[i].score - want[i].score) <= 1e-12);
    }
  }
}

TEST_CASE("retrieve: all ablations reduce to the flat text-cosine baseline") {
  auto f = synthetic_fixture(0.3);
  EmbeddingMatrix repo_text;
  for (std::size_t t = 0; t < f.index.repository_size(); ++t) repo_text.append_row(f.index.tool_text(t));
  RetrievalConfig c;
  c.top_k = 7;
  c.ablations = Ablations::all();
  for (const auto& inst : f.split.test.instructions) {
    auto q = f.table.at(inst.id);
    auto r = retrieve(inst.id, q, f.index, c);
    CHECK(r.candidate_set == all_tools(f.index));
    CHECK(r.ranked == flat_cosine_retrieve(q, repo_text, 7));
  }
}

TEST_CASE("retrieve: on a transductive index the tool-transfer switch changes nothing") {
  auto f = synthetic_fixture(0.0);
  REQUIRE(f.index.unseen_tools().empty());
  RetrievalConfig on, off;
  off.ablations.disable_tool_transfer = true;
  for (const auto& inst : f.split.test.instructions) {
    auto q = f.table.at(inst.id);
    CHECK(retrieve(inst.id, q, f.index, on) == retrieve(inst.id, q, f.index, off));
  }
}

TEST_CASE("retrieve: composed oracle on a synthetic corpus, for every ablation combination") {
  auto f = synthetic_fixture(0.3, 9);
  for (int mask = 0; mask < 8; ++mask) {
    RetrievalConfig c;
    c.top_k = 7;
    c.ablations = {(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0};
    for (std::size_t i = 0; i < f.split.test.instructions.size(); i += 3) {
      const auto& inst = f.split.test.instructions[i];
      auto q = f.table.at(inst.id);
      auto got = retrieve(inst.id, q, f.index, c);

      std::vector<std::uint32_t> cands = all_tools(f.index);
      if (!c.ablations.disable_relational_constraint) {
        auto s = oracle_constraint(q, f.index, c.similar_instructions);
        if (!s.empty()) cands.assign(s.begin(), s.end());
      }
      CHECK(got.candidate_set == cands);

      std::vector<double> scores;
      std::vector<double> query(q.begin(), q.end());
      if (!c.ablations.disable_instruction_transfer) query = embed_query(q, f.index, 5).graph;
      for (auto t : cands) {
        const bool text = c.ablations.disable_instruction_transfer ||
                          (c.ablations.disable_tool_transfer && f.index.is_unseen_tool(t));
        scores.push_back(oracle::cosine(query, text ? f.index.tool_text(t) : f.index.tool_graph(t)));
      }
      auto want = oracle::argsort(scores, cands, 7);
      REQUIRE(got.ranked.size() == want.size());
      for (std::size_t k = 0; k < want.size(); ++k) {
        CHECK(got.ranked[k].tool == want[k].index);
        CHECK(std::abs(got.ranked[k].score - want[k].score) <= 1e-12);
      }
    }
  }
}

TEST_CASE("retrieve: ranked tools lie in the candidate set and are sound") {
  auto f = synthetic_fixture(0.2);
  RetrievalConfig c;
  c.top_k = 7;
  for (const auto& inst : f.split.test.instructions) {
    auto q = f.table.at(inst.id);
    auto r = retrieve(inst.id, q, f.index, c);
    auto constraint = logical_constraint(q, f.index, c.similar_instructions);
    std::set<std::uint32_t> reachable;
    for (const auto& s : constraint.instructions)
      for (auto t : f.index.pool_instruction_tools(s.index)) reachable.insert(t);
    for (std::size_t k = 0; k < r.ranked.size(); ++k) {
      CHECK(std::binary_search(r.candidate_set.begin(), r.candidate_set.end(), r.ranked[k].tool));
      CHECK(reachable.count(r.ranked[k].tool) == 1);
      if (k > 0) CHECK(r.ranked[k - 1].score >= r.ranked[k].score);
    }
    CHECK(r.flags.fewer_than_k == (r.candidate_set.size() < 7));
  }
}

TEST_CASE("retrieve: empty constraint falls back to the repository with a flag") {
  // Instruction without tools: the constraint is empty.
  auto index = AlignedIndex::build(build_graph({}, 1, 2), EmbeddingMatrix(3, 2, {1, 0, 1, 0, 0, 1}),
                                   {"q"}, {"a", "b"}, PropagationConfig::uniform());
  std::vector<double> q{1, 0};
  auto r = retrieve("x", q, index, {});
  CHECK(r.flags.constraint_fallback);
  CHECK(r.candidate_set == std::vector<std::uint32_t>{0, 1});
  REQUIRE(r.ranked.size() == 2);
  CHECK(r.ranked[0].tool == 0);
}

TEST_CASE("retrieve: alignment fallback and empty repository") {
  auto no_instructions = AlignedIndex::build(build_graph({}, 0, 1), EmbeddingMatrix(1, 2, {1, 0}),
                                             {}, {"only"}, PropagationConfig::uniform());
  std::vector<double> q{0.5, 0.5};
  RetrievalConfig c;
  c.top_k = 1;
  auto r = retrieve("x", q, no_instructions, c);
  CHECK(r.flags.alignment_fallback);
  CHECK(r.flags.constraint_fallback);
  REQUIRE(r.ranked.size() == 1);
  CHECK(r.ranked[0].tool == 0);

  auto empty = AlignedIndex::build(build_graph({}, 1, 0), EmbeddingMatrix(1, 2, {1, 0}), {"q"}, {},
                                   PropagationConfig::uniform());
  CHECK_THROWS_AS(retrieve("x", q, empty, c), ValidationError);
}

TEST_CASE("retrieve is deterministic and retrieve_all is independent of threads") {
  auto f = synthetic_fixture(0.3);
  auto queries = test_queries(f.split.test);
  RetrievalConfig c;
  c.top_k = 7;
  auto one = retrieve_all(queries, f.table, f.index, c, 1);
  auto many = retrieve_all(queries, f.table, f.index, c, 6);
  auto again = retrieve_all(queries, f.table, f.index, c, 1);
  CHECK(one == many);
  CHECK(one == again);
}
