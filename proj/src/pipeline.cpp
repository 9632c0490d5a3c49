#include "losemb/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

#include "losemb/error.hpp"
#include "losemb/hash_encoder.hpp"
#include "losemb/parallel.hpp"

namespace losemb {

EmbeddingTable encode_corpus(const Corpus& corpus, std::size_t dim) {
  EmbeddingMatrix m;
  std::vector<std::string> ids;
  for (const auto& inst : corpus.instructions) {
    m.append_row(hash_encoder(inst.text, dim));
    ids.push_back(inst.id);
  }
  for (const auto& tool : corpus.tools) {
    m.append_row(hash_encoder(tool_document(tool), dim));
    ids.push_back(tool.id);
  }
  return EmbeddingTable(std::move(m), std::move(ids));
}

AlignedIndex build_training_index(const Corpus& train, const EmbeddingTable& embeddings,
                                  const PropagationConfig& config, unsigned threads) {
  const auto n = static_cast<std::uint32_t>(train.instructions.size());
  const auto m = static_cast<std::uint32_t>(train.tools.size());
  std::map<std::string, std::uint32_t> tool_index;
  std::vector<std::string> instruction_ids, tool_ids;
  for (std::uint32_t t = 0; t < m; ++t) {
    tool_index.emplace(train.tools[t].id, t);
    tool_ids.push_back(train.tools[t].id);
  }
  std::vector<Interaction> edges;
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto& inst = train.instructions[i];
    if (tool_index.count(inst.id)) {
      throw ValidationError("id '" + inst.id + "' names both an instruction and a tool");
    }
    instruction_ids.push_back(inst.id);
    for (const auto& tid : inst.tool_ids) {
      auto it = tool_index.find(tid);
      if (it == tool_index.end()) {
        throw ValidationError("instruction '" + inst.id + "' uses unknown tool '" + tid + "'");
      }
      edges.push_back({i, it->second});
    }
  }
  auto graph = build_graph(edges, n, m);

  std::vector<std::string> missing;
  for (const auto* ids : {&instruction_ids, &tool_ids}) {
    for (const auto& id : *ids) {
      if (!embeddings.find(id)) missing.push_back(id);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += (i ? ", " : "") + missing[i];
    if (missing.size() > 20) list += ", ...";
    throw ValidationError(std::to_string(missing.size()) + " corpus ids have no embedding: " + list);
  }

  EmbeddingMatrix text;
  for (const auto& id : instruction_ids) text.append_row(embeddings.at(id));
  for (const auto& id : tool_ids) text.append_row(embeddings.at(id));
  return AlignedIndex::build(std::move(graph), std::move(text), std::move(instruction_ids),
                             std::move(tool_ids), config, threads);
}

std::vector<UnseenRecord> unseen_batch(const Split& split) {
  std::vector<UnseenRecord> out;
  for (const auto& tid : split.unseen_tool_ids) {
    UnseenRecord r;
    r.external_id = tid;
    r.kind = UnseenKind::Tool;
    r.text_embedding_ref = tid;
    for (const auto& inst : split.held_out.instructions) {
      if (std::find(inst.tool_ids.begin(), inst.tool_ids.end(), tid) != inst.tool_ids.end()) {
        r.associated_instruction_refs.push_back(inst.id);
      }
    }
    out.push_back(std::move(r));
  }
  for (const auto& inst : split.held_out.instructions) {
    UnseenRecord r;
    r.external_id = inst.id;
    r.kind = UnseenKind::Instruction;
    r.text_embedding_ref = inst.id;
    r.tool_ids = inst.tool_ids;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<QueryRecord> test_queries(const Corpus& test) {
  std::vector<QueryRecord> out;
  for (const auto& inst : test.instructions) out.push_back({inst.id, inst.id});
  return out;
}

GroundTruth test_ground_truth(const Corpus& test) {
  GroundTruth truth;
  for (const auto& inst : test.instructions) truth.emplace(inst.id, inst.tool_ids);
  return truth;
}

std::vector<RetrievalResult> retrieve_all(const std::vector<QueryRecord>& queries,
                                          const EmbeddingTable& embeddings,
                                          const AlignedIndex& index,
                                          const RetrievalConfig& config, unsigned threads) {
  config.validate();
  std::vector<RetrievalResult> out(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t q) {
    out[q] = retrieve(queries[q].external_id, embeddings.at(queries[q].text_embedding_ref), index,
                      config);
  });
  return out;
}

RankedLists ranked_lists(const std::vector<RetrievalResult>& results, const AlignedIndex& index) {
  RankedLists out;
  for (const auto& r : results) {
    auto& list = out[r.query_id];
    for (const auto& t : r.ranked) list.push_back(index.repository_id(t.tool));
  }
  return out;
}

std::vector<RatioRun> run_experiment(const Corpus& corpus, const EmbeddingTable& embeddings,
                                     const ExperimentConfig& config) {
  if (config.cutoffs.empty()) throw ValidationError("at least one cutoff is required");
  RetrievalConfig retrieval = config.retrieval;
  retrieval.top_k = static_cast<unsigned>(
      std::max<std::size_t>(retrieval.top_k,
                            *std::max_element(config.cutoffs.begin(), config.cutoffs.end())));
  RetrievalConfig flat = retrieval;
  flat.ablations = Ablations::all();

  std::vector<RatioRun> runs;
  for (double ratio : config.ratios) {
    const auto split = make_split(corpus, {ratio, config.seed, config.test_fraction});
    IndexBuilder builder(
        build_training_index(split.train, embeddings, config.propagation, config.threads));
    builder.add_batch(resolve_batch(unseen_batch(split), embeddings),
                      retrieval.candidate_instructions);
    const auto index = std::move(builder).seal();

    const auto queries = test_queries(split.test);
    const auto truth = test_ground_truth(split.test);
    RatioRun run;
    run.unseen_percent = split.unseen_percent;
    for (auto [cfg, report] : {std::pair{&retrieval, &run.losemb}, std::pair{&flat, &run.baseline}}) {
      const auto start = std::chrono::steady_clock::now();
      const auto results = retrieve_all(queries, embeddings, index, *cfg, config.threads);
      *report = evaluate(ranked_lists(results, index), truth, config.cutoffs);
      report->runtime_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace losemb
