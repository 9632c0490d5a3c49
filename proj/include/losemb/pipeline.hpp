#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "losemb/aligned_index.hpp"
#include "losemb/batch_io.hpp"
#include "losemb/corpus.hpp"
#include "losemb/embedding_file.hpp"
#include "losemb/metrics.hpp"
#include "losemb/retrieval.hpp"
#include "losemb/split.hpp"

namespace losemb {

/// Hash-encodes every instruction text and tool document of `corpus`.
/// Instruction and tool ids must not collide.
EmbeddingTable encode_corpus(const Corpus& corpus, std::size_t dim);

/// Graph over the corpus's instructions and tools in list order; text rows
/// come from `embeddings` by id. Throws ValidationError on a missing row or
/// an id shared by an instruction and a tool.
AlignedIndex build_training_index(const Corpus& train, const EmbeddingTable& embeddings,
                                  const PropagationConfig& config, unsigned threads = 1);

/// Unseen tools of a split, each bridged through the held-out instructions
/// that invoke it, followed by the held-out instructions with all of their
/// tools.
std::vector<UnseenRecord> unseen_batch(const Split& split);

/// One query per test instruction, keyed and embedded by the instruction id.
std::vector<QueryRecord> test_queries(const Corpus& test);
GroundTruth test_ground_truth(const Corpus& test);

/// Runs `retrieve` for every query; output order follows `queries`.
std::vector<RetrievalResult> retrieve_all(const std::vector<QueryRecord>& queries,
                                          const EmbeddingTable& embeddings,
                                          const AlignedIndex& index,
                                          const RetrievalConfig& config, unsigned threads = 1);

RankedLists ranked_lists(const std::vector<RetrievalResult>& results, const AlignedIndex& index);

/// Split, build, insert and evaluate one ratio end to end.
struct RatioRun {
  unsigned unseen_percent = 0;
  EvalReport losemb;
  EvalReport baseline;  // flat text cosine over the whole repository
};

struct ExperimentConfig {
  std::vector<double> ratios = {0.0, 0.1, 0.2, 0.3};
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  PropagationConfig propagation = PropagationConfig::uniform();
  RetrievalConfig retrieval;  // top_k is raised to the largest cutoff
  std::vector<std::size_t> cutoffs = kDefaultCutoffs;
  unsigned threads = 1;
};

std::vector<RatioRun> run_experiment(const Corpus& corpus, const EmbeddingTable& embeddings,
                                     const ExperimentConfig& config);

}  // namespace losemb
