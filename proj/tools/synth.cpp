// Writes a clustered synthetic corpus for demos and experiments.

#include <iostream>

#include <CLI11.hpp>

#include "losemb/corpus.hpp"
#include "losemb/error.hpp"
#include "losemb/synthetic.hpp"

int main(int argc, char** argv) {
  losemb::SyntheticCorpusConfig config;
  std::string out;
  CLI::App app{"Generate a synthetic tool-retrieval corpus"};
  app.add_option("--seed", config.seed, "Random seed");
  app.add_option("--clusters", config.clusters, "Tool clusters")->check(CLI::PositiveNumber);
  app.add_option("--tools-per-cluster", config.tools_per_cluster, "Tools in each cluster")
      ->check(CLI::PositiveNumber);
  app.add_option("--instructions", config.instructions, "Instruction count")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Corpus JSONL")->required();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    losemb::save_corpus(out, losemb::make_synthetic_corpus(config));
  } catch (const losemb::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
