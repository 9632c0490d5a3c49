#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "losemb/batch_io.hpp"
#include "losemb/corpus.hpp"
#include "losemb/diagnostics.hpp"
#include "losemb/digest.hpp"
#include "losemb/embedding_file.hpp"
#include "losemb/error.hpp"
#include "losemb/hash_encoder.hpp"
#include "losemb/index_io.hpp"
#include "losemb/metrics.hpp"
#include "losemb/pipeline.hpp"
#include "losemb/report.hpp"
#include "losemb/retrieval.hpp"
#include "losemb/split.hpp"

namespace losemb::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string manifest_out;
};

// Run record written next to every command's outputs.
class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)) {}

  json& config() { return config_; }
  void input(const fs::path& p) { inputs_.push_back(p); }
  void artifact(const fs::path& p) { artifacts_.push_back(p); }
  void timing(const std::string& phase, double seconds) { timings_[phase] = seconds; }

  void write(const fs::path& path, std::uint64_t seed) const {
    json doc = {{"command", command_}, {"config", config_}, {"seed", seed}};
    doc["inputs"] = digests(inputs_);
    doc["artifacts"] = digests(artifacts_);
    doc["timings_seconds"] = timings_;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write manifest " + path.string());
    out << doc.dump(2) << '\n';
  }

 private:
  static json digests(const std::vector<fs::path>& paths) {
    json out = json::array();
    for (const auto& p : paths) out.push_back({{"path", p.string()}, {"sha256", file_sha256(p)}});
    return out;
  }

  std::string command_;
  json config_ = json::object();
  std::vector<fs::path> inputs_;
  std::vector<fs::path> artifacts_;
  json timings_ = json::object();
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

fs::path manifest_path(const Globals& g, const fs::path& fallback) {
  return g.manifest_out.empty() ? fallback : fs::path(g.manifest_out);
}

fs::path sibling_manifest(const fs::path& artifact) {
  return fs::path(artifact.string() + ".manifest.json");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

// ---- split ---------------------------------------------------------------

struct SplitArgs {
  std::string corpus, out_dir, encoder;
  double ratio = 0.0;
  double test_fraction = 0.2;
  std::size_t dim = 256;
};

void cmd_split(const SplitArgs& a, const Globals& g, std::ostream& out) {
  Stopwatch clock;
  Manifest m("split");
  m.input(a.corpus);
  const auto corpus = load_corpus(a.corpus);
  if (!a.encoder.empty() && a.encoder != "hash") {
    throw ValidationError("unknown encoder '" + a.encoder + "'; only 'hash' is built in");
  }
  const auto split = make_split(corpus, {a.ratio, g.seed, a.test_fraction});

  const fs::path dir = a.out_dir;
  fs::create_directories(dir);
  auto emit = [&](const std::string& name, auto&& writer) {
    writer(dir / name);
    m.artifact(dir / name);
  };
  emit("train.jsonl", [&](const fs::path& p) { save_corpus(p, split.train); });
  emit("test.jsonl", [&](const fs::path& p) { save_corpus(p, split.test); });
  emit("heldout.jsonl", [&](const fs::path& p) { save_corpus(p, split.held_out); });
  emit("unseen_batch.jsonl", [&](const fs::path& p) { save_unseen_batch(p, unseen_batch(split)); });
  emit("queries.jsonl", [&](const fs::path& p) { save_queries(p, test_queries(split.test)); });
  emit("ground_truth.jsonl",
       [&](const fs::path& p) { save_ground_truth(p, test_ground_truth(split.test)); });
  json info = {{"ratio", a.ratio},
               {"unseen_percent", split.unseen_percent},
               {"seed", g.seed},
               {"test_fraction", a.test_fraction},
               {"unseen_tool_ids", split.unseen_tool_ids},
               {"train_instructions", split.train.instructions.size()},
               {"train_tools", split.train.tools.size()},
               {"test_instructions", split.test.instructions.size()},
               {"held_out_instructions", split.held_out.instructions.size()}};
  emit("split.json", [&](const fs::path& p) { write_text(p, info.dump(2) + "\n"); });
  if (a.encoder == "hash") {
    emit("embeddings.lsem", [&](const fs::path& p) {
      const auto table = encode_corpus(corpus, a.dim);
      write_embeddings(p, table.matrix(), table.ids());
    });
  }

  m.config() = {{"corpus", a.corpus}, {"out_dir", a.out_dir}, {"ratio", a.ratio},
                {"test_fraction", a.test_fraction}, {"encoder", a.encoder.empty() ? "none" : a.encoder},
                {"dim", a.dim}};
  m.timing("total", clock.seconds());
  m.write(manifest_path(g, dir / "manifest.json"), g.seed);
  out << "split " << split.unseen_percent << "%: " << split.train.instructions.size()
      << " train, " << split.test.instructions.size() << " test, "
      << split.held_out.instructions.size() << " held out, " << split.unseen_tool_ids.size()
      << " unseen tools\n";
}

// ---- build ---------------------------------------------------------------

struct BuildArgs {
  std::string corpus, embeddings, out;
  unsigned layers = PropagationConfig::kDefaultLayers;
  std::vector<double> alpha;
};

void cmd_build(const BuildArgs& a, const Globals& g, std::ostream& out) {
  Stopwatch clock;
  Manifest m("build");
  m.input(a.corpus);
  m.input(a.embeddings);
  const auto corpus = load_corpus(a.corpus);
  const auto table = read_embeddings(fs::path(a.embeddings));
  const auto config = a.alpha.empty() ? PropagationConfig::uniform(a.layers)
                                      : PropagationConfig(a.layers, a.alpha);
  const auto index = build_training_index(corpus, table, config, g.threads);
  save_index(a.out, index);
  m.artifact(a.out);
  m.config() = {{"corpus", a.corpus},
                {"embeddings", a.embeddings},
                {"out", a.out},
                {"layers", config.num_layers()},
                {"alpha", std::vector<double>(config.coefficients().begin(),
                                              config.coefficients().end())},
                {"threads", g.threads}};
  m.timing("total", clock.seconds());
  m.write(manifest_path(g, sibling_manifest(a.out)), g.seed);
  out << "built index: " << index.num_training_instructions() << " instructions, "
      << index.num_training_tools() << " tools, " << index.graph().num_edges() << " edges\n";
}

// ---- align ---------------------------------------------------------------

struct AlignArgs {
  std::string index, batch, embeddings, out;
  unsigned candidates = kDefaultCandidateInstructions;
};

void cmd_align(const AlignArgs& a, const Globals& g, std::ostream& out) {
  Stopwatch clock;
  Manifest m("align");
  m.input(a.index);
  m.input(a.batch);
  m.input(a.embeddings);
  if (a.candidates == 0) throw ValidationError("--candidates must be at least 1");
  const auto batch = load_unseen_batch(a.batch);
  const auto table = read_embeddings(fs::path(a.embeddings));
  IndexBuilder builder(load_index(a.index));
  const auto tools_before = builder.view().unseen_tools().size();
  const auto instructions_before = builder.view().unseen_instructions().size();
  builder.add_batch(resolve_batch(batch, table), a.candidates);
  const auto index = std::move(builder).seal();
  save_index(a.out, index);
  m.artifact(a.out);

  std::size_t tool_fallbacks = 0, instruction_fallbacks = 0;
  for (std::size_t i = tools_before; i < index.unseen_tools().size(); ++i) {
    tool_fallbacks += index.unseen_tools()[i].fallback;
  }
  for (std::size_t i = instructions_before; i < index.unseen_instructions().size(); ++i) {
    instruction_fallbacks += index.unseen_instructions()[i].fallback;
  }
  const auto added_tools = index.unseen_tools().size() - tools_before;
  const auto added_instructions = index.unseen_instructions().size() - instructions_before;
  m.config() = {{"index", a.index}, {"batch", a.batch}, {"embeddings", a.embeddings},
                {"out", a.out}, {"candidate_instructions", a.candidates},
                {"added_tools", added_tools}, {"added_instructions", added_instructions},
                {"tool_fallbacks", tool_fallbacks},
                {"instruction_fallbacks", instruction_fallbacks}};
  m.timing("total", clock.seconds());
  m.write(manifest_path(g, sibling_manifest(a.out)), g.seed);
  out << "aligned " << added_tools << " tools (" << tool_fallbacks << " fallback), "
      << added_instructions << " instructions (" << instruction_fallbacks << " fallback)\n";
}

// ---- retrieve ------------------------------------------------------------

struct RetrieveArgs {
  std::string index, queries, embeddings, out;
  RetrievalConfig config;
};

void cmd_retrieve(const RetrieveArgs& a, const Globals& g, std::ostream& out) {
  Stopwatch clock;
  Manifest m("retrieve");
  m.input(a.index);
  m.input(a.queries);
  m.input(a.embeddings);
  a.config.validate();
  const auto index = load_index(a.index);
  const auto queries = load_queries(a.queries);
  const auto table = read_embeddings(fs::path(a.embeddings));
  const auto results = retrieve_all(queries, table, index, a.config, g.threads);

  std::ostringstream lines;
  std::size_t constraint_fallbacks = 0, alignment_fallbacks = 0;
  for (const auto& r : results) {
    lines << to_json(r, index).dump() << '\n';
    constraint_fallbacks += r.flags.constraint_fallback;
    alignment_fallbacks += r.flags.alignment_fallback;
  }
  write_text(a.out, lines.str());
  m.artifact(a.out);
  const auto& ab = a.config.ablations;
  m.config() = {{"index", a.index}, {"queries", a.queries}, {"embeddings", a.embeddings},
                {"out", a.out}, {"similar_instructions", a.config.similar_instructions},
                {"top_k", a.config.top_k},
                {"candidate_instructions", a.config.candidate_instructions},
                {"no_instruction_transfer", ab.disable_instruction_transfer},
                {"no_tool_transfer", ab.disable_tool_transfer},
                {"no_constraint", ab.disable_relational_constraint},
                {"threads", g.threads}, {"queries_answered", results.size()},
                {"constraint_fallbacks", constraint_fallbacks},
                {"alignment_fallbacks", alignment_fallbacks}};
  m.timing("total", clock.seconds());
  m.write(manifest_path(g, sibling_manifest(a.out)), g.seed);
  out << "retrieved " << results.size() << " queries\n";
}

// ---- evaluate ------------------------------------------------------------

struct EvaluateArgs {
  std::string results, truth, out;
  std::vector<std::size_t> cutoffs = kDefaultCutoffs;
};

void cmd_evaluate(const EvaluateArgs& a, const Globals& g, std::ostream& out) {
  Stopwatch clock;
  Manifest m("evaluate");
  m.input(a.results);
  m.input(a.truth);
  const auto results = load_results(a.results);
  const auto truth = load_ground_truth(a.truth);
  const auto report = evaluate(results, truth, a.cutoffs);
  write_text(a.out, to_json(report).dump(2) + "\n");
  m.artifact(a.out);
  m.config() = {{"results", a.results}, {"ground_truth", a.truth}, {"out", a.out},
                {"cutoffs", a.cutoffs}};
  m.timing("total", clock.seconds());
  m.write(manifest_path(g, sibling_manifest(a.out)), g.seed);
  out << format_report_table(report);
}

// ---- diagnose ------------------------------------------------------------

struct DiagnoseArgs {
  std::string index, out;
  std::size_t top_n = 5;
};

void cmd_diagnose(const DiagnoseArgs& a, const Globals& g, std::ostream& out) {
  Stopwatch clock;
  Manifest m("diagnose");
  m.input(a.index);
  if (a.top_n == 0) throw ValidationError("--top-n must be at least 1");
  const auto index = load_index(a.index);
  const auto report = diagnose(index, a.top_n);
  write_text(a.out, to_json(report).dump(2) + "\n");
  m.artifact(a.out);
  m.config() = {{"index", a.index}, {"out", a.out}, {"top_n", a.top_n}};
  m.timing("total", clock.seconds());
  m.write(manifest_path(g, sibling_manifest(a.out)), g.seed);
  out << "overlap mean " << report.overlap.mean << "%, median " << report.overlap.median << "%";
  if (report.kl_tools) out << ", KL(tools) " << report.kl_tools->value;
  if (report.kl_instructions) out << ", KL(instructions) " << report.kl_instructions->value;
  out << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tool retrieval with logic-aware embeddings for unseen tools"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--manifest-out", g.manifest_out, "Manifest path (default next to the output)");

  SplitArgs sa;
  auto* split = app.add_subcommand("split", "Split a corpus for one unseen ratio");
  split->add_option("--corpus", sa.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  split->add_option("--ratio", sa.ratio, "Unseen tool ratio: 0, 0.1, 0.2 or 0.3")
      ->capture_default_str();
  split->add_option("--test-fraction", sa.test_fraction, "Share of unassigned instructions tested")
      ->capture_default_str();
  split->add_option("--out-dir", sa.out_dir, "Output directory")->required();
  split->add_option("--encoder", sa.encoder, "Also write hash embeddings of the corpus (hash)");
  split->add_option("--dim", sa.dim, "Hash embedding dimension")->capture_default_str();

  BuildArgs ba;
  auto* build = app.add_subcommand("build", "Build an index from a training corpus");
  build->add_option("--corpus", ba.corpus, "Training corpus JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("--embeddings", ba.embeddings, "Embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("--layers", ba.layers, "Propagation layers K")->capture_default_str();
  build->add_option("--alpha", ba.alpha, "Layer weights, K+1 values (default uniform)")
      ->delimiter(',');
  build->add_option("--out", ba.out, "Index file")->required();

  AlignArgs aa;
  auto* align = app.add_subcommand("align", "Insert unseen tools and instructions");
  align->add_option("--index", aa.index, "Index file")->required()->check(CLI::ExistingFile);
  align->add_option("--batch", aa.batch, "Unseen batch JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  align->add_option("--embeddings", aa.embeddings, "Embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  align->add_option("--candidates", aa.candidates, "Candidate instructions I")
      ->capture_default_str();
  align->add_option("--out", aa.out, "Updated index file")->required();

  RetrieveArgs ra;
  auto* retrieve_cmd = app.add_subcommand("retrieve", "Retrieve tools for queries");
  retrieve_cmd->add_option("--index", ra.index, "Index file")
      ->required()
      ->check(CLI::ExistingFile);
  retrieve_cmd->add_option("--queries", ra.queries, "Queries JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  retrieve_cmd->add_option("--embeddings", ra.embeddings, "Embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  retrieve_cmd->add_option("--similar", ra.config.similar_instructions,
                           "Similar instructions T for the logical constraint")
      ->capture_default_str();
  retrieve_cmd->add_option("--top-k", ra.config.top_k, "Tools returned per query")
      ->capture_default_str();
  retrieve_cmd->add_option("--candidates", ra.config.candidate_instructions,
                           "Candidate instructions I for query alignment")
      ->capture_default_str();
  retrieve_cmd->add_flag("--no-instruction-transfer", ra.config.ablations.disable_instruction_transfer,
                         "Rank with the query text embedding");
  retrieve_cmd->add_flag("--no-tool-transfer", ra.config.ablations.disable_tool_transfer,
                         "Rank unseen tools by text embedding");
  retrieve_cmd->add_flag("--no-constraint", ra.config.ablations.disable_relational_constraint,
                         "Rank the whole repository");
  retrieve_cmd->add_option("--out", ra.out, "Results JSONL")->required();

  EvaluateArgs ea;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score results against ground truth");
  evaluate_cmd->add_option("--results", ea.results, "Results JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--ground-truth", ea.truth, "Ground truth JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--cutoffs", ea.cutoffs, "Cutoffs k")
      ->delimiter(',')
      ->capture_default_str();
  evaluate_cmd->add_option("--out", ea.out, "Report JSON")->required();

  DiagnoseArgs da;
  auto* diagnose_cmd = app.add_subcommand("diagnose", "Graph and distribution-shift statistics");
  diagnose_cmd->add_option("--index", da.index, "Index file")
      ->required()
      ->check(CLI::ExistingFile);
  diagnose_cmd->add_option("--top-n", da.top_n, "Neighbours for the overlap statistic")
      ->capture_default_str();
  diagnose_cmd->add_option("--out", da.out, "Report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*split) cmd_split(sa, g, out);
    if (*build) cmd_build(ba, g, out);
    if (*align) cmd_align(aa, g, out);
    if (*retrieve_cmd) cmd_retrieve(ra, g, out);
    if (*evaluate_cmd) cmd_evaluate(ea, g, out);
    if (*diagnose_cmd) cmd_diagnose(da, g, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace losemb::cli
