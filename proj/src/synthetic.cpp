#include "losemb/synthetic.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "losemb/error.hpp"
#include "losemb/random.hpp"

namespace losemb {

namespace {

class WordSource {
 public:
  explicit WordSource(Rng& rng) : rng_(rng) {}

  std::string fresh() {
    static constexpr const char* onsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p",
                                             "r", "s", "t", "v", "z", "br", "cr", "dr", "st",
                                             "tr", "pl", "gl", "sh", "ch", "th"};
    static constexpr const char* vowels[] = {"a", "e", "i", "o", "u", "ai", "ou", "ea"};
    for (;;) {
      std::string w;
      const auto syllables = 2 + rng_.below(2);
      for (std::uint64_t s = 0; s < syllables; ++s) {
        w += onsets[rng_.below(std::size(onsets))];
        w += vowels[rng_.below(std::size(vowels))];
      }
      if (used_.insert(w).second) return w;
    }
  }

  std::vector<std::string> fresh(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(fresh());
    return out;
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

const std::string& pick(Rng& rng, const std::vector<std::string>& words) {
  return words[rng.below(words.size())];
}

std::string join(std::vector<std::string> words, Rng& rng) {
  rng.shuffle(words);
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace

Corpus make_synthetic_corpus(const SyntheticCorpusConfig& config) {
  if (config.clusters == 0 || config.tools_per_cluster < config.min_workflow ||
      config.min_workflow == 0 || config.max_workflow < config.min_workflow) {
    throw ValidationError("invalid synthetic corpus shape");
  }
  Rng rng(derive_seed(config.seed, 0x5e7));
  WordSource words(rng);
  const auto generic = words.fresh(40);

  struct Workflow {
    std::vector<std::uint32_t> tools;
    std::vector<std::string> task_words;
    unsigned cluster;
  };
  std::vector<Workflow> workflows;
  std::vector<std::vector<std::string>> keywords;
  Corpus corpus;

  for (unsigned c = 0; c < config.clusters; ++c) {
    const auto domain = words.fresh(6);
    std::vector<std::uint32_t> members;
    for (unsigned j = 0; j < config.tools_per_cluster; ++j) {
      const auto id = static_cast<std::uint32_t>(corpus.tools.size());
      auto kw = words.fresh(3);
      std::vector<std::string> desc = kw;
      desc.push_back(pick(rng, domain));
      desc.push_back(pick(rng, domain));
      for (int g = 0; g < 4; ++g) desc.push_back(pick(rng, generic));
      corpus.tools.push_back({"tool-" + std::to_string(id), kw[0] + "_" + domain[0],
                              join(std::move(desc), rng)});
      keywords.push_back(std::move(kw));
      members.push_back(id);
    }
    rng.shuffle(members);
    std::size_t pos = 0;
    while (pos < members.size()) {
      const auto span = config.max_workflow - config.min_workflow + 1;
      const std::size_t remaining = members.size() - pos;
      std::size_t size = std::min<std::size_t>(remaining, config.min_workflow + rng.below(span));
      if (remaining - size < config.min_workflow) size = remaining;
      Workflow w;
      w.tools.assign(members.begin() + static_cast<std::ptrdiff_t>(pos),
                     members.begin() + static_cast<std::ptrdiff_t>(pos + size));
      std::sort(w.tools.begin(), w.tools.end());
      w.task_words = words.fresh(5);
      w.task_words.push_back(domain[1 + rng.below(domain.size() - 1)]);
      w.cluster = c;
      workflows.push_back(std::move(w));
      pos += size;
    }
  }

  for (unsigned i = 0; i < config.instructions; ++i) {
    const auto& w = workflows[rng.below(workflows.size())];
    std::vector<std::uint32_t> tools = w.tools;
    if (tools.size() > 1 && rng.uniform() < config.drop_tool) {
      tools.erase(tools.begin() + static_cast<std::ptrdiff_t>(rng.below(tools.size())));
    }
    std::vector<std::string> text;
    for (int k = 0; k < 4; ++k) text.push_back(pick(rng, w.task_words));
    for (auto t : tools) {
      if (rng.uniform() < config.keyword_mention) text.push_back(pick(rng, keywords[t]));
    }
    for (int g = 0; g < 3; ++g) text.push_back(pick(rng, generic));

    InstructionRecord r;
    r.id = "inst-" + std::to_string(i);
    r.text = join(std::move(text), rng);
    for (auto t : tools) r.tool_ids.push_back(corpus.tools[t].id);
    corpus.instructions.push_back(std::move(r));
  }
  return corpus;
}

}  // namespace losemb
