#include "losemb/split.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "losemb/error.hpp"
#include "losemb/random.hpp"

namespace losemb {

namespace {

constexpr std::uint64_t kBaseStream = 1;
constexpr std::uint64_t kUnseenStream = 2;

bool touches(const InstructionRecord& r, const std::unordered_set<std::string>& tools) {
  return std::any_of(r.tool_ids.begin(), r.tool_ids.end(),
                     [&](const std::string& t) { return tools.contains(t); });
}

}  // namespace

unsigned unseen_percent(double ratio) {
  for (unsigned p : {0u, 10u, 20u, 30u}) {
    if (std::abs(ratio - p / 100.0) < 1e-9) return p;
  }
  throw ValidationError("unseen ratio " + std::to_string(ratio) +
                        " is not one of 0.0, 0.1, 0.2, 0.3");
}

Split make_split(const Corpus& corpus, const SplitSpec& spec) {
  const unsigned percent = unseen_percent(spec.unseen_ratio);
  if (corpus.instructions.empty()) throw ValidationError("cannot split an empty corpus");
  if (!(spec.test_fraction >= 0.0 && spec.test_fraction <= 1.0)) {
    throw ValidationError("test fraction must lie in [0, 1]");
  }

  // Base partition: pre-assigned sides are kept, the rest drawn from the seed.
  std::vector<std::size_t> unassigned;
  for (std::size_t i = 0; i < corpus.instructions.size(); ++i) {
    if (corpus.instructions[i].split == BaseSplit::Unassigned) unassigned.push_back(i);
  }
  Rng base_rng(derive_seed(spec.seed, kBaseStream));
  base_rng.shuffle(unassigned);
  const auto n_test = static_cast<std::size_t>(
      std::llround(spec.test_fraction * static_cast<double>(unassigned.size())));
  std::vector<bool> is_test(corpus.instructions.size(), false);
  for (std::size_t k = 0; k < n_test; ++k) is_test[unassigned[k]] = true;
  for (std::size_t i = 0; i < corpus.instructions.size(); ++i) {
    if (corpus.instructions[i].split == BaseSplit::Test) is_test[i] = true;
  }

  std::unordered_set<std::string> train_tools;
  for (std::size_t i = 0; i < corpus.instructions.size(); ++i) {
    if (!is_test[i]) {
      for (const auto& t : corpus.instructions[i].tool_ids) train_tools.insert(t);
    }
  }

  Split out;
  out.unseen_percent = percent;
  out.test.tools = corpus.tools;
  std::unordered_set<std::string> test_tools;
  for (std::size_t i = 0; i < corpus.instructions.size(); ++i) {
    const auto& r = corpus.instructions[i];
    if (!is_test[i]) continue;
    const bool covered = std::all_of(r.tool_ids.begin(), r.tool_ids.end(),
                                     [&](const std::string& t) { return train_tools.contains(t); });
    if (!covered) continue;
    out.test.instructions.push_back(r);
    for (const auto& t : r.tool_ids) test_tools.insert(t);
  }

  std::vector<std::string> candidates;
  for (const auto& t : corpus.tools) {
    if (test_tools.contains(t.id)) candidates.push_back(t.id);
  }
  const std::size_t n_unseen = (percent * candidates.size() + 99) / 100;
  Rng unseen_rng(derive_seed(spec.seed, kUnseenStream));
  unseen_rng.shuffle(candidates);
  std::unordered_set<std::string> unseen(candidates.begin(),
                                         candidates.begin() + static_cast<std::ptrdiff_t>(n_unseen));

  for (const auto& t : corpus.tools) {
    if (unseen.contains(t.id)) {
      out.unseen_tool_ids.push_back(t.id);
    } else {
      out.train.tools.push_back(t);
    }
  }
  out.held_out.tools = corpus.tools;
  for (std::size_t i = 0; i < corpus.instructions.size(); ++i) {
    if (is_test[i]) continue;
    const auto& r = corpus.instructions[i];
    (touches(r, unseen) ? out.held_out : out.train).instructions.push_back(r);
  }
  return out;
}

}  // namespace losemb
