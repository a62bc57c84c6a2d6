#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mtkit/corpus.hpp"
#include "mtkit/entity.hpp"

namespace mtkit {

struct FocusPredicate {
  enum class Kind { surface_set, span_presence };

  Kind kind = Kind::surface_set;
  std::set<std::string> surface_forms;  // non-empty for surface_set
};

using ExclusionSet = std::unordered_set<std::uint64_t>;

ExclusionSet build_exclusion_set(const std::vector<std::string>& lines,
                                 std::string_view separator = kDefaultSeparator);

// Selects pairs matching the predicate whose canonical source-line hash is
// not excluded; preserves order and keeps only the first of exact repeats.
// spans must be line-parallel when the predicate is span_presence.
std::vector<ParallelPair> select_focused(const std::vector<ParallelPair>& pairs,
                                         const FocusPredicate& predicate,
                                         const std::vector<std::vector<EntitySpan>>* spans,
                                         const ExclusionSet& exclusion);

// Seeded subsampling for --take-random; keeps input order.
std::vector<ParallelPair> take_random(const std::vector<ParallelPair>& pairs,
                                      std::size_t count, std::uint64_t seed);

// File-based black-box translator: {in} and {out} in the command template are
// replaced with real paths; the output must be line-parallel to the input.
struct TranslatorContract {
  std::string command_template;
  double timeout_sec = 0.0;  // 0 = no timeout
};

std::vector<ParallelPair> backtranslate_round(const std::vector<Sentence>& mono_target,
                                              const TranslatorContract& translator,
                                              const std::string& work_dir,
                                              std::string_view separator = kDefaultSeparator);

// Keeps the max_size most frequent surfaces (ties lexicographic); other
// surfaces become unk_token, features preserved. vocab receives the kept
// surfaces with counts, most frequent first.
std::vector<Sentence> cap_vocabulary(const std::vector<Sentence>& corpus, std::size_t max_size,
                                     std::string_view unk_token = "<unk>",
                                     std::vector<std::pair<std::string, std::uint64_t>>* vocab = nullptr);

}  // namespace mtkit
