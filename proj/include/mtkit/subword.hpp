#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtkit/corpus.hpp"

namespace mtkit {

inline constexpr std::string_view kEndOfWord = "</w>";

enum class MarkerMode { suffix, prefix };

struct BpeModel {
  std::vector<std::pair<std::string, std::string>> merges;
  std::string marker = "@@";
  MarkerMode marker_mode = MarkerMode::suffix;

  std::string serialize() const;
  static BpeModel deserialize(std::string_view text);
  static BpeModel load_file(const std::string& path);
  void save_file(const std::string& path) const;
};

// Greedy merge learning on word-frequency-weighted symbol pairs. Words are
// sequences of code points with the end-of-word sentinel folded into the last
// symbol. Stops at max_merges or when the best pair count drops below
// min_pair_frequency; count ties break on lexicographic (left, right).
BpeModel bpe_learn(const std::vector<Sentence>& corpus, std::size_t max_merges,
                   std::size_t min_pair_frequency = 2);

// Splits each word with the model; every piece inherits the word's feature
// list, non-final (suffix mode) or non-initial (prefix mode) pieces carry the
// join marker.
Sentence bpe_apply(const Sentence& sentence, const BpeModel& model);

struct UndoOptions {
  std::string marker = "@@";
  MarkerMode marker_mode = MarkerMode::suffix;
};

// Inverse transform: joins marked pieces; the merged token keeps the features
// of its first piece. A dangling marker at the sentence edge is stripped and
// counted in *dangling.
Sentence bpe_undo(const Sentence& sentence, const UndoOptions& options = {},
                  std::size_t* dangling = nullptr);

}  // namespace mtkit
