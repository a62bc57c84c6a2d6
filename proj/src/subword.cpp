#include "mtkit/subword.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mtkit/error.hpp"
#include "mtkit/text.hpp"

namespace mtkit {

namespace {

using SymbolPair = std::pair<std::string, std::string>;

struct PairHash {
  std::size_t operator()(const SymbolPair& p) const noexcept {
    return fnv1a64(p.first) * 1315423911u ^ fnv1a64(p.second);
  }
};

// Code points of the word with the end-of-word sentinel folded into the last
// symbol, so "aa" becomes ["a", "a</w>"].
std::vector<std::string> symbolize(std::string_view word) {
  std::vector<std::string> symbols = utf8_codepoints(word);
  if (!symbols.empty()) symbols.back() += kEndOfWord;
  return symbols;
}

void count_pairs(const std::vector<std::string>& symbols, std::int64_t weight,
                 std::unordered_map<SymbolPair, std::int64_t, PairHash>& counts) {
  for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
    counts[{symbols[i], symbols[i + 1]}] += weight;
  }
}

std::vector<std::string> merge_symbols(const std::vector<std::string>& symbols,
                                       const SymbolPair& pair) {
  std::vector<std::string> out;
  out.reserve(symbols.size());
  std::size_t i = 0;
  while (i < symbols.size()) {
    if (i + 1 < symbols.size() && symbols[i] == pair.first && symbols[i + 1] == pair.second) {
      out.push_back(pair.first + pair.second);
      i += 2;
    } else {
      out.push_back(symbols[i]);
      ++i;
    }
  }
  return out;
}

}  // namespace

BpeModel bpe_learn(const std::vector<Sentence>& corpus, std::size_t max_merges,
                   std::size_t min_pair_frequency) {
  BpeModel model;
  if (min_pair_frequency < 1) min_pair_frequency = 1;

  std::unordered_map<std::string, std::int64_t> word_counts;
  for (const auto& sentence : corpus) {
    for (const auto& token : sentence.tokens) ++word_counts[token.surface];
  }

  std::vector<std::vector<std::string>> words;
  std::vector<std::int64_t> weights;
  words.reserve(word_counts.size());
  for (const auto& [word, count] : word_counts) {
    auto symbols = symbolize(word);
    if (symbols.size() < 2) continue;
    words.push_back(std::move(symbols));
    weights.push_back(count);
  }

  std::unordered_map<SymbolPair, std::int64_t, PairHash> pair_counts;
  std::unordered_map<SymbolPair, std::set<std::size_t>, PairHash> pair_words;
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (std::size_t i = 0; i + 1 < words[w].size(); ++i) {
      SymbolPair pair{words[w][i], words[w][i + 1]};
      pair_counts[pair] += weights[w];
      pair_words[pair].insert(w);
    }
  }

  while (model.merges.size() < max_merges) {
    const SymbolPair* best = nullptr;
    std::int64_t best_count = 0;
    for (const auto& [pair, count] : pair_counts) {
      if (count > best_count || (count == best_count && best != nullptr && pair < *best)) {
        best = &pair;
        best_count = count;
      }
    }
    if (best == nullptr || best_count < static_cast<std::int64_t>(min_pair_frequency)) break;

    const SymbolPair merged_pair = *best;
    model.merges.push_back(merged_pair);

    // Recount the affected words locally; exact and simple.
    const auto affected = pair_words[merged_pair];
    for (std::size_t w : affected) {
      std::unordered_map<SymbolPair, std::int64_t, PairHash> delta;
      count_pairs(words[w], -weights[w], delta);
      words[w] = merge_symbols(words[w], merged_pair);
      count_pairs(words[w], weights[w], delta);
      for (const auto& [pair, d] : delta) {
        if (d == 0) continue;
        auto& count = pair_counts[pair];
        count += d;
        if (count <= 0) {
          pair_counts.erase(pair);
          pair_words.erase(pair);
        } else if (d > 0) {
          pair_words[pair].insert(w);
        }
      }
    }
    pair_counts.erase(merged_pair);
    pair_words.erase(merged_pair);
  }
  return model;
}

Sentence bpe_apply(const Sentence& sentence, const BpeModel& model) {
  std::map<SymbolPair, std::size_t> ranks;
  for (std::size_t i = 0; i < model.merges.size(); ++i) {
    ranks.emplace(model.merges[i], i);
  }

  Sentence out;
  for (const auto& token : sentence.tokens) {
    std::vector<std::string> symbols = symbolize(token.surface);
    while (symbols.size() > 1) {
      std::size_t best_rank = std::numeric_limits<std::size_t>::max();
      const SymbolPair* best = nullptr;
      for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
        const auto it = ranks.find({symbols[i], symbols[i + 1]});
        if (it != ranks.end() && it->second < best_rank) {
          best_rank = it->second;
          best = &it->first;
        }
      }
      if (best == nullptr) break;
      symbols = merge_symbols(symbols, *best);
    }

    if (!symbols.empty()) {
      auto& last = symbols.back();
      if (last.size() >= kEndOfWord.size() &&
          std::string_view(last).substr(last.size() - kEndOfWord.size()) == kEndOfWord) {
        last.resize(last.size() - kEndOfWord.size());
      }
    }
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      std::string piece = symbols[i];
      if (model.marker_mode == MarkerMode::suffix && i + 1 < symbols.size()) {
        piece += model.marker;
      } else if (model.marker_mode == MarkerMode::prefix && i > 0) {
        piece = model.marker + piece;
      }
      out.tokens.push_back({std::move(piece), token.features});
    }
  }
  return out;
}

Sentence bpe_undo(const Sentence& sentence, const UndoOptions& options, std::size_t* dangling) {
  const auto is_marked = [&](const std::string& surface) {
    if (surface.size() < options.marker.size()) return false;
    if (options.marker_mode == MarkerMode::suffix) {
      return std::string_view(surface).substr(surface.size() - options.marker.size()) ==
             options.marker;
    }
    return std::string_view(surface).substr(0, options.marker.size()) == options.marker;
  };
  const auto strip = [&](const std::string& surface) {
    if (options.marker_mode == MarkerMode::suffix) {
      return surface.substr(0, surface.size() - options.marker.size());
    }
    return surface.substr(options.marker.size());
  };

  Sentence out;
  if (options.marker_mode == MarkerMode::suffix) {
    bool joining = false;
    for (const auto& token : sentence.tokens) {
      const bool marked = is_marked(token.surface);
      const std::string piece = marked ? strip(token.surface) : token.surface;
      if (joining) {
        out.tokens.back().surface += piece;
      } else {
        out.tokens.push_back({piece, token.features});
      }
      joining = marked;
    }
    if (joining && dangling != nullptr) ++*dangling;  // marker at sentence end
  } else {
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      const auto& token = sentence.tokens[i];
      if (is_marked(token.surface)) {
        if (out.tokens.empty()) {
          // Marker on the first piece has nothing to join with.
          if (dangling != nullptr) ++*dangling;
          out.tokens.push_back({strip(token.surface), token.features});
        } else {
          out.tokens.back().surface += strip(token.surface);
        }
      } else {
        out.tokens.push_back({token.surface, token.features});
      }
    }
  }
  return out;
}

std::string BpeModel::serialize() const {
  std::ostringstream out;
  out << "bpe v1 " << (marker_mode == MarkerMode::suffix ? "suffix" : "prefix") << ' '
      << marker << '\n';
  for (const auto& [left, right] : merges) {
    out << left << ' ' << right << '\n';
  }
  return out.str();
}

BpeModel BpeModel::deserialize(std::string_view text) {
  BpeModel model;
  const auto lines = split_on(text, "\n");
  if (lines.empty()) raise(Errc::bad_format, "empty BPE model");
  const auto header = split_ws(lines[0]);
  if (header.size() != 4 || header[0] != "bpe" || header[1] != "v1" ||
      (header[2] != "suffix" && header[2] != "prefix")) {
    raise(Errc::bad_format, "bad BPE model header '" + std::string(lines[0]) + "'");
  }
  model.marker_mode = header[2] == "suffix" ? MarkerMode::suffix : MarkerMode::prefix;
  model.marker = std::string(header[3]);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_ws(lines[i]);
    if (fields.size() != 2) {
      raise(Errc::bad_format, "bad merge line " + std::to_string(i + 1) + " in BPE model");
    }
    model.merges.emplace_back(std::string(fields[0]), std::string(fields[1]));
  }
  return model;
}

BpeModel BpeModel::load_file(const std::string& path) {
  const auto lines = read_lines_file(path);
  std::string text;
  for (const auto& line : lines) {
    text += line;
    text.push_back('\n');
  }
  return deserialize(text);
}

void BpeModel::save_file(const std::string& path) const {
  std::vector<std::string> lines;
  lines.push_back("bpe v1 " +
                  std::string(marker_mode == MarkerMode::suffix ? "suffix" : "prefix") + " " +
                  marker);
  for (const auto& [left, right] : merges) lines.push_back(left + " " + right);
  write_lines_file(path, lines);
}

}  // namespace mtkit
