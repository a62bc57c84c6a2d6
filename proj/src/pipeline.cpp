#include "mtkit/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <sys/wait.h>

#include "mtkit/error.hpp"
#include "mtkit/text.hpp"

namespace mtkit {

namespace {

std::string surfaces_line(const Sentence& sentence) {
  return join(sentence.surfaces(), " ");
}

std::string substitute_placeholder(std::string text, std::string_view placeholder,
                                   const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(placeholder, pos)) != std::string::npos) {
    text.replace(pos, placeholder.size(), value);
    pos += value.size();
  }
  return text;
}

}  // namespace

ExclusionSet build_exclusion_set(const std::vector<std::string>& lines,
                                 std::string_view separator) {
  ExclusionSet set;
  for (const auto& line : lines) {
    // Hash the surfaces only, so annotated and plain renderings of the same
    // sentence exclude each other.
    const Sentence sentence = parse_token_line(line, separator);
    set.insert(canonical_line_hash(surfaces_line(sentence)));
  }
  return set;
}

std::vector<ParallelPair> select_focused(const std::vector<ParallelPair>& pairs,
                                         const FocusPredicate& predicate,
                                         const std::vector<std::vector<EntitySpan>>* spans,
                                         const ExclusionSet& exclusion) {
  if (predicate.kind == FocusPredicate::Kind::surface_set && predicate.surface_forms.empty()) {
    raise(Errc::bad_config, "surface-set predicate needs at least one surface form");
  }
  if (predicate.kind == FocusPredicate::Kind::span_presence &&
      (spans == nullptr || spans->size() != pairs.size())) {
    raise(Errc::line_count_mismatch, "span-presence selection needs a line-parallel span file");
  }

  std::vector<ParallelPair> out;
  ExclusionSet seen;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    bool matches = false;
    if (predicate.kind == FocusPredicate::Kind::surface_set) {
      for (const auto& token : pairs[i].source.tokens) {
        if (predicate.surface_forms.count(token.surface) > 0) {
          matches = true;
          break;
        }
      }
    } else {
      matches = !(*spans)[i].empty();
    }
    if (!matches) continue;
    const std::uint64_t hash = canonical_line_hash(surfaces_line(pairs[i].source));
    if (exclusion.count(hash) > 0) continue;
    if (!seen.insert(hash).second) continue;  // exact source repeat
    out.push_back(pairs[i]);
  }
  return out;
}

std::vector<ParallelPair> take_random(const std::vector<ParallelPair>& pairs, std::size_t count,
                                      std::uint64_t seed) {
  if (count >= pairs.size()) return pairs;
  // Seeded Fisher-Yates over the index set, then restored to input order.
  std::vector<std::size_t> indices(pairs.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (indices.size() - i));
    std::swap(indices[i], indices[j]);
  }
  indices.resize(count);
  std::sort(indices.begin(), indices.end());
  std::vector<ParallelPair> out;
  out.reserve(count);
  for (std::size_t idx : indices) out.push_back(pairs[idx]);
  return out;
}

std::vector<ParallelPair> backtranslate_round(const std::vector<Sentence>& mono_target,
                                              const TranslatorContract& translator,
                                              const std::string& work_dir,
                                              std::string_view separator) {
  const std::string in_path = work_dir + "/bt_input.txt";
  const std::string out_path = work_dir + "/bt_output.txt";

  std::vector<std::string> input_lines;
  input_lines.reserve(mono_target.size());
  for (const auto& sentence : mono_target) input_lines.push_back(surfaces_line(sentence));
  write_lines_file(in_path, input_lines);
  std::remove(out_path.c_str());

  std::string command = substitute_placeholder(translator.command_template, "{in}", in_path);
  command = substitute_placeholder(command, "{out}", out_path);
  if (translator.timeout_sec > 0.0) {
    // Wrap the whole template so compound commands are timed as one unit.
    std::string quoted = "'";
    for (char c : command) {
      if (c == '\'') {
        quoted += "'\\''";
      } else {
        quoted.push_back(c);
      }
    }
    quoted.push_back('\'');
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "timeout %.3f sh -c ", translator.timeout_sec);
    command = buffer + quoted;
  }

  const int status = std::system(command.c_str());
  if (status == -1) raise(Errc::io_failure, "failed to launch translator command");
  if (WIFEXITED(status)) {
    const int exit_code = WEXITSTATUS(status);
    if (exit_code == 124) {
      raise(Errc::translator_timeout, "translator exceeded the configured timeout");
    }
    if (exit_code != 0) {
      raise(Errc::io_failure,
            "translator command failed with exit code " + std::to_string(exit_code));
    }
  } else {
    raise(Errc::io_failure, "translator command terminated abnormally");
  }

  const auto output_lines = read_lines_file(out_path);
  if (output_lines.size() != mono_target.size()) {
    raise(Errc::translator_line_mismatch,
          "translator produced " + std::to_string(output_lines.size()) + " lines for " +
              std::to_string(mono_target.size()) + " inputs");
  }

  std::vector<ParallelPair> out;
  out.reserve(mono_target.size());
  for (std::size_t i = 0; i < mono_target.size(); ++i) {
    out.push_back({i, parse_token_line(output_lines[i], separator), mono_target[i]});
  }
  return out;
}

std::vector<Sentence> cap_vocabulary(const std::vector<Sentence>& corpus, std::size_t max_size,
                                     std::string_view unk_token,
                                     std::vector<std::pair<std::string, std::uint64_t>>* vocab) {
  if (max_size < 1) raise(Errc::bad_config, "vocabulary size must be >= 1");

  std::map<std::string, std::uint64_t> frequencies;
  for (const auto& sentence : corpus) {
    for (const auto& token : sentence.tokens) ++frequencies[token.surface];
  }

  std::vector<std::pair<std::string, std::uint64_t>> ranked(frequencies.begin(),
                                                            frequencies.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > max_size) ranked.resize(max_size);

  std::unordered_set<std::string> kept;
  for (const auto& [surface, count] : ranked) kept.insert(surface);
  if (vocab != nullptr) *vocab = ranked;

  std::vector<Sentence> out = corpus;
  for (auto& sentence : out) {
    for (auto& token : sentence.tokens) {
      if (kept.count(token.surface) == 0) token.surface = std::string(unk_token);
    }
  }
  return out;
}

}  // namespace mtkit
