#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace mtkit {

// OpenNMT interchange feature separator U+FFE8; ASCII '|' via --separator.
inline constexpr std::string_view kDefaultSeparator = "\xEF\xBF\xA8";

struct AnnotatedToken {
  std::string surface;
  std::vector<std::string> features;

  bool operator==(const AnnotatedToken&) const = default;
};

struct Sentence {
  std::vector<AnnotatedToken> tokens;

  bool empty() const noexcept { return tokens.empty(); }
  std::size_t size() const noexcept { return tokens.size(); }
  std::vector<std::string> surfaces() const;

  bool operator==(const Sentence&) const = default;
};

// Convenience constructor for featureless sentences.
Sentence sentence_of(const std::vector<std::string>& surfaces);

struct ParallelPair {
  std::size_t id = 0;
  Sentence source;
  Sentence target;

  bool operator==(const ParallelPair&) const = default;
};

// Pharaoh word alignment: set of (source index, target index) links.
struct AlignmentSet {
  std::set<std::pair<std::size_t, std::size_t>> links;

  bool operator==(const AlignmentSet&) const = default;
};

struct CorpusStats {
  std::uint64_t words = 0;
  std::uint64_t vocab = 0;
  std::uint64_t subwords = 0;
  std::uint64_t subword_vocab = 0;
  std::uint64_t lines = 0;

  bool operator==(const CorpusStats&) const = default;
};

// Streaming accumulator with an associative merge, so chunked parallel
// reduction equals sequential reduction.
class StatsAccumulator {
 public:
  void add(const Sentence& words);
  void add_subword(const Sentence& subwords);
  void merge(const StatsAccumulator& other);
  CorpusStats finalize() const;

 private:
  std::uint64_t words_ = 0;
  std::uint64_t lines_ = 0;
  std::uint64_t subwords_ = 0;
  std::unordered_set<std::string> vocab_;
  std::unordered_set<std::string> subword_vocab_;
};

// A separator must be exactly one non-whitespace code point.
void validate_separator(std::string_view separator);

// Parses one space-delimited line of `surface[SEP feat]*` fields.
Sentence parse_token_line(std::string_view line,
                          std::string_view separator = kDefaultSeparator);

std::string render_token_line(const Sentence& sentence,
                              std::string_view separator = kDefaultSeparator);

AlignmentSet read_alignment_line(std::string_view line);
std::string render_alignment_line(const AlignmentSet& alignment);

CorpusStats corpus_stats(const std::vector<Sentence>& words,
                         const std::vector<Sentence>* subwords = nullptr);

std::string format_stats_table(const CorpusStats& stats);
std::string format_stats_machine(const CorpusStats& stats);

// Rejects corpora whose tokens carry a non-uniform feature count.
void check_uniform_arity(const std::vector<Sentence>& corpus);

// Lowercases surfaces only; features are opaque labels and keep their case.
Sentence lowercase_sentence(const Sentence& sentence);

// Line I/O: UTF-8, '\n' separated, optional trailing '\r' stripped.
std::vector<std::string> read_lines(std::istream& in);
std::vector<std::string> read_lines_file(const std::string& path);
void write_lines_file(const std::string& path, const std::vector<std::string>& lines);

std::vector<Sentence> parse_corpus(const std::vector<std::string>& lines,
                                   std::string_view separator = kDefaultSeparator);
std::vector<std::string> render_corpus(const std::vector<Sentence>& corpus,
                                       std::string_view separator = kDefaultSeparator);

std::vector<AlignmentSet> parse_alignment_corpus(const std::vector<std::string>& lines);

}  // namespace mtkit
