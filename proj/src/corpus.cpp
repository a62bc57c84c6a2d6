#include "mtkit/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include "mtkit/error.hpp"
#include "mtkit/text.hpp"

namespace mtkit {

namespace {

std::size_t parse_index(std::string_view text, std::string_view context) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    raise(Errc::malformed_pair, "non-integer index '" + std::string(text) + "' in " +
                                    std::string(context));
  }
  return value;
}

}  // namespace

std::vector<std::string> Sentence::surfaces() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) out.push_back(token.surface);
  return out;
}

Sentence sentence_of(const std::vector<std::string>& surfaces) {
  Sentence sentence;
  sentence.tokens.reserve(surfaces.size());
  for (const auto& surface : surfaces) sentence.tokens.push_back({surface, {}});
  return sentence;
}

void validate_separator(std::string_view separator) {
  if (!is_single_codepoint(separator)) {
    raise(Errc::bad_config, "separator must be a single code point, got '" +
                                std::string(separator) + "'");
  }
  if (contains_ws(separator)) {
    raise(Errc::bad_config, "separator must not be whitespace");
  }
}

Sentence parse_token_line(std::string_view line, std::string_view separator) {
  Sentence sentence;
  for (std::string_view field : split_ws(line)) {
    const auto parts = split_on(field, separator);
    if (parts[0].empty()) {
      raise(Errc::empty_surface, "field '" + std::string(field) + "' begins with the separator");
    }
    AnnotatedToken token;
    token.surface = std::string(parts[0]);
    for (std::size_t i = 1; i < parts.size(); ++i) {
      if (parts[i].empty()) {
        raise(Errc::empty_feature, "field '" + std::string(field) + "' has an empty feature");
      }
      token.features.emplace_back(parts[i]);
    }
    sentence.tokens.push_back(std::move(token));
  }
  return sentence;
}

std::string render_token_line(const Sentence& sentence, std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    const auto& token = sentence.tokens[i];
    const auto check = [&](const std::string& piece) {
      if (piece.find(separator) != std::string::npos || contains_ws(piece) || piece.empty()) {
        raise(Errc::separator_collision,
              "token piece '" + piece + "' collides with the separator or whitespace");
      }
    };
    check(token.surface);
    if (i > 0) out.push_back(' ');
    out.append(token.surface);
    for (const auto& feature : token.features) {
      check(feature);
      out.append(separator);
      out.append(feature);
    }
  }
  return out;
}

AlignmentSet read_alignment_line(std::string_view line) {
  AlignmentSet alignment;
  for (std::string_view field : split_ws(line)) {
    const std::size_t dash = field.find('-');
    if (dash == std::string_view::npos || dash == 0 || dash + 1 == field.size()) {
      raise(Errc::malformed_pair, "expected i-j, got '" + std::string(field) + "'");
    }
    alignment.links.emplace(parse_index(field.substr(0, dash), field),
                            parse_index(field.substr(dash + 1), field));
  }
  return alignment;
}

std::string render_alignment_line(const AlignmentSet& alignment) {
  std::string out;
  for (const auto& [src, tgt] : alignment.links) {
    if (!out.empty()) out.push_back(' ');
    out += std::to_string(src) + "-" + std::to_string(tgt);
  }
  return out;
}

void StatsAccumulator::add(const Sentence& words) {
  ++lines_;
  words_ += words.size();
  for (const auto& token : words.tokens) vocab_.insert(token.surface);
}

void StatsAccumulator::add_subword(const Sentence& subwords) {
  subwords_ += subwords.size();
  for (const auto& token : subwords.tokens) subword_vocab_.insert(token.surface);
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
  words_ += other.words_;
  lines_ += other.lines_;
  subwords_ += other.subwords_;
  vocab_.insert(other.vocab_.begin(), other.vocab_.end());
  subword_vocab_.insert(other.subword_vocab_.begin(), other.subword_vocab_.end());
}

CorpusStats StatsAccumulator::finalize() const {
  CorpusStats stats;
  stats.words = words_;
  stats.vocab = vocab_.size();
  stats.subwords = subwords_;
  stats.subword_vocab = subword_vocab_.size();
  stats.lines = lines_;
  return stats;
}

CorpusStats corpus_stats(const std::vector<Sentence>& words,
                         const std::vector<Sentence>* subwords) {
  if (subwords != nullptr && subwords->size() != words.size()) {
    raise(Errc::line_count_mismatch,
          "word corpus has " + std::to_string(words.size()) + " lines, subword corpus has " +
              std::to_string(subwords->size()));
  }
  StatsAccumulator acc;
  for (std::size_t i = 0; i < words.size(); ++i) {
    acc.add(words[i]);
    if (subwords != nullptr) acc.add_subword((*subwords)[i]);
  }
  return acc.finalize();
}

std::string format_stats_table(const CorpusStats& stats) {
  std::ostringstream out;
  const auto row = [&](std::string_view name, std::uint64_t value) {
    out << name;
    for (std::size_t i = name.size(); i < 16; ++i) out << ' ';
    out << value << '\n';
  };
  row("words", stats.words);
  row("vocab", stats.vocab);
  row("subwords", stats.subwords);
  row("subword_vocab", stats.subword_vocab);
  row("lines", stats.lines);
  return out.str();
}

std::string format_stats_machine(const CorpusStats& stats) {
  std::ostringstream out;
  out << "words=" << stats.words << '\n'
      << "vocab=" << stats.vocab << '\n'
      << "subwords=" << stats.subwords << '\n'
      << "subword_vocab=" << stats.subword_vocab << '\n'
      << "lines=" << stats.lines << '\n';
  return out.str();
}

void check_uniform_arity(const std::vector<Sentence>& corpus) {
  std::optional<std::size_t> arity;
  for (std::size_t line = 0; line < corpus.size(); ++line) {
    for (const auto& token : corpus[line].tokens) {
      if (!arity.has_value()) {
        arity = token.features.size();
      } else if (token.features.size() != *arity) {
        raise(Errc::ragged_features,
              "line " + std::to_string(line) + " token '" + token.surface + "' has " +
                  std::to_string(token.features.size()) + " features, expected " +
                  std::to_string(*arity));
      }
    }
  }
}

Sentence lowercase_sentence(const Sentence& sentence) {
  Sentence out = sentence;
  for (auto& token : out.tokens) token.surface = utf8_lowercase(token.surface);
  return out;
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> read_lines_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_failure, "cannot open '" + path + "' for reading");
  return read_lines(in);
}

void write_lines_file(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_failure, "cannot open '" + path + "' for writing");
  for (const auto& line : lines) out << line << '\n';
  if (!out) raise(Errc::io_failure, "failed writing '" + path + "'");
}

std::vector<Sentence> parse_corpus(const std::vector<std::string>& lines,
                                   std::string_view separator) {
  std::vector<Sentence> corpus;
  corpus.reserve(lines.size());
  for (const auto& line : lines) corpus.push_back(parse_token_line(line, separator));
  return corpus;
}

std::vector<std::string> render_corpus(const std::vector<Sentence>& corpus,
                                       std::string_view separator) {
  std::vector<std::string> lines;
  lines.reserve(corpus.size());
  for (const auto& sentence : corpus) lines.push_back(render_token_line(sentence, separator));
  return lines;
}

std::vector<AlignmentSet> parse_alignment_corpus(const std::vector<std::string>& lines) {
  std::vector<AlignmentSet> out;
  out.reserve(lines.size());
  for (const auto& line : lines) out.push_back(read_alignment_line(line));
  return out;
}

}  // namespace mtkit
