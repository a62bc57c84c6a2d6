#include "mtkit/entity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "mtkit/error.hpp"
#include "mtkit/text.hpp"

#include "json.hpp"

namespace mtkit {

namespace {

constexpr std::string_view kSidecarSep = "\xE2\x90\x9F";  // U+241F

std::string span_label_for(const EntitySpan& span, const TagOptions& options) {
  return options.tagset == TagSet::class_labels ? span.label : options.binary_label;
}

std::size_t parse_number(std::string_view text, std::string_view context) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    raise(Errc::bad_format, "bad number '" + std::string(text) + "' in " + std::string(context));
  }
  return value;
}

}  // namespace

void validate_spans(const std::vector<EntitySpan>& spans, std::size_t sentence_length) {
  std::size_t previous_end = 0;
  bool first = true;
  for (const auto& span : spans) {
    if (span.start >= span.end || span.end > sentence_length) {
      raise(Errc::span_out_of_bounds,
            "span " + std::to_string(span.start) + ":" + std::to_string(span.end) +
                " in a sentence of " + std::to_string(sentence_length) + " tokens");
    }
    if (!first && span.start < previous_end) {
      raise(Errc::overlapping_spans,
            "span starting at " + std::to_string(span.start) + " overlaps the previous one");
    }
    previous_end = span.end;
    first = false;
  }
}

TaggedSentence tag_entities(const Sentence& sentence, const std::vector<EntitySpan>& spans,
                            const TagOptions& options) {
  validate_spans(spans, sentence.size());
  TaggedSentence out;

  if (options.mode == TagMode::feature) {
    out.sentence = sentence;
    std::size_t span_idx = 0;
    for (std::size_t i = 0; i < out.sentence.tokens.size(); ++i) {
      while (span_idx < spans.size() && spans[span_idx].end <= i) ++span_idx;
      const bool inside =
          span_idx < spans.size() && i >= spans[span_idx].start && i < spans[span_idx].end;
      out.sentence.tokens[i].features.push_back(
          inside ? span_label_for(spans[span_idx], options) : options.default_label);
    }
    return out;
  }

  std::size_t span_idx = 0;
  for (std::size_t i = 0; i < sentence.tokens.size();) {
    if (span_idx < spans.size() && i == spans[span_idx].start) {
      const auto& span = spans[span_idx];
      SidecarEntry entry;
      entry.label = span_label_for(span, options);
      for (std::size_t k = span.start; k < span.end; ++k) {
        entry.phrase.push_back(sentence.tokens[k].surface);
      }
      out.sentence.tokens.push_back({entry.label, {}});
      out.sidecar.push_back(std::move(entry));
      i = span.end;
      ++span_idx;
    } else {
      out.sentence.tokens.push_back(sentence.tokens[i]);
      ++i;
    }
  }
  return out;
}

std::vector<EntitySpan> project_spans(const std::vector<EntitySpan>& src_spans,
                                      const AlignmentSet& alignments, std::size_t tgt_length,
                                      std::size_t* dropped) {
  std::vector<EntitySpan> accepted;
  for (const auto& span : src_spans) {
    std::size_t lo = tgt_length;
    std::size_t hi = 0;
    bool linked = false;
    for (const auto& [src, tgt] : alignments.links) {
      if (src >= span.start && src < span.end) {
        lo = std::min(lo, tgt);
        hi = std::max(hi, tgt + 1);
        linked = true;
      }
    }
    if (!linked) continue;  // unalignable span projects nowhere
    if (hi > tgt_length) {
      raise(Errc::span_out_of_bounds, "alignment link beyond the target length " +
                                          std::to_string(tgt_length));
    }
    EntitySpan candidate{lo, hi, span.label};

    // Merge same-label overlaps; a differing label drops the later span.
    // Nothing is erased until the candidate is known to survive, so a drop
    // leaves every previously accepted span intact.
    bool drop = false;
    while (!drop) {
      auto overlap = std::find_if(accepted.begin(), accepted.end(), [&](const EntitySpan& e) {
        return candidate.start < e.end && e.start < candidate.end;
      });
      if (overlap == accepted.end()) break;
      if (overlap->label != candidate.label) {
        drop = true;
        break;
      }
      const EntitySpan merged{std::min(candidate.start, overlap->start),
                              std::max(candidate.end, overlap->end), candidate.label};
      // The widened range must not swallow a differing-label neighbour.
      const bool conflicts = std::any_of(accepted.begin(), accepted.end(), [&](const EntitySpan& e) {
        return e.label != merged.label && merged.start < e.end && e.start < merged.end;
      });
      if (conflicts) {
        drop = true;
        break;
      }
      candidate = merged;
      accepted.erase(overlap);
    }
    if (drop) {
      if (dropped != nullptr) ++*dropped;
      continue;
    }
    accepted.push_back(std::move(candidate));
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });
  return accepted;
}

ParallelPair prepare_training_pair(const ParallelPair& pair,
                                   const std::vector<EntitySpan>& src_spans,
                                   const AlignmentSet& alignments, const TagOptions& options) {
  ParallelPair out;
  out.id = pair.id;
  out.source = tag_entities(pair.source, src_spans, options).sentence;
  if (options.mode == TagMode::feature) {
    out.target = pair.target;  // the feature models keep the target plain
    return out;
  }
  const auto tgt_spans = project_spans(src_spans, alignments, pair.target.size());
  out.target = tag_entities(pair.target, tgt_spans, options).sentence;
  return out;
}

std::vector<ParallelPair> duplicate_augment(const std::vector<ParallelPair>& pairs,
                                            const std::vector<std::vector<EntitySpan>>& spans,
                                            const std::vector<AlignmentSet>* alignments,
                                            const TagOptions& options) {
  if (spans.size() != pairs.size()) {
    raise(Errc::line_count_mismatch, "span stream is not line-parallel with the corpus");
  }
  if (options.mode == TagMode::replace &&
      (alignments == nullptr || alignments->size() != pairs.size())) {
    raise(Errc::line_count_mismatch, "replace mode needs a line-parallel alignment stream");
  }
  std::vector<ParallelPair> out;
  static const AlignmentSet kNoLinks;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const AlignmentSet& links = alignments != nullptr ? (*alignments)[i] : kNoLinks;
    out.push_back(prepare_training_pair(pairs[i], spans[i], links, options));
    if (!spans[i].empty()) {
      // The intact copy: generic labels in feature mode, verbatim otherwise.
      if (options.mode == TagMode::feature) {
        out.push_back(prepare_training_pair(pairs[i], {}, links, options));
      } else {
        out.push_back(pairs[i]);
      }
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = i;
  return out;
}

AttentionMatrix::AttentionMatrix(std::size_t rows, std::size_t cols, std::vector<double> weights)
    : rows_(rows), cols_(cols), weights_(std::move(weights)) {
  if (weights_.size() != rows_ * cols_) {
    raise(Errc::dimension_mismatch, "attention weight count does not match rows*cols");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) {
      const double w = at(r, c);
      if (w < 0.0) raise(Errc::bad_format, "negative attention weight");
      sum += w;
    }
    if (cols_ > 0 && std::abs(sum - 1.0) > 1e-4) {
      raise(Errc::bad_format,
            "attention row " + std::to_string(r) + " sums to " + std::to_string(sum));
    }
  }
}

AttentionMatrix AttentionMatrix::from_json_line(std::string_view line) {
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::bad_format, std::string("attention JSON: ") + e.what());
  }
  if (!parsed.is_object() || !parsed.contains("attn") || !parsed["attn"].is_array()) {
    raise(Errc::bad_format, "attention line must be an object with an 'attn' array");
  }
  const auto& attn = parsed["attn"];
  const std::size_t rows = attn.size();
  std::size_t cols = 0;
  std::vector<double> weights;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!attn[r].is_array()) raise(Errc::bad_format, "attention rows must be arrays");
    if (r == 0) {
      cols = attn[r].size();
    } else if (attn[r].size() != cols) {
      raise(Errc::dimension_mismatch, "attention rows have differing lengths");
    }
    for (const auto& value : attn[r]) {
      if (!value.is_number()) raise(Errc::bad_format, "attention weights must be numbers");
      weights.push_back(value.get<double>());
    }
  }
  return AttentionMatrix(rows, cols, std::move(weights));
}

std::vector<AttentionMatrix> AttentionMatrix::from_json_lines(
    const std::vector<std::string>& lines) {
  std::vector<AttentionMatrix> out;
  out.reserve(lines.size());
  for (const auto& line : lines) out.push_back(from_json_line(line));
  return out;
}

std::size_t AttentionMatrix::row_argmax(std::size_t row) const {
  std::size_t best = 0;
  double best_weight = -1.0;
  for (std::size_t c = 0; c < cols_; ++c) {
    if (at(row, c) > best_weight) {
      best_weight = at(row, c);
      best = c;
    }
  }
  return best;
}

std::string AttentionMatrix::to_json_line() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < rows_; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < cols_; ++c) row.push_back(at(r, c));
    rows.push_back(std::move(row));
  }
  return nlohmann::json{{"attn", std::move(rows)}}.dump();
}

Sentence restore_tags(const Sentence& hypothesis, const Sentence& processed_source,
                      const ReplacementSidecar& sidecar, const AttentionMatrix& attention,
                      const TermDictionary& dictionary, const std::set<std::string>& tag_labels,
                      std::size_t* extra_tags_deleted) {
  // An empty hypothesis has an empty attention matrix that carries no column
  // count; there is nothing to restore.
  if (hypothesis.empty() && attention.rows() == 0) return hypothesis;
  if (attention.rows() != hypothesis.size() || attention.cols() != processed_source.size()) {
    raise(Errc::dimension_mismatch,
          "attention is " + std::to_string(attention.rows()) + "x" +
              std::to_string(attention.cols()) + " for a " + std::to_string(hypothesis.size()) +
              "x" + std::to_string(processed_source.size()) + " sentence pair");
  }

  std::vector<std::size_t> tag_positions;
  for (std::size_t i = 0; i < processed_source.tokens.size(); ++i) {
    if (tag_labels.count(processed_source.tokens[i].surface) > 0) tag_positions.push_back(i);
  }
  if (tag_positions.size() != sidecar.size()) {
    raise(Errc::sidecar_mismatch, "source has " + std::to_string(tag_positions.size()) +
                                      " tag tokens but the sidecar has " +
                                      std::to_string(sidecar.size()) + " records");
  }
  for (std::size_t k = 0; k < tag_positions.size(); ++k) {
    if (processed_source.tokens[tag_positions[k]].surface != sidecar[k].label) {
      raise(Errc::sidecar_mismatch, "sidecar record " + std::to_string(k) +
                                        " does not match the source tag token");
    }
  }

  std::vector<bool> consumed(tag_positions.size(), false);
  Sentence out;
  for (std::size_t t = 0; t < hypothesis.tokens.size(); ++t) {
    const auto& token = hypothesis.tokens[t];
    if (tag_labels.count(token.surface) == 0) {
      out.tokens.push_back(token);
      continue;
    }
    if (tag_positions.empty()) {
      if (extra_tags_deleted != nullptr) ++*extra_tags_deleted;
      continue;
    }

    // Prefer unconsumed same-label tags, then any unconsumed, then consumed.
    const auto pick = [&](auto&& eligible) -> std::ptrdiff_t {
      std::ptrdiff_t best = -1;
      double best_weight = -1.0;
      for (std::size_t k = 0; k < tag_positions.size(); ++k) {
        if (!eligible(k)) continue;
        const double w = attention.at(t, tag_positions[k]);
        if (w > best_weight) {
          best_weight = w;
          best = static_cast<std::ptrdiff_t>(k);
        }
      }
      return best;
    };
    std::ptrdiff_t chosen =
        pick([&](std::size_t k) { return !consumed[k] && sidecar[k].label == token.surface; });
    if (chosen < 0) chosen = pick([&](std::size_t k) { return !consumed[k]; });
    if (chosen < 0) chosen = pick([&](std::size_t) { return true; });

    const auto& record = sidecar[static_cast<std::size_t>(chosen)];
    consumed[static_cast<std::size_t>(chosen)] = true;
    const std::vector<std::string>* translation = dictionary.lookup(record.phrase, record.label);
    const std::vector<std::string>& pieces =
        translation != nullptr ? *translation : record.phrase;  // miss -> copy through
    for (const auto& piece : pieces) {
      out.tokens.push_back({piece, token.features});
    }
  }
  return out;
}

void PhraseTable::add(std::string_view source, std::string_view target, std::int64_t count) {
  counts_[std::string(source)][std::string(target)] += count;
}

std::optional<std::string> PhraseTable::lookup(std::string_view source) const {
  const auto it = counts_.find(source);
  if (it == counts_.end()) return std::nullopt;
  const std::string* best = nullptr;
  std::int64_t best_count = 0;
  for (const auto& [target, count] : it->second) {
    // std::map iterates targets in order, so ties keep the smaller one.
    if (count > best_count) {
      best_count = count;
      best = &target;
    }
  }
  return best != nullptr ? std::optional<std::string>(*best) : std::nullopt;
}

std::string PhraseTable::serialize() const {
  std::ostringstream out;
  for (const auto& [source, targets] : counts_) {
    for (const auto& [target, count] : targets) {
      out << source << '\t' << target << '\t' << count << '\n';
    }
  }
  return out.str();
}

PhraseTable PhraseTable::parse(std::string_view text) {
  PhraseTable table;
  std::size_t line_no = 0;
  for (std::string_view line : split_on(text, "\n")) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split_on(line, "\t");
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      raise(Errc::missing_field,
            "phrase table line " + std::to_string(line_no) + " needs src<TAB>tgt<TAB>count");
    }
    const std::size_t count = parse_number(fields[2], "phrase table count");
    if (count == 0) raise(Errc::bad_format, "phrase table counts must be >= 1");
    table.add(fields[0], fields[1], static_cast<std::int64_t>(count));
  }
  return table;
}

PhraseTable PhraseTable::parse_file(const std::string& path) {
  const auto lines = read_lines_file(path);
  std::string text;
  for (const auto& line : lines) {
    text += line;
    text.push_back('\n');
  }
  return parse(text);
}

void PhraseTable::merge(const PhraseTable& other) {
  for (const auto& [source, targets] : other.counts_) {
    for (const auto& [target, count] : targets) {
      counts_[source][target] += count;
    }
  }
}

PhraseTable build_phrase_table(const std::vector<ParallelPair>& pairs,
                               const std::vector<AlignmentSet>& alignments) {
  if (pairs.size() != alignments.size()) {
    raise(Errc::line_count_mismatch, "alignment stream is not line-parallel with the corpus");
  }
  PhraseTable table;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (const auto& [src, tgt] : alignments[i].links) {
      if (src >= pairs[i].source.size() || tgt >= pairs[i].target.size()) {
        raise(Errc::span_out_of_bounds,
              "alignment link " + std::to_string(src) + "-" + std::to_string(tgt) +
                  " out of bounds on line " + std::to_string(i));
      }
      table.add(pairs[i].source.tokens[src].surface, pairs[i].target.tokens[tgt].surface);
    }
  }
  return table;
}

Sentence replace_unknowns(const Sentence& hypothesis, const Sentence& source,
                          const AttentionMatrix& attention, const PhraseTable& table,
                          std::string_view unk_token) {
  if (hypothesis.empty() && attention.rows() == 0) return hypothesis;
  if (attention.rows() != hypothesis.size() || attention.cols() != source.size()) {
    raise(Errc::dimension_mismatch, "attention does not match the sentence pair");
  }
  Sentence out = hypothesis;
  for (std::size_t t = 0; t < out.tokens.size(); ++t) {
    if (out.tokens[t].surface != unk_token) continue;
    const std::size_t col = attention.row_argmax(t);
    const std::string& src_surface = source.tokens[col].surface;
    const auto replacement = table.lookup(src_surface);
    out.tokens[t].surface = replacement.has_value() ? *replacement : src_surface;
  }
  return out;
}

std::vector<EntitySpan> find_term_spans(const Sentence& sentence,
                                        const TermDictionary& dictionary) {
  // Group dictionary keys by their folded first token, longest phrase first.
  struct Candidate {
    std::vector<std::string> folded;
    std::string label;
  };
  std::map<std::string, std::vector<Candidate>> by_first;
  for (const auto& [key, target] : dictionary.entries()) {
    Candidate candidate;
    for (const auto& token : key.first) candidate.folded.push_back(utf8_lowercase(token));
    candidate.label = key.second;
    by_first[candidate.folded.front()].push_back(std::move(candidate));
  }
  for (auto& [first, candidates] : by_first) {
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.folded.size() != b.folded.size()) return a.folded.size() > b.folded.size();
      if (a.folded != b.folded) return a.folded < b.folded;
      return a.label < b.label;
    });
  }

  std::vector<std::string> folded_surfaces;
  folded_surfaces.reserve(sentence.size());
  for (const auto& token : sentence.tokens) {
    folded_surfaces.push_back(utf8_lowercase(token.surface));
  }

  std::vector<EntitySpan> spans;
  std::size_t i = 0;
  while (i < folded_surfaces.size()) {
    const auto it = by_first.find(folded_surfaces[i]);
    bool matched = false;
    if (it != by_first.end()) {
      for (const auto& candidate : it->second) {
        const std::size_t len = candidate.folded.size();
        if (i + len > folded_surfaces.size()) continue;
        if (std::equal(candidate.folded.begin(), candidate.folded.end(),
                       folded_surfaces.begin() + static_cast<std::ptrdiff_t>(i))) {
          spans.push_back({i, i + len, candidate.label});
          i += len;
          matched = true;
          break;
        }
      }
    }
    if (!matched) ++i;
  }
  return spans;
}

std::vector<EntitySpan> parse_span_line(std::string_view line) {
  std::vector<EntitySpan> spans;
  for (std::string_view field : split_ws(line)) {
    const auto parts = split_on(field, ":");
    if (parts.size() != 3 || parts[2].empty()) {
      raise(Errc::bad_format, "span field must be start:end:label, got '" + std::string(field) +
                                  "'");
    }
    spans.push_back({parse_number(parts[0], "span start"), parse_number(parts[1], "span end"),
                     std::string(parts[2])});
  }
  return spans;
}

std::string render_span_line(const std::vector<EntitySpan>& spans) {
  std::string out;
  for (const auto& span : spans) {
    if (!out.empty()) out.push_back(' ');
    out += std::to_string(span.start) + ":" + std::to_string(span.end) + ":" + span.label;
  }
  return out;
}

ReplacementSidecar parse_sidecar_line(std::string_view line) {
  ReplacementSidecar sidecar;
  if (line.empty()) return sidecar;
  for (std::string_view record : split_on(line, "\t")) {
    const auto parts = split_on(record, kSidecarSep);
    if (parts.size() != 2 || parts[0].empty() || parts[1].empty()) {
      raise(Errc::bad_format, "sidecar record must be label\xE2\x90\x9Fphrase");
    }
    SidecarEntry entry;
    entry.label = std::string(parts[0]);
    for (auto piece : split_ws(parts[1])) entry.phrase.emplace_back(piece);
    sidecar.push_back(std::move(entry));
  }
  return sidecar;
}

std::string render_sidecar_line(const ReplacementSidecar& sidecar) {
  std::string out;
  for (std::size_t i = 0; i < sidecar.size(); ++i) {
    if (i > 0) out.push_back('\t');
    out += sidecar[i].label;
    out += kSidecarSep;
    out += join(sidecar[i].phrase, " ");
  }
  return out;
}

}  // namespace mtkit
