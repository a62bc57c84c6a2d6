#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mtkit/corpus.hpp"
#include "mtkit/lexicon.hpp"

namespace mtkit {

// Token-index span [start, end) with a class label (NE class or term domain).
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;

  bool operator==(const EntitySpan&) const = default;
};

// Spans must be in bounds, non-overlapping and sorted by start.
void validate_spans(const std::vector<EntitySpan>& spans, std::size_t sentence_length);

enum class TagMode { feature, replace };
enum class TagSet { binary, class_labels };

struct TagOptions {
  TagMode mode = TagMode::feature;
  TagSet tagset = TagSet::class_labels;
  std::string default_label = "GEN";  // feature carried by out-of-span tokens
  std::string binary_label = "NE";    // tag used when tagset == binary
};

struct SidecarEntry {
  std::string label;                 // the tag token that was emitted
  std::vector<std::string> phrase;   // original source surfaces

  bool operator==(const SidecarEntry&) const = default;
};

// One record per tag token emitted into the processed sentence, source order.
using ReplacementSidecar = std::vector<SidecarEntry>;

struct TaggedSentence {
  Sentence sentence;
  ReplacementSidecar sidecar;  // empty in feature mode
};

// feature mode: every token gains one feature (span label / binary label
// inside spans, default label outside). replace mode: each span collapses to
// one tag token and the sidecar records what it stood for.
TaggedSentence tag_entities(const Sentence& sentence, const std::vector<EntitySpan>& spans,
                            const TagOptions& options);

// Projects source spans through word alignments: minimal contiguous target
// range covering all linked indices. Same-label overlaps merge; differing
// labels keep the earlier span and count a drop.
std::vector<EntitySpan> project_spans(const std::vector<EntitySpan>& src_spans,
                                      const AlignmentSet& alignments, std::size_t tgt_length,
                                      std::size_t* dropped = nullptr);

// Training-side processing: tags the source; in replace mode the projected
// target spans are replaced with the same tag tokens, in feature mode the
// target stays plain.
ParallelPair prepare_training_pair(const ParallelPair& pair,
                                   const std::vector<EntitySpan>& src_spans,
                                   const AlignmentSet& alignments, const TagOptions& options);

// Emits every pair once processed, and pairs with spans once more untouched
// (feature mode: with all-default labels). Output ids are renumbered.
std::vector<ParallelPair> duplicate_augment(const std::vector<ParallelPair>& pairs,
                                            const std::vector<std::vector<EntitySpan>>& spans,
                                            const std::vector<AlignmentSet>* alignments,
                                            const TagOptions& options);

// Per-sentence soft alignment: one row per hypothesis token, one column per
// source token, rows sum to 1 within 1e-4.
class AttentionMatrix {
 public:
  AttentionMatrix(std::size_t rows, std::size_t cols, std::vector<double> weights);

  static AttentionMatrix from_json_line(std::string_view line);
  static std::vector<AttentionMatrix> from_json_lines(const std::vector<std::string>& lines);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double at(std::size_t row, std::size_t col) const { return weights_[row * cols_ + col]; }
  std::size_t row_argmax(std::size_t row) const;

  std::string to_json_line() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> weights_;
};

// Replaces hypothesis tag tokens left-to-right: each takes the unconsumed
// same-label source tag with the highest attention weight (fallback: any
// unconsumed tag, then the highest-attention consumed one), then splices in
// the dictionary translation of the recorded phrase, or the phrase itself on
// a miss. Hypothesis tags beyond the source tag count are deleted and counted
// in *extra_tags_deleted.
Sentence restore_tags(const Sentence& hypothesis, const Sentence& processed_source,
                      const ReplacementSidecar& sidecar, const AttentionMatrix& attention,
                      const TermDictionary& dictionary, const std::set<std::string>& tag_labels,
                      std::size_t* extra_tags_deleted = nullptr);

// One-token phrase table: source surface -> most frequent aligned target
// surface; count ties break on the lexicographically smaller target.
class PhraseTable {
 public:
  void add(std::string_view source, std::string_view target, std::int64_t count = 1);
  std::optional<std::string> lookup(std::string_view source) const;
  std::size_t size() const noexcept { return counts_.size(); }

  std::string serialize() const;  // TSV src, tgt, count
  static PhraseTable parse(std::string_view text);
  static PhraseTable parse_file(const std::string& path);

  void merge(const PhraseTable& other);

 private:
  std::map<std::string, std::map<std::string, std::int64_t>, std::less<>> counts_;
};

PhraseTable build_phrase_table(const std::vector<ParallelPair>& pairs,
                               const std::vector<AlignmentSet>& alignments);

// Each hypothesis token equal to unk_token becomes the phrase-table entry of
// its attention-argmax source token, or that source token itself on a miss.
Sentence replace_unknowns(const Sentence& hypothesis, const Sentence& source,
                          const AttentionMatrix& attention, const PhraseTable& table,
                          std::string_view unk_token = "<unk>");

// Longest-match left-to-right scan of the dictionary's source phrases
// (case-folded); matches cannot overlap, label ties go to the smaller label.
std::vector<EntitySpan> find_term_spans(const Sentence& sentence,
                                        const TermDictionary& dictionary);

// Span file line: space-separated `start:end:label` triples; empty line = none.
std::vector<EntitySpan> parse_span_line(std::string_view line);
std::string render_span_line(const std::vector<EntitySpan>& spans);

// Sidecar file line: tab-separated records, each `label U+241F phrase`.
ReplacementSidecar parse_sidecar_line(std::string_view line);
std::string render_sidecar_line(const ReplacementSidecar& sidecar);

}  // namespace mtkit
