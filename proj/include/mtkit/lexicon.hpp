#pragma once

#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mtkit {

// Placeholder tag for surfaces without any lexicon analysis. Features must
// exist for every token to keep feature arity uniform.
inline constexpr std::string_view kNoAnalysisTag = "NONE";

// One monolingual lexicon entry: headword, category (POS) and the remaining
// key/value attributes in file order. Nested value groups (ARGS and friends)
// are kept verbatim as single re-serialized values; only CAT and CL carry
// semantics here.
struct LexiconEntry {
  std::string surface;
  std::string category;
  std::vector<std::pair<std::string, std::vector<std::string>>> attributes;

  const std::vector<std::string>* find_attribute(std::string_view key) const;
  std::vector<std::string> cl_values() const;

  bool operator==(const LexiconEntry&) const = default;
};

std::vector<LexiconEntry> parse_lexicon(std::string_view text);
std::vector<LexiconEntry> parse_lexicon_file(const std::string& path);

// surface -> analyses, case-folded, entries ordered by (category, file
// position). Built once, then immutable and shareable across readers.
class AmbiguityIndex {
 public:
  static AmbiguityIndex build(const std::vector<LexiconEntry>& entries);

  // Case-folds the query; unknown surfaces yield an empty list.
  const std::vector<LexiconEntry>& lookup(std::string_view surface) const;
  std::size_t surface_count() const noexcept { return by_surface_.size(); }

 private:
  std::unordered_map<std::string, std::vector<LexiconEntry>> by_surface_;
  std::vector<LexiconEntry> empty_;
};

struct FeatureBundle {
  std::string cat_tag;
  std::string cl_tag;

  bool operator==(const FeatureBundle&) const = default;
};

// cat_tag: sorted distinct categories joined with '_'. cl_tag: one '+'-joined
// CL list per entry ('NONE' when the entry has no CL values), entries sorted
// by (category, joined list), joined with '_'. Unknown surface -> NONE/NONE.
FeatureBundle lookup_features(std::string_view surface, const AmbiguityIndex& index);
FeatureBundle features_from_entries(const std::vector<LexiconEntry>& entries);

// (source phrase, label) -> target phrase, from 3-column TSV. Duplicate keys
// keep the last line; the number of overwritten keys is reported.
class TermDictionary {
 public:
  using Key = std::pair<std::vector<std::string>, std::string>;

  static TermDictionary parse(std::string_view text);
  static TermDictionary parse_file(const std::string& path);

  void insert(std::vector<std::string> source, std::string label,
              std::vector<std::string> target);
  const std::vector<std::string>* lookup(const std::vector<std::string>& source,
                                         std::string_view label) const;
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t duplicate_warnings() const noexcept { return duplicate_warnings_; }
  const std::map<Key, std::vector<std::string>>& entries() const { return entries_; }

 private:
  std::map<Key, std::vector<std::string>> entries_;
  std::size_t duplicate_warnings_ = 0;
};

}  // namespace mtkit
