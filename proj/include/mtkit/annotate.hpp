#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mtkit/corpus.hpp"
#include "mtkit/lexicon.hpp"

namespace mtkit {

// External POS tag -> lexicon categories. Unmapped tags are absent.
using PosTagMap = std::map<std::string, std::set<std::string>>;

// 2-column TSV: external tag, '+'-joined categories.
PosTagMap parse_pos_tag_map(std::string_view text);
PosTagMap parse_pos_tag_map_file(const std::string& path);

// Best-effort Penn Treebank mapping; real deployments supply their own TSV.
PosTagMap default_penn_map();

// Adds exactly [cat_tag, cl_tag] to every token.
Sentence annotate_catcl(const Sentence& sentence, const AmbiguityIndex& index);

// Keeps only the analyses whose category matches the external tag's mapped
// set; keeps the full ambiguity bundle when nothing matches or the tag is
// unmapped.
Sentence disambiguate_catcl(const Sentence& sentence,
                            const std::vector<std::string>& external_tags,
                            const PosTagMap& map, const AmbiguityIndex& index);

// Attaches the external tag verbatim as the single feature.
Sentence annotate_pos(const Sentence& sentence,
                      const std::vector<std::string>& external_tags);

struct ParseTree {
  std::string label;    // empty for leaves
  std::string surface;  // empty for internal nodes
  std::vector<ParseTree> children;

  bool is_leaf() const noexcept { return label.empty(); }
  std::size_t leaf_count() const;

  bool operator==(const ParseTree&) const = default;
};

// Parses `(LABEL child child ...)` with bare-token leaves; a `:id` suffix on
// labels is stripped.
ParseTree parse_bracketed_tree(std::string_view text);

// Drops '$'-labelled sentinel subtrees and root-level '$' leaves.
ParseTree strip_sentinels(const ParseTree& tree);

struct LinearizeOptions {
  std::set<std::string> bracketed_labels = {"CLS", "NP", "PP", "AP", "ADVP"};
  std::string open_token = "\xE2\xA6\x85";   // U+2985
  std::string close_token = "\xE2\xA6\x86";  // U+2986
  std::string bracket_feature = "BR";
};

// Emits the leaf sequence with white-parenthesis tokens around every maximal
// multi-word constituent whose label is whitelisted. Words carry one feature:
// the label of the grandparent of their preterminal (fallback parent, then
// root); bracket tokens carry the placeholder feature.
Sentence linearize_tree(const ParseTree& tree, const LinearizeOptions& options = {});

}  // namespace mtkit
