#include "mtkit/annotate.hpp"

#include <algorithm>

#include "mtkit/error.hpp"
#include "mtkit/text.hpp"

namespace mtkit {

namespace {

void check_tag_count(const Sentence& sentence, const std::vector<std::string>& tags) {
  if (tags.size() != sentence.size()) {
    raise(Errc::length_mismatch, "sentence has " + std::to_string(sentence.size()) +
                                     " tokens but " + std::to_string(tags.size()) + " tags");
  }
}

}  // namespace

PosTagMap parse_pos_tag_map(std::string_view text) {
  PosTagMap map;
  std::size_t line_no = 0;
  for (std::string_view line : split_on(text, "\n")) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_on(line, "\t");
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      raise(Errc::missing_field,
            "tag map line " + std::to_string(line_no) + " needs tag<TAB>cat[+cat...]");
    }
    std::set<std::string> categories;
    for (auto piece : split_on(fields[1], "+")) {
      if (piece.empty()) {
        raise(Errc::missing_field, "tag map line " + std::to_string(line_no) +
                                       " has an empty category");
      }
      categories.emplace(piece);
    }
    map[std::string(fields[0])] = std::move(categories);
  }
  return map;
}

PosTagMap parse_pos_tag_map_file(const std::string& path) {
  const auto lines = read_lines_file(path);
  std::string text;
  for (const auto& line : lines) {
    text += line;
    text.push_back('\n');
  }
  return parse_pos_tag_map(text);
}

PosTagMap default_penn_map() {
  return {
      {"NN", {"NST"}},   {"NNS", {"NST"}},  {"NNP", {"NST"}},  {"NNPS", {"NST"}},
      {"VB", {"VST"}},   {"VBD", {"VST"}},  {"VBG", {"VST"}},  {"VBN", {"VST"}},
      {"VBP", {"VST"}},  {"VBZ", {"VST"}},  {"MD", {"VST"}},   {"JJ", {"AST"}},
      {"JJR", {"AST"}},  {"JJS", {"AST"}},  {"RB", {"ADV"}},   {"RBR", {"ADV"}},
      {"RBS", {"ADV"}},  {"IN", {"PREP"}},  {"TO", {"PREP"}},  {"DT", {"DET"}},
      {"WDT", {"DET"}},  {"PRP", {"PRN"}},  {"PRP$", {"PRN"}}, {"WP", {"PRN"}},
      {"CC", {"CONJ"}},  {"CD", {"NUM"}},   {"UH", {"INTJ"}},
  };
}

Sentence annotate_catcl(const Sentence& sentence, const AmbiguityIndex& index) {
  Sentence out = sentence;
  for (auto& token : out.tokens) {
    FeatureBundle bundle = lookup_features(token.surface, index);
    token.features.push_back(std::move(bundle.cat_tag));
    token.features.push_back(std::move(bundle.cl_tag));
  }
  return out;
}

Sentence disambiguate_catcl(const Sentence& sentence,
                            const std::vector<std::string>& external_tags,
                            const PosTagMap& map, const AmbiguityIndex& index) {
  check_tag_count(sentence, external_tags);
  Sentence out = sentence;
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    auto& token = out.tokens[i];
    const auto& all_entries = index.lookup(token.surface);
    const auto map_it = map.find(external_tags[i]);
    std::vector<LexiconEntry> kept;
    if (map_it != map.end()) {
      for (const auto& entry : all_entries) {
        if (map_it->second.count(entry.category) > 0) kept.push_back(entry);
      }
    }
    // An empty intersection (or an unmapped tag) keeps the full bundle.
    FeatureBundle bundle =
        kept.empty() ? features_from_entries(all_entries) : features_from_entries(kept);
    token.features.push_back(std::move(bundle.cat_tag));
    token.features.push_back(std::move(bundle.cl_tag));
  }
  return out;
}

Sentence annotate_pos(const Sentence& sentence, const std::vector<std::string>& external_tags) {
  check_tag_count(sentence, external_tags);
  Sentence out = sentence;
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    out.tokens[i].features.push_back(external_tags[i]);
  }
  return out;
}

std::size_t ParseTree::leaf_count() const {
  if (is_leaf()) return 1;
  std::size_t count = 0;
  for (const auto& child : children) count += child.leaf_count();
  return count;
}

namespace {

class TreeParser {
 public:
  explicit TreeParser(std::string_view text) : text_(text) {}

  ParseTree parse() {
    skip_ws();
    if (at_end() || peek() != '(') {
      raise(Errc::unbalanced_parens, "tree must start with '('");
    }
    ParseTree root = parse_node();
    skip_ws();
    if (!at_end()) raise(Errc::unbalanced_parens, "trailing text after tree");
    return root;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void skip_ws() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  std::string read_token() {
    std::string out;
    while (!at_end() && peek() != '(' && peek() != ')' && peek() != ' ' && peek() != '\t') {
      out.push_back(text_[pos_++]);
    }
    return out;
  }

  ParseTree parse_node() {
    ++pos_;  // consume '('
    skip_ws();
    std::string raw_label = read_token();
    if (raw_label.empty()) raise(Errc::empty_node, "node without a label");
    // Labels like NP:97 carry a rule id after ':'.
    const std::size_t colon = raw_label.find(':');
    ParseTree node;
    node.label = colon == std::string::npos ? raw_label : raw_label.substr(0, colon);
    if (node.label.empty()) raise(Errc::empty_node, "node label is only a rule id");
    while (true) {
      skip_ws();
      if (at_end()) raise(Errc::unbalanced_parens, "unterminated node");
      if (peek() == ')') {
        ++pos_;
        break;
      }
      if (peek() == '(') {
        node.children.push_back(parse_node());
      } else {
        ParseTree leaf;
        leaf.surface = read_token();
        node.children.push_back(std::move(leaf));
      }
    }
    if (node.children.empty()) {
      raise(Errc::empty_node, "node '" + node.label + "' has no children");
    }
    return node;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

ParseTree strip_sentinels_impl(const ParseTree& node, bool is_root) {
  ParseTree out;
  out.label = node.label;
  out.surface = node.surface;
  for (const auto& child : node.children) {
    if (!child.is_leaf() && child.label == "$") continue;
    if (is_root && child.is_leaf() && child.surface == "$") continue;
    out.children.push_back(strip_sentinels_impl(child, false));
  }
  return out;
}

struct LinearizeState {
  const LinearizeOptions* options;
  Sentence output;
};

// opened_* track the leaf span of the nearest emitted bracket so nested
// same-span constituents produce a single pair.
void linearize_node(const ParseTree& node, const std::vector<const ParseTree*>& ancestors,
                    std::size_t leaf_offset, std::size_t opened_begin, std::size_t opened_end,
                    const std::string& root_label, LinearizeState& state) {
  if (node.is_leaf()) {
    // Feature: grandparent of the preterminal, falling back to parent, root.
    // ancestors.back() is the preterminal.
    std::string feature = root_label;
    if (ancestors.size() >= 3) {
      feature = ancestors[ancestors.size() - 3]->label;
    } else if (ancestors.size() == 2) {
      feature = ancestors[ancestors.size() - 2]->label;
    }
    state.output.tokens.push_back({node.surface, {feature}});
    return;
  }

  const std::size_t span_begin = leaf_offset;
  const std::size_t span_end = leaf_offset + node.leaf_count();
  const bool bracket = state.options->bracketed_labels.count(node.label) > 0 &&
                       span_end - span_begin >= 2 &&
                       !(span_begin == opened_begin && span_end == opened_end);
  if (bracket) {
    state.output.tokens.push_back({state.options->open_token, {state.options->bracket_feature}});
    opened_begin = span_begin;
    opened_end = span_end;
  }
  std::vector<const ParseTree*> next_ancestors = ancestors;
  next_ancestors.push_back(&node);
  std::size_t child_offset = leaf_offset;
  for (const auto& child : node.children) {
    linearize_node(child, next_ancestors, child_offset, opened_begin, opened_end, root_label,
                   state);
    child_offset += child.leaf_count();
  }
  if (bracket) {
    state.output.tokens.push_back({state.options->close_token, {state.options->bracket_feature}});
  }
}

}  // namespace

ParseTree parse_bracketed_tree(std::string_view text) {
  return TreeParser(text).parse();
}

ParseTree strip_sentinels(const ParseTree& tree) {
  return strip_sentinels_impl(tree, true);
}

Sentence linearize_tree(const ParseTree& tree, const LinearizeOptions& options) {
  LinearizeState state{&options, {}};
  if (tree.is_leaf()) {
    state.output.tokens.push_back({tree.surface, {""}});
    return state.output;
  }
  if (tree.children.empty()) return state.output;
  linearize_node(tree, {}, 0, 0, 0, tree.label, state);
  return state.output;
}

}  // namespace mtkit
