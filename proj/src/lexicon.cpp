#include "mtkit/lexicon.hpp"

#include <algorithm>
#include <tuple>

#include "mtkit/corpus.hpp"
#include "mtkit/error.hpp"
#include "mtkit/text.hpp"

namespace mtkit {

namespace {

struct SexprNode {
  bool is_group = false;
  bool quoted = false;
  std::string atom;
  std::vector<SexprNode> children;
};

class SexprParser {
 public:
  explicit SexprParser(std::string_view text) : text_(text) {}

  std::vector<SexprNode> parse_top_level() {
    std::vector<SexprNode> forms;
    while (true) {
      skip_ws();
      if (at_end()) return forms;
      if (peek() != '(') {
        raise(Errc::unbalanced_parens,
              "expected '(' at offset " + std::to_string(pos_));
      }
      forms.push_back(parse_group());
    }
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void skip_ws() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r')) {
      ++pos_;
    }
  }

  SexprNode parse_group() {
    ++pos_;  // consume '('
    SexprNode group;
    group.is_group = true;
    while (true) {
      skip_ws();
      if (at_end()) raise(Errc::unbalanced_parens, "unterminated form");
      if (peek() == ')') {
        ++pos_;
        return group;
      }
      if (peek() == '(') {
        group.children.push_back(parse_group());
      } else if (peek() == '"') {
        group.children.push_back(parse_quoted());
      } else {
        group.children.push_back(parse_atom());
      }
    }
  }

  SexprNode parse_quoted() {
    ++pos_;  // consume '"'
    SexprNode node;
    node.quoted = true;
    while (true) {
      if (at_end()) raise(Errc::unbalanced_parens, "unterminated quoted string");
      const char c = text_[pos_++];
      if (c == '"') return node;
      if (c == '\\' && !at_end()) {
        node.atom.push_back(text_[pos_++]);
      } else {
        node.atom.push_back(c);
      }
    }
  }

  SexprNode parse_atom() {
    SexprNode node;
    while (!at_end()) {
      const char c = peek();
      if (c == '(' || c == ')' || c == '"' || c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        break;
      }
      node.atom.push_back(c);
      ++pos_;
    }
    return node;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string serialize_node(const SexprNode& node) {
  if (!node.is_group) return node.atom;
  std::string out = "(";
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += serialize_node(node.children[i]);
  }
  out.push_back(')');
  return out;
}

std::vector<std::string> value_list(const SexprNode& node) {
  // An atom is a single value; a group contributes one value per item, with
  // nested groups re-serialized as one opaque value.
  if (!node.is_group) return {node.atom};
  std::vector<std::string> values;
  values.reserve(node.children.size());
  for (const auto& child : node.children) values.push_back(serialize_node(child));
  return values;
}

LexiconEntry entry_from_form(const SexprNode& form) {
  if (form.children.empty() || form.children[0].is_group || form.children[0].atom.empty()) {
    raise(Errc::missing_surface, "entry form without a headword: " + serialize_node(form));
  }
  if (form.children.size() < 2 || form.children[1].is_group || form.children[1].atom.empty()) {
    raise(Errc::missing_category,
          "entry for '" + form.children[0].atom + "' has no category");
  }
  LexiconEntry entry;
  entry.surface = form.children[0].atom;
  entry.category = form.children[1].atom;
  // Strict alternating pairing: each key atom takes exactly the next item.
  std::size_t i = 2;
  while (i < form.children.size()) {
    const SexprNode& key_node = form.children[i];
    if (key_node.is_group) {
      raise(Errc::bad_format, "expected an attribute key, got a group in entry '" +
                                  entry.surface + "'");
    }
    std::vector<std::string> values;
    if (i + 1 < form.children.size()) {
      values = value_list(form.children[i + 1]);
      i += 2;
    } else {
      i += 1;  // trailing key with no value acts as a flag
    }
    entry.attributes.emplace_back(key_node.atom, std::move(values));
  }
  return entry;
}

}  // namespace

const std::vector<std::string>* LexiconEntry::find_attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::vector<std::string> LexiconEntry::cl_values() const {
  const auto* values = find_attribute("CL");
  return values != nullptr ? *values : std::vector<std::string>{};
}

std::vector<LexiconEntry> parse_lexicon(std::string_view text) {
  SexprParser parser(text);
  std::vector<LexiconEntry> entries;
  for (const auto& form : parser.parse_top_level()) {
    entries.push_back(entry_from_form(form));
  }
  return entries;
}

std::vector<LexiconEntry> parse_lexicon_file(const std::string& path) {
  const auto lines = read_lines_file(path);
  std::string text;
  for (const auto& line : lines) {
    text += line;
    text.push_back('\n');
  }
  return parse_lexicon(text);
}

AmbiguityIndex AmbiguityIndex::build(const std::vector<LexiconEntry>& entries) {
  AmbiguityIndex index;
  for (const auto& entry : entries) {
    index.by_surface_[utf8_lowercase(entry.surface)].push_back(entry);
  }
  // Order by (category, file position); push_back preserved file position,
  // so a stable sort on category is enough.
  for (auto& [surface, list] : index.by_surface_) {
    std::stable_sort(list.begin(), list.end(),
                     [](const LexiconEntry& a, const LexiconEntry& b) {
                       return a.category < b.category;
                     });
  }
  return index;
}

const std::vector<LexiconEntry>& AmbiguityIndex::lookup(std::string_view surface) const {
  const auto it = by_surface_.find(utf8_lowercase(surface));
  return it != by_surface_.end() ? it->second : empty_;
}

FeatureBundle features_from_entries(const std::vector<LexiconEntry>& entries) {
  if (entries.empty()) {
    return {std::string(kNoAnalysisTag), std::string(kNoAnalysisTag)};
  }
  std::vector<std::string> categories;
  for (const auto& entry : entries) categories.push_back(entry.category);
  std::sort(categories.begin(), categories.end());
  categories.erase(std::unique(categories.begin(), categories.end()), categories.end());

  // One CL contribution per entry; sorting includes the joined list so the
  // tag is invariant under lexicon file reordering.
  std::vector<std::pair<std::string, std::string>> cl_parts;
  for (const auto& entry : entries) {
    const auto values = entry.cl_values();
    const std::string joined =
        values.empty() ? std::string(kNoAnalysisTag) : join(values, "+");
    cl_parts.emplace_back(entry.category, joined);
  }
  std::sort(cl_parts.begin(), cl_parts.end());

  std::vector<std::string> cl_strings;
  cl_strings.reserve(cl_parts.size());
  for (auto& [category, joined] : cl_parts) cl_strings.push_back(std::move(joined));

  return {join(categories, "_"), join(cl_strings, "_")};
}

FeatureBundle lookup_features(std::string_view surface, const AmbiguityIndex& index) {
  return features_from_entries(index.lookup(surface));
}

TermDictionary TermDictionary::parse(std::string_view text) {
  TermDictionary dict;
  std::size_t line_no = 0;
  for (std::string_view line : split_on(text, "\n")) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split_on(line, "\t");
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      raise(Errc::missing_field, "term dictionary line " + std::to_string(line_no) +
                                     " needs source<TAB>target<TAB>label");
    }
    std::vector<std::string> source;
    for (auto piece : split_ws(fields[0])) source.emplace_back(piece);
    std::vector<std::string> target;
    for (auto piece : split_ws(fields[1])) target.emplace_back(piece);
    if (source.empty() || target.empty()) {
      raise(Errc::missing_field,
            "term dictionary line " + std::to_string(line_no) + " has an empty phrase");
    }
    dict.insert(std::move(source), std::string(fields[2]), std::move(target));
  }
  return dict;
}

TermDictionary TermDictionary::parse_file(const std::string& path) {
  const auto lines = read_lines_file(path);
  std::string text;
  for (const auto& line : lines) {
    text += line;
    text.push_back('\n');
  }
  return parse(text);
}

void TermDictionary::insert(std::vector<std::string> source, std::string label,
                            std::vector<std::string> target) {
  Key key{std::move(source), std::move(label)};
  const auto it = entries_.find(key);
  if (it != entries_.end()) {
    ++duplicate_warnings_;
    it->second = std::move(target);
  } else {
    entries_.emplace(std::move(key), std::move(target));
  }
}

const std::vector<std::string>* TermDictionary::lookup(const std::vector<std::string>& source,
                                                       std::string_view label) const {
  const auto it = entries_.find(Key{source, std::string(label)});
  return it != entries_.end() ? &it->second : nullptr;
}

}  // namespace mtkit
