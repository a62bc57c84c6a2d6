#include <functional>
#include <random>

#include "doctest.h"
#include "mtkit/annotate.hpp"
#include "mtkit/error.hpp"

using namespace mtkit;

namespace {

const char* kSnakeLexicon = R"(("snake" NST ALO "snake" CL (P-S S-01) KN CNT ON CO SX (N) TYN (ANI))
("snake" VST ALO "snak" ARGS ((($SUBJ N1 (TYN CNC LOC C-POT)) ($ADV DIR)))
    CL (G-ING I-E P-ED PA-ED PR-ES1) ON CO PLC (NF))
)";

// "I own the house down the street" as the Lucy LT analysis tree prints it,
// with rule ids and the '$' sentinels.
const char* kHouseTree =
    "(S:169 ($: $) (CLS:135 (NP:97 (NO:57 (PRN: I))) (PRED:83 (VB:60 (VST: own))) "
    "(NP:130 (DETP:61 (DET: the)) (NO:62 (NST: house))) "
    "(PP:107 (PREPP:68 (PREP: down)) (NP:103 (DETP:69 (DET: the)) (NO:70 (NST: street))))) "
    "($: $))";

AmbiguityIndex snake_index() { return AmbiguityIndex::build(parse_lexicon(kSnakeLexicon)); }

std::vector<std::string> leaf_surfaces(const ParseTree& tree) {
  if (tree.is_leaf()) return {tree.surface};
  std::vector<std::string> out;
  for (const auto& child : tree.children) {
    const auto sub = leaf_surfaces(child);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

}  // namespace

TEST_CASE("annotate_catcl") {
  const auto index = snake_index();
  const Sentence annotated = annotate_catcl(parse_token_line("snake", "|"), index);
  CHECK(render_token_line(annotated, "|") ==
        "snake|NST_VST|P-S+S-01_G-ING+I-E+P-ED+PA-ED+PR-ES1");

  CHECK(render_token_line(annotate_catcl(parse_token_line("zzz", "|"), index), "|") ==
        "zzz|NONE|NONE");
  CHECK(annotate_catcl(Sentence{}, index).empty());
}

TEST_CASE("disambiguate_catcl filters analyses by the external tag") {
  const auto index = snake_index();
  PosTagMap map;
  map["NN"] = {"NST"};

  const Sentence nn = disambiguate_catcl(parse_token_line("snake"), {"NN"}, map, index);
  CHECK(nn.tokens[0].features == std::vector<std::string>{"NST", "P-S+S-01"});

  // Unmapped tag: the full ambiguity bundle stays.
  const Sentence uh = disambiguate_catcl(parse_token_line("snake"), {"UH"}, map, index);
  CHECK(uh.tokens[0].features ==
        std::vector<std::string>{"NST_VST", "P-S+S-01_G-ING+I-E+P-ED+PA-ED+PR-ES1"});

  const Sentence unknown = disambiguate_catcl(parse_token_line("zzz"), {"NN"}, map, index);
  CHECK(unknown.tokens[0].features == std::vector<std::string>{"NONE", "NONE"});

  CHECK_THROWS_AS(disambiguate_catcl(parse_token_line("a b"), {"NN"}, map, index), Error);
}

TEST_CASE("disambiguation only removes analyses") {
  const auto index = snake_index();
  PosTagMap map;
  map["NN"] = {"NST"};
  map["VB"] = {"VST"};
  CHECK(disambiguate_catcl(parse_token_line("snake"), {"NN"}, map, index).tokens[0].features[0] ==
        "NST");
  CHECK(disambiguate_catcl(parse_token_line("snake"), {"VB"}, map, index).tokens[0].features[0] ==
        "VST");
  CHECK(disambiguate_catcl(parse_token_line("snake"), {"UH"}, map, index).tokens[0].features[0] ==
        "NST_VST");
}

TEST_CASE("annotate_pos attaches tags verbatim") {
  CHECK(render_token_line(annotate_pos(parse_token_line("dog"), {"NN"}), "|") == "dog|NN");
  CHECK(annotate_pos(Sentence{}, {}).empty());
  CHECK(render_token_line(annotate_pos(parse_token_line("I own"), {"PRP", "VBP"}), "|") ==
        "I|PRP own|VBP");
  CHECK_THROWS_AS(annotate_pos(parse_token_line("a"), {}), Error);
}

TEST_CASE("parse_bracketed_tree") {
  const ParseTree t = parse_bracketed_tree("(NO:57 (PRN I))");
  CHECK(t.label == "NO");
  REQUIRE(t.children.size() == 1);
  CHECK(t.children[0].label == "PRN");
  REQUIRE(t.children[0].children.size() == 1);
  CHECK(t.children[0].children[0].surface == "I");

  const ParseTree simple = parse_bracketed_tree("(X y)");
  CHECK(simple.label == "X");
  CHECK(simple.children[0].surface == "y");

  const ParseTree stripped = parse_bracketed_tree("(S:1 (A:2 a) (B b))");
  CHECK(stripped.label == "S");
  CHECK(stripped.children[0].label == "A");
  CHECK(stripped.children[1].label == "B");

  CHECK_THROWS_AS(parse_bracketed_tree("()"), Error);
  CHECK_THROWS_AS(parse_bracketed_tree("(X)"), Error);
  CHECK_THROWS_AS(parse_bracketed_tree("(X y"), Error);
  CHECK_THROWS_AS(parse_bracketed_tree("(X y))"), Error);
  CHECK_THROWS_AS(parse_bracketed_tree("x"), Error);
}

TEST_CASE("linearize_tree reproduces the house example") {
  const ParseTree tree = strip_sentinels(parse_bracketed_tree(kHouseTree));
  LinearizeOptions options;
  options.bracketed_labels = {"CLS", "NP", "PP"};
  const Sentence linear = linearize_tree(tree, options);

  const std::vector<std::string> expected = {
      "\xE2\xA6\x85", "I",   "own", "\xE2\xA6\x85", "the", "house", "\xE2\xA6\x86",
      "\xE2\xA6\x85", "down", "\xE2\xA6\x85", "the", "street", "\xE2\xA6\x86",
      "\xE2\xA6\x86", "\xE2\xA6\x86"};
  CHECK(linear.surfaces() == expected);

  // Phrase features: grandparent of each preterminal.
  for (const auto& token : linear.tokens) {
    REQUIRE(token.features.size() == 1);
    if (token.surface == "house") CHECK(token.features[0] == "NP");
    if (token.surface == "own") CHECK(token.features[0] == "PRED");
    if (token.surface == "I") CHECK(token.features[0] == "NP");
    if (token.surface == "down") CHECK(token.features[0] == "PP");
    if (token.surface == "\xE2\xA6\x85") CHECK(token.features[0] == "BR");
  }
}

TEST_CASE("linearize_tree grandparent fallbacks") {
  const Sentence deep = linearize_tree(parse_bracketed_tree("(X (Y (Z w)))"), {});
  REQUIRE(deep.size() == 1);
  CHECK(deep.tokens[0].surface == "w");
  CHECK(deep.tokens[0].features[0] == "X");

  const Sentence shallow = linearize_tree(parse_bracketed_tree("(X (Y w))"), {});
  CHECK(shallow.tokens[0].features[0] == "X");

  const Sentence flat = linearize_tree(parse_bracketed_tree("(X w)"), {});
  CHECK(flat.tokens[0].features[0] == "X");
}

TEST_CASE("single-word constituents are not bracketed") {
  LinearizeOptions options;
  options.bracketed_labels = {"NP"};
  const Sentence s = linearize_tree(parse_bracketed_tree("(S (NP (N dog)) (V runs))"), options);
  CHECK(s.surfaces() == std::vector<std::string>{"dog", "runs"});
}

TEST_CASE("same-span nested constituents emit one bracket pair") {
  LinearizeOptions options;
  options.bracketed_labels = {"NP", "NO"};
  const Sentence s =
      linearize_tree(parse_bracketed_tree("(S (NP (NO (D the) (N dog))))"), options);
  CHECK(s.surfaces() ==
        std::vector<std::string>{"\xE2\xA6\x85", "the", "dog", "\xE2\xA6\x86"});
}

TEST_CASE("linearize properties on random trees") {
  std::mt19937_64 rng(31);
  const std::vector<std::string> labels = {"NP", "PP", "VB", "CLS", "X"};
  const std::vector<std::string> words = {"a", "b", "c", "d"};

  // Random tree with the requested number of leaves.
  const std::function<ParseTree(std::size_t, int)> gen = [&](std::size_t leaves,
                                                             int depth) -> ParseTree {
    ParseTree node;
    node.label = labels[rng() % labels.size()];
    if (leaves == 1 && (depth > 2 || rng() % 2 == 0)) {
      ParseTree leaf;
      leaf.surface = words[rng() % words.size()];
      node.children.push_back(leaf);
      return node;
    }
    std::size_t remaining = leaves;
    while (remaining > 0) {
      const std::size_t take = remaining == 1 ? 1 : 1 + rng() % remaining;
      node.children.push_back(gen(take, depth + 1));
      remaining -= take;
    }
    return node;
  };

  LinearizeOptions options;
  options.bracketed_labels = {"NP", "PP", "CLS"};
  for (int iter = 0; iter < 200; ++iter) {
    const ParseTree tree = gen(1 + rng() % 6, 0);
    const Sentence linear = linearize_tree(tree, options);

    // Bracket tokens are balanced and words appear in leaf order.
    int open = 0;
    std::vector<std::string> word_sequence;
    for (const auto& token : linear.tokens) {
      REQUIRE(token.features.size() == 1);
      if (token.surface == options.open_token) {
        ++open;
      } else if (token.surface == options.close_token) {
        --open;
        CHECK(open >= 0);
      } else {
        word_sequence.push_back(token.surface);
      }
    }
    CHECK(open == 0);
    CHECK(word_sequence == leaf_surfaces(tree));
  }
}

TEST_CASE("the arity validator accepts every annotation output") {
  const auto index = snake_index();
  std::vector<Sentence> corpus;
  for (const std::string line : {"the snake hides", "", "snake snake"}) {
    corpus.push_back(annotate_catcl(parse_token_line(line), index));
  }
  CHECK_NOTHROW(check_uniform_arity(corpus));

  std::vector<Sentence> pos_corpus = {annotate_pos(parse_token_line("a b"), {"X", "Y"})};
  CHECK_NOTHROW(check_uniform_arity(pos_corpus));
}

TEST_CASE("pos tag map parsing") {
  const PosTagMap map = parse_pos_tag_map("NN\tNST\nX\tA+B\n# comment\n");
  CHECK(map.at("NN") == std::set<std::string>{"NST"});
  CHECK(map.at("X") == std::set<std::string>{"A", "B"});
  CHECK(map.count("ZZ") == 0);
  CHECK_THROWS_AS(parse_pos_tag_map("only-one-field\n"), Error);

  CHECK(default_penn_map().at("NN") == std::set<std::string>{"NST"});
  CHECK(default_penn_map().at("MD") == std::set<std::string>{"VST"});
}
