#include <random>

#include "doctest.h"
#include "mtkit/error.hpp"
#include "mtkit/subword.hpp"
#include "mtkit/text.hpp"
#include "oracles.hpp"

using namespace mtkit;

namespace {

std::vector<Sentence> corpus_from(const std::vector<std::string>& lines) {
  std::vector<Sentence> out;
  for (const auto& line : lines) out.push_back(parse_token_line(line));
  return out;
}

// Chains single-symbol merges that build up the given pieces.
BpeModel model_for_pieces(const std::vector<std::vector<std::string>>& words) {
  BpeModel model;
  for (const auto& pieces : words) {
    for (std::size_t p = 0; p < pieces.size(); ++p) {
      std::string target = pieces[p];
      if (p + 1 == pieces.size()) target += kEndOfWord;
      auto symbols = utf8_codepoints(pieces[p]);
      if (p + 1 == pieces.size()) symbols.back() += kEndOfWord;
      std::string acc = symbols[0];
      for (std::size_t i = 1; i < symbols.size(); ++i) {
        model.merges.emplace_back(acc, symbols[i]);
        acc += symbols[i];
      }
    }
  }
  return model;
}

}  // namespace

TEST_CASE("bpe_learn first merge on the aa/ab corpus") {
  const auto corpus = corpus_from({"aa aa ab"});
  const BpeModel model = bpe_learn(corpus, 1);
  REQUIRE(model.merges.size() == 1);
  CHECK(model.merges[0] == std::pair<std::string, std::string>{"a", "a</w>"});

  // Independent oracle: recount the pairs and take the most frequent.
  const auto counts = oracles::pair_counts({"aa", "aa", "ab"});
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  CHECK(model.merges[0] == best->first);
  CHECK(best->second == 2);
}

TEST_CASE("bpe_learn stopping rules") {
  CHECK(bpe_learn(corpus_from({"aa aa ab"}), 0).merges.empty());
  // Distinct single-character words have no symbol pairs at all.
  CHECK(bpe_learn(corpus_from({"a b c"}), 10).merges.empty());
  // Every pair unique: nothing reaches frequency 2.
  CHECK(bpe_learn(corpus_from({"ab cd"}), 10).merges.empty());
  CHECK(bpe_learn({}, 10).merges.empty());
}

TEST_CASE("bpe_learn respects the merge budget") {
  std::mt19937_64 rng(5);
  std::vector<std::string> lines;
  for (int i = 0; i < 40; ++i) {
    std::string line;
    for (int w = 0; w < 6; ++w) {
      if (w > 0) line += " ";
      const int len = 1 + int(rng() % 5);
      for (int c = 0; c < len; ++c) line += char('a' + rng() % 3);
    }
    lines.push_back(line);
  }
  for (const std::size_t budget : {0u, 1u, 7u, 100u}) {
    CHECK(bpe_learn(corpus_from(lines), budget).merges.size() <= budget);
  }
}

TEST_CASE("bpe_apply copies features onto every piece") {
  const BpeModel model = model_for_pieces({{"cardio", "logist"}});
  const Sentence input = parse_token_line("cardiologist|MED", "|");
  const Sentence split = bpe_apply(input, model);
  CHECK(render_token_line(split, "|") == "cardio@@|MED logist|MED");

  // A word the model rebuilds in full stays one piece.
  const BpeModel whole = model_for_pieces({{"aa"}});
  CHECK(render_token_line(bpe_apply(parse_token_line("aa"), whole)) == "aa");

  CHECK(bpe_apply(Sentence{}, model).empty());
}

TEST_CASE("bpe_apply prefix marker mode") {
  BpeModel model = model_for_pieces({{"cardio", "logist"}});
  model.marker_mode = MarkerMode::prefix;
  const Sentence split = bpe_apply(parse_token_line("cardiologist|MED", "|"), model);
  CHECK(render_token_line(split, "|") == "cardio|MED @@logist|MED");
}

TEST_CASE("bpe_undo joins marked pieces") {
  CHECK(render_token_line(bpe_undo(parse_token_line("cardio@@ logist"))) == "cardiologist");
  CHECK(render_token_line(bpe_undo(parse_token_line("a b"))) == "a b");
  CHECK(render_token_line(bpe_undo(parse_token_line("x@@ y@@ z"))) == "xyz");

  std::size_t dangling = 0;
  CHECK(render_token_line(bpe_undo(parse_token_line("a x@@"), {}, &dangling)) == "a x");
  CHECK(dangling == 1);

  UndoOptions prefix{"@@", MarkerMode::prefix};
  CHECK(render_token_line(bpe_undo(parse_token_line("cardio @@logist"), prefix)) ==
        "cardiologist");
  dangling = 0;
  CHECK(render_token_line(bpe_undo(parse_token_line("@@x y"), prefix, &dangling)) == "x y");
  CHECK(dangling == 1);
}

TEST_CASE("bpe_undo keeps the features of the first piece") {
  const Sentence joined = bpe_undo(parse_token_line("car@@|A|1 dio|B|2", "|"));
  REQUIRE(joined.size() == 1);
  CHECK(joined.tokens[0].surface == "cardio");
  CHECK(joined.tokens[0].features == std::vector<std::string>{"A", "1"});
}

TEST_CASE("bpe round trip on random corpora") {
  std::mt19937_64 rng(97);
  const auto random_corpus = [&](int lines) {
    std::vector<Sentence> corpus;
    for (int i = 0; i < lines; ++i) {
      Sentence s;
      const std::size_t len = rng() % 8;
      for (std::size_t w = 0; w < len; ++w) {
        std::string word;
        const int wl = 1 + int(rng() % 6);
        for (int c = 0; c < wl; ++c) word += char('a' + rng() % 4);
        s.tokens.push_back({word, {"F" + std::to_string(rng() % 2)}});
      }
      corpus.push_back(std::move(s));
    }
    return corpus;
  };

  for (const MarkerMode mode : {MarkerMode::suffix, MarkerMode::prefix}) {
    const auto train = random_corpus(50);
    BpeModel model = bpe_learn(train, 20);
    model.marker_mode = mode;
    const UndoOptions undo_options{model.marker, mode};
    for (int iter = 0; iter < 200; ++iter) {
      const auto sentences = random_corpus(1);
      const Sentence& original = sentences[0];
      const Sentence applied = bpe_apply(original, model);
      std::size_t dangling = 0;
      const Sentence restored = bpe_undo(applied, undo_options, &dangling);
      CHECK(dangling == 0);
      CHECK(restored.surfaces() == original.surfaces());

      // Concatenation of surfaces is preserved modulo markers.
      std::string applied_concat;
      for (const auto& token : applied.tokens) {
        std::string piece = token.surface;
        if (mode == MarkerMode::suffix && piece.size() >= 2 &&
            piece.compare(piece.size() - 2, 2, "@@") == 0) {
          piece.resize(piece.size() - 2);
        }
        if (mode == MarkerMode::prefix && piece.compare(0, 2, "@@") == 0) {
          piece = piece.substr(2);
        }
        applied_concat += piece;
        // Arity is inherited from the source word.
        CHECK(token.features.size() == 1);
      }
      std::string original_concat;
      for (const auto& token : original.tokens) original_concat += token.surface;
      CHECK(applied_concat == original_concat);
    }
  }
}

TEST_CASE("bpe model file round trip") {
  BpeModel model = bpe_learn(corpus_from({"aa aa ab", "abc abc"}), 5);
  model.marker = "##";
  model.marker_mode = MarkerMode::prefix;
  const BpeModel reloaded = BpeModel::deserialize(model.serialize());
  CHECK(reloaded.merges == model.merges);
  CHECK(reloaded.marker == model.marker);
  CHECK(reloaded.marker_mode == model.marker_mode);

  CHECK_THROWS_AS(BpeModel::deserialize("nonsense header\n"), Error);
  CHECK_THROWS_AS(BpeModel::deserialize("bpe v1 suffix @@\nonly-one-field\n"), Error);
}
