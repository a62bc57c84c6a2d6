#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "mtkit/error.hpp"
#include "mtkit/pipeline.hpp"
#include "mtkit/text.hpp"

using namespace mtkit;

namespace {

Sentence sent(const std::string& text) { return parse_token_line(text); }

ParallelPair pair_of(std::size_t id, const std::string& src, const std::string& tgt) {
  return {id, sent(src), sent(tgt)};
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::string templ = (std::filesystem::temp_directory_path() / "mtkit-test-XXXXXX").string();
    path = mkdtemp(templ.data());
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("select_focused by surface forms with exclusion") {
  FocusPredicate predicate;
  predicate.surface_forms = {"tienen", "tiene"};

  const std::vector<ParallelPair> corpus = {
      pair_of(0, "ellos tienen hambre", "they are hungry"),
      pair_of(1, "no hay nada", "there is nothing"),
      pair_of(2, "ella tiene fr\xC3\xADo", "she is cold"),
      pair_of(3, "ellos tienen hambre", "duplicate line"),
  };

  const ExclusionSet empty_exclusion;
  const auto selected = select_focused(corpus, predicate, nullptr, empty_exclusion);
  REQUIRE(selected.size() == 2);  // the duplicate collapses
  CHECK(selected[0].id == 0);
  CHECK(selected[1].id == 2);

  // A line present in the training data is excluded, case-insensitively.
  const ExclusionSet exclusion = build_exclusion_set({"Ellos   TIENEN hambre"});
  const auto filtered = select_focused(corpus, predicate, nullptr, exclusion);
  REQUIRE(filtered.size() == 1);
  CHECK(filtered[0].id == 2);

  // Exhaustive check: nothing selected hashes into the exclusion set.
  for (const auto& pair : filtered) {
    const std::string line = render_token_line(pair.source);
    CHECK(exclusion.count(canonical_line_hash(line)) == 0);
  }
}

TEST_CASE("select_focused by span presence") {
  FocusPredicate predicate;
  predicate.kind = FocusPredicate::Kind::span_presence;

  const std::vector<ParallelPair> corpus = {
      pair_of(0, "a b", "x y"),
      pair_of(1, "c d", "z w"),
  };
  const std::vector<std::vector<EntitySpan>> spans = {{{0, 1, "NE"}}, {}};
  const auto selected = select_focused(corpus, predicate, &spans, {});
  REQUIRE(selected.size() == 1);
  CHECK(selected[0].id == 0);

  CHECK_THROWS_AS(select_focused(corpus, predicate, nullptr, {}), Error);
  FocusPredicate bad;
  bad.surface_forms = {};
  CHECK_THROWS_AS(select_focused(corpus, bad, nullptr, {}), Error);
}

TEST_CASE("take_random is seeded and order preserving") {
  std::vector<ParallelPair> corpus;
  for (std::size_t i = 0; i < 30; ++i) {
    corpus.push_back(pair_of(i, "w" + std::to_string(i), "t" + std::to_string(i)));
  }
  const auto a = take_random(corpus, 10, 99);
  const auto b = take_random(corpus, 10, 99);
  CHECK(a == b);
  CHECK(a.size() == 10);
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1].id < a[i].id);
  CHECK(take_random(corpus, 100, 1) == corpus);
}

TEST_CASE("cap_vocabulary") {
  const std::vector<Sentence> corpus = {sent("a a b")};
  const auto capped = cap_vocabulary(corpus, 1);
  CHECK(render_token_line(capped[0]) == "a a <unk>");

  // Ties keep the lexicographically smaller surface.
  const auto tied = cap_vocabulary({sent("b a")}, 1);
  CHECK(render_token_line(tied[0]) == "<unk> a");

  const auto untouched = cap_vocabulary({sent("a b c")}, 10);
  CHECK(render_token_line(untouched[0]) == "a b c");

  // Features survive the rewrite.
  const auto kept = cap_vocabulary({parse_token_line("a|X b|Y", "|")}, 1);
  CHECK(render_token_line(kept[0], "|") == "a|X <unk>|Y");

  CHECK_THROWS_AS(cap_vocabulary(corpus, 0), Error);
}

TEST_CASE("cap_vocabulary is idempotent") {
  const std::vector<Sentence> corpus = {sent("a a b c c c"), sent("d a")};
  std::vector<std::pair<std::string, std::uint64_t>> vocab;
  const auto once = cap_vocabulary(corpus, 2, "<unk>", &vocab);
  const auto twice = cap_vocabulary(once, 2);
  CHECK(once == twice);
  REQUIRE(vocab.size() == 2);
  // a and c both occur three times; the tie is lexicographic.
  CHECK(vocab[0].first == "a");
  CHECK(vocab[1].first == "c");
}

TEST_CASE("backtranslate_round with a copying translator") {
  TempDir dir;
  const std::vector<Sentence> mono = {sent("a b"), sent("c")};
  const auto pairs = backtranslate_round(mono, {"cp {in} {out}", 0.0}, dir.str());
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].source == mono[0]);
  CHECK(pairs[0].target == mono[0]);
  CHECK(pairs[1].id == 1);
}

TEST_CASE("backtranslate_round with a token-reversing translator") {
  TempDir dir;
  const std::string reverser =
      "awk '{for(i=NF;i>0;i--) printf \"%s%s\", $i, (i>1?\" \":\"\"); print \"\"}' {in} > {out}";
  const auto pairs = backtranslate_round({sent("a b")}, {reverser, 0.0}, dir.str());
  REQUIRE(pairs.size() == 1);
  CHECK(render_token_line(pairs[0].source) == "b a");
  CHECK(render_token_line(pairs[0].target) == "a b");
}

TEST_CASE("backtranslate_round detects a line-count violation") {
  TempDir dir;
  const std::vector<Sentence> mono = {sent("a"), sent("b"), sent("c")};
  try {
    backtranslate_round(mono, {"head -n 1 {in} > {out}", 0.0}, dir.str());
    FAIL("expected TranslatorLineMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::translator_line_mismatch);
  }
}

TEST_CASE("backtranslate_round enforces the timeout") {
  TempDir dir;
  try {
    backtranslate_round({sent("a")}, {"sleep 5; cp {in} {out}", 0.2}, dir.str());
    FAIL("expected TranslatorTimeout");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::translator_timeout);
  }
}

TEST_CASE("backtranslate_round surfaces translator failure") {
  TempDir dir;
  try {
    backtranslate_round({sent("a")}, {"exit 3", 0.0}, dir.str());
    FAIL("expected IoFailure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io_failure);
    CHECK(is_contract_error(e.code()));
  }
}
