#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mtkit/annotate.hpp"
#include "mtkit/corpus.hpp"
#include "mtkit/entity.hpp"
#include "mtkit/error.hpp"
#include "mtkit/lexicon.hpp"
#include "mtkit/metrics.hpp"
#include "mtkit/pipeline.hpp"
#include "mtkit/subword.hpp"
#include "mtkit/text.hpp"

namespace {

using namespace mtkit;

struct EmitConfigRequested {};

struct Context {
  CLI::App* app = nullptr;
  std::string separator = std::string(kDefaultSeparator);
  bool emit_config = false;

  void start() const {
    if (emit_config) {
      std::cout << app->config_to_str(true, false);
      throw EmitConfigRequested{};
    }
    validate_separator(separator);
  }
};

std::vector<std::string> read_input(const std::string& path) {
  if (path == "-") return read_lines(std::cin);
  return read_lines_file(path);
}

void write_output(const std::string& path, const std::vector<std::string>& lines) {
  if (path == "-") {
    for (const auto& line : lines) std::cout << line << '\n';
    return;
  }
  write_lines_file(path, lines);
}

void check_line_parallel(std::size_t a, std::size_t b, const std::string& what) {
  if (a != b) {
    raise(Errc::line_count_mismatch,
          what + ": " + std::to_string(a) + " vs " + std::to_string(b) + " lines");
  }
}

std::vector<std::vector<std::string>> read_tag_lines(const std::string& path) {
  std::vector<std::vector<std::string>> tags;
  for (const auto& line : read_input(path)) {
    std::vector<std::string> row;
    for (auto piece : split_ws(line)) row.emplace_back(piece);
    tags.push_back(std::move(row));
  }
  return tags;
}

std::vector<std::vector<EntitySpan>> read_span_lines(const std::string& path) {
  std::vector<std::vector<EntitySpan>> spans;
  for (const auto& line : read_input(path)) spans.push_back(parse_span_line(line));
  return spans;
}

MarkerMode marker_mode_from(const std::string& name) {
  if (name == "suffix") return MarkerMode::suffix;
  if (name == "prefix") return MarkerMode::prefix;
  raise(Errc::bad_config, "marker mode must be suffix or prefix, got '" + name + "'");
}

std::set<std::string> csv_set(const std::string& csv) {
  std::set<std::string> out;
  for (auto piece : split_on(csv, ",")) {
    if (!piece.empty()) out.emplace(piece);
  }
  return out;
}

std::string format_double(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

// ---------------------------------------------------------------------------
// subcommand registration

void add_annotate(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("annotate", "Attach CAT/CL ambiguity features from a lexicon");
  auto lexicon = std::make_shared<std::string>();
  auto input = std::make_shared<std::string>("-");
  auto output = std::make_shared<std::string>("-");
  sub->add_option("--lexicon", *lexicon, "Monolingual lexicon file")->required();
  sub->add_option("input", *input, "Token file (default stdin)");
  sub->add_option("-o,--output", *output, "Output file (default stdout)");
  sub->callback([&ctx, lexicon, input, output] {
    ctx.start();
    const auto index = AmbiguityIndex::build(parse_lexicon_file(*lexicon));
    std::vector<std::string> out;
    for (const auto& line : read_input(*input)) {
      const Sentence sentence = parse_token_line(line, ctx.separator);
      out.push_back(render_token_line(annotate_catcl(sentence, index), ctx.separator));
    }
    write_output(*output, out);
  });
}

void add_disambiguate(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("disambiguate",
                                "CAT/CL features filtered by external POS tags");
  auto lexicon = std::make_shared<std::string>();
  auto tags = std::make_shared<std::string>();
  auto tag_map = std::make_shared<std::string>();
  auto input = std::make_shared<std::string>("-");
  auto output = std::make_shared<std::string>("-");
  sub->add_option("--lexicon", *lexicon, "Monolingual lexicon file")->required();
  sub->add_option("--tags", *tags, "Line-parallel tag file")->required();
  sub->add_option("--tag-map", *tag_map, "External tag to category TSV (default: Penn)");
  sub->add_option("input", *input, "Token file (default stdin)");
  sub->add_option("-o,--output", *output, "Output file (default stdout)");
  sub->callback([&ctx, lexicon, tags, tag_map, input, output] {
    ctx.start();
    const auto index = AmbiguityIndex::build(parse_lexicon_file(*lexicon));
    const PosTagMap map =
        tag_map->empty() ? default_penn_map() : parse_pos_tag_map_file(*tag_map);
    const auto lines = read_input(*input);
    const auto tag_rows = read_tag_lines(*tags);
    check_line_parallel(lines.size(), tag_rows.size(), "corpus vs tags");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const Sentence sentence = parse_token_line(lines[i], ctx.separator);
      out.push_back(
          render_token_line(disambiguate_catcl(sentence, tag_rows[i], map, index), ctx.separator));
    }
    write_output(*output, out);
  });
}

void add_pos_annotate(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("pos-annotate", "Attach external POS tags as features");
  auto tags = std::make_shared<std::string>();
  auto input = std::make_shared<std::string>("-");
  auto output = std::make_shared<std::string>("-");
  sub->add_option("--tags", *tags, "Line-parallel tag file")->required();
  sub->add_option("input", *input, "Token file (default stdin)");
  sub->add_option("-o,--output", *output, "Output file (default stdout)");
  sub->callback([&ctx, tags, input, output] {
    ctx.start();
    const auto lines = read_input(*input);
    const auto tag_rows = read_tag_lines(*tags);
    check_line_parallel(lines.size(), tag_rows.size(), "corpus vs tags");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const Sentence sentence = parse_token_line(lines[i], ctx.separator);
      out.push_back(render_token_line(annotate_pos(sentence, tag_rows[i]), ctx.separator));
    }
    write_output(*output, out);
  });
}

void add_linearize(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("linearize",
                                "Flatten bracketed parse trees with phrase features");
  auto labels = std::make_shared<std::string>("CLS,NP,PP,AP,ADVP");
  auto feature = std::make_shared<std::string>("BR");
  auto keep_sentinels = std::make_shared<bool>(false);
  auto input = std::make_shared<std::string>("-");
  auto output = std::make_shared<std::string>("-");
  sub->add_option("--bracket-labels", *labels, "Comma-separated constituent whitelist");
  sub->add_option("--bracket-feature", *feature, "Feature carried by bracket tokens");
  sub->add_flag("--keep-sentinels", *keep_sentinels, "Keep '$' sentinel subtrees");
  sub->add_option("input", *input, "Tree file, one tree per line (default stdin)");
  sub->add_option("-o,--output", *output, "Output file (default stdout)");
  sub->callback([&ctx, labels, feature, keep_sentinels, input, output] {
    ctx.start();
    LinearizeOptions options;
    options.bracketed_labels = csv_set(*labels);
    options.bracket_feature = *feature;
    std::vector<std::string> out;
    for (const auto& line : read_input(*input)) {
      if (split_ws(line).empty()) {
        out.emplace_back();
        continue;
      }
      ParseTree tree = parse_bracketed_tree(line);
      if (!*keep_sentinels) tree = strip_sentinels(tree);
      out.push_back(render_token_line(linearize_tree(tree, options), ctx.separator));
    }
    write_output(*output, out);
  });
}

void add_bpe_learn(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("bpe-learn", "Learn byte pair encoding merges");
  auto model_out = std::make_shared<std::string>();
  auto max_merges = std::make_shared<std::size_t>(32000);
  auto min_frequency = std::make_shared<std::size_t>(2);
  auto marker = std::make_shared<std::string>("@@");
  auto marker_mode = std::make_shared<std::string>("suffix");
  auto input = std::make_shared<std::string>("-");
  sub->add_option("--model-out", *model_out, "Model file to write")->required();
  sub->add_option("--max-merges", *max_merges, "Merge budget (default 32000)");
  sub->add_option("--min-frequency", *min_frequency, "Minimum pair frequency (default 2)");
  sub->add_option("--marker", *marker, "Join marker (default @@)");
  sub->add_option("--marker-mode", *marker_mode, "suffix or prefix (default suffix)");
  sub->add_option("input", *input, "Training corpus (default stdin)");
  sub->callback([&ctx, model_out, max_merges, min_frequency, marker, marker_mode, input] {
    ctx.start();
    const auto corpus = parse_corpus(read_input(*input), ctx.separator);
    BpeModel model = bpe_learn(corpus, *max_merges, *min_frequency);
    model.marker = *marker;
    model.marker_mode = marker_mode_from(*marker_mode);
    model.save_file(*model_out);
  });
}

void add_bpe_apply(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("bpe-apply", "Segment a corpus with a learned BPE model");
  auto model_path = std::make_shared<std::string>();
  auto input = std::make_shared<std::string>("-");
  auto output = std::make_shared<std::string>("-");
  sub->add_option("--model", *model_path, "Model file")->required();
  sub->add_option("input", *input, "Token file (default stdin)");
  sub->add_option("-o,--output", *output, "Output file (default stdout)");
  sub->callback([&ctx, model_path, input, output] {
    ctx.start();
    const BpeModel model = BpeModel::load_file(*model_path);
    std::vector<std::string> out;
    for (const auto& line : read_input(*input)) {
      out.push_back(
          render_token_line(bpe_apply(parse_token_line(line, ctx.separator), model), ctx.separator));
    }
    write_output(*output, out);
  });
}

void add_bpe_undo(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("bpe-undo", "Join BPE pieces back into words");
  auto marker = std::make_shared<std::string>("@@");
  auto marker_mode = std::make_shared<std::string>("suffix");
  auto input = std::make_shared<std::string>("-");
  auto output = std::make_shared<std::string>("-");
  sub->add_option("--marker", *marker, "Join marker (default @@)");
  sub->add_option("--marker-mode", *marker_mode, "suffix or prefix (default suffix)");
  sub->add_option("input", *input, "Token file (default stdin)");
  sub->add_option("-o,--output", *output, "Output file (default stdout)");
  sub->callback([&ctx, marker, marker_mode, input, output] {
    ctx.start();
    const UndoOptions options{*marker, marker_mode_from(*marker_mode)};
    std::size_t dangling = 0;
    std::vector<std::string> out;
    for (const auto& line : read_input(*input)) {
      out.push_back(render_token_line(
          bpe_undo(parse_token_line(line, ctx.separator), options, &dangling), ctx.separator));
    }
    if (dangling > 0) {
      std::cerr << "bpe-undo: joined " << dangling << " dangling marker(s)\n";
    }
    write_output(*output, out);
  });
}

struct TagFlags {
  std::string mode = "feature";
  std::string tagset = "class";
  std::string default_label = "GEN";
  std::string binary_label = "NE";

  TagOptions resolve() const {
    TagOptions options;
    if (mode == "feature") {
      options.mode = TagMode::feature;
    } else if (mode == "replace") {
      options.mode = TagMode::replace;
    } else {
      raise(Errc::bad_config, "mode must be feature or replace, got '" + mode + "'");
    }
    if (tagset == "class") {
      options.tagset = TagSet::class_labels;
    } else if (tagset == "binary") {
      options.tagset = TagSet::binary;
    } else {
      raise(Errc::bad_config, "tagset must be class or binary, got '" + tagset + "'");
    }
    options.default_label = default_label;
    options.binary_label = binary_label;
    return options;
  }
};

void add_tag_flags(CLI::App* sub, const std::shared_ptr<TagFlags>& flags) {
  sub->add_option("--mode", flags->mode, "feature or replace (default feature)");
  sub->add_option("--tagset", flags->tagset, "class or binary (default class)");
  sub->add_option("--default-label", flags->default_label,
                  "Feature for out-of-span tokens (default GEN)");
  sub->add_option("--binary-label", flags->binary_label, "Tag used by the binary set");
}

void add_entity_tag(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("entity-tag", "Tag or replace entity/term spans");
  auto spans = std::make_shared<std::string>();
  auto dict = std::make_shared<std::string>();
  auto flags = std::make_shared<TagFlags>();
  auto sidecar_out = std::make_shared<std::string>();
  auto input = std::make_shared<std::string>("-");
  auto output = std::make_shared<std::string>("-");
  sub->add_option("--spans", *spans, "Line-parallel span file");
  sub->add_option("--dict", *dict,
                  "Term dictionary TSV; spans come from a longest-match scan");
  add_tag_flags(sub, flags);
  sub->add_option("--sidecar-out", *sidecar_out, "Sidecar file for replace mode");
  sub->add_option("input", *input, "Token file (default stdin)");
  sub->add_option("-o,--output", *output, "Output file (default stdout)");
  sub->callback([&ctx, spans, dict, flags, sidecar_out, input, output] {
    ctx.start();
    if (spans->empty() == dict->empty()) {
      raise(Errc::bad_config, "give exactly one of --spans or --dict");
    }
    const TagOptions options = flags->resolve();
    const auto lines = read_input(*input);
    std::vector<std::vector<EntitySpan>> span_rows;
    if (!spans->empty()) {
      span_rows = read_span_lines(*spans);
      check_line_parallel(lines.size(), span_rows.size(), "corpus vs spans");
    } else {
      const TermDictionary dictionary = TermDictionary::parse_file(*dict);
      for (const auto& line : lines) {
        span_rows.push_back(find_term_spans(parse_token_line(line, ctx.separator), dictionary));
      }
    }
    std::vector<std::string> out;
    std::vector<std::string> sidecars;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto tagged =
          tag_entities(parse_token_line(lines[i], ctx.separator), span_rows[i], options);
      out.push_back(render_token_line(tagged.sentence, ctx.separator));
      sidecars.push_back(render_sidecar_line(tagged.sidecar));
    }
    write_output(*output, out);
    if (!sidecar_out->empty()) write_lines_file(*sidecar_out, sidecars);
  });
}

struct PairedIo {
  std::string source;
  std::string target;
  std::string spans;
  std::string alignments;
  std::string out_source;
  std::string out_target;
};

void add_paired_options(CLI::App* sub, const std::shared_ptr<PairedIo>& io) {
  sub->add_option("--source", io->source, "Source token file")->required();
  sub->add_option("--target", io->target, "Target token file")->required();
  sub->add_option("--spans", io->spans, "Line-parallel source span file")->required();
  sub->add_option("--alignments", io->alignments,
                  "Pharaoh alignment file (required in replace mode)");
  sub->add_option("--out-source", io->out_source, "Processed source output")->required();
  sub->add_option("--out-target", io->out_target, "Processed target output")->required();
}

std::vector<ParallelPair> load_pairs(const PairedIo& io, const Context& ctx,
                                     std::vector<std::vector<EntitySpan>>& spans,
                                     std::vector<AlignmentSet>& alignments, bool need_alignments) {
  const auto src_lines = read_input(io.source);
  const auto tgt_lines = read_input(io.target);
  check_line_parallel(src_lines.size(), tgt_lines.size(), "source vs target");
  spans = read_span_lines(io.spans);
  check_line_parallel(src_lines.size(), spans.size(), "corpus vs spans");
  if (!io.alignments.empty()) {
    alignments = parse_alignment_corpus(read_input(io.alignments));
    check_line_parallel(src_lines.size(), alignments.size(), "corpus vs alignments");
  } else if (need_alignments) {
    raise(Errc::bad_config, "--alignments is required in replace mode");
  }
  std::vector<ParallelPair> pairs;
  pairs.reserve(src_lines.size());
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    pairs.push_back({i, parse_token_line(src_lines[i], ctx.separator),
                     parse_token_line(tgt_lines[i], ctx.separator)});
  }
  return pairs;
}

void write_pairs(const std::vector<ParallelPair>& pairs, const PairedIo& io,
                 const Context& ctx) {
  std::vector<std::string> src_out, tgt_out;
  src_out.reserve(pairs.size());
  tgt_out.reserve(pairs.size());
  for (const auto& pair : pairs) {
    src_out.push_back(render_token_line(pair.source, ctx.separator));
    tgt_out.push_back(render_token_line(pair.target, ctx.separator));
  }
  write_output(io.out_source, src_out);
  write_output(io.out_target, tgt_out);
}

void add_prepare_pairs(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("prepare-pairs",
                                "Apply span tagging to a parallel corpus for training");
  auto io = std::make_shared<PairedIo>();
  auto flags = std::make_shared<TagFlags>();
  add_paired_options(sub, io);
  add_tag_flags(sub, flags);
  sub->callback([&ctx, io, flags] {
    ctx.start();
    const TagOptions options = flags->resolve();
    std::vector<std::vector<EntitySpan>> spans;
    std::vector<AlignmentSet> alignments;
    const auto pairs =
        load_pairs(*io, ctx, spans, alignments, options.mode == TagMode::replace);
    std::vector<ParallelPair> processed;
    processed.reserve(pairs.size());
    static const AlignmentSet kNoLinks;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const AlignmentSet& links = alignments.empty() ? kNoLinks : alignments[i];
      processed.push_back(prepare_training_pair(pairs[i], spans[i], links, options));
    }
    write_pairs(processed, *io, ctx);
  });
}

void add_duplicate(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand(
      "duplicate", "Process a corpus and re-emit span-bearing pairs untouched");
  auto io = std::make_shared<PairedIo>();
  auto flags = std::make_shared<TagFlags>();
  add_paired_options(sub, io);
  add_tag_flags(sub, flags);
  sub->callback([&ctx, io, flags] {
    ctx.start();
    const TagOptions options = flags->resolve();
    std::vector<std::vector<EntitySpan>> spans;
    std::vector<AlignmentSet> alignments;
    const auto pairs =
        load_pairs(*io, ctx, spans, alignments, options.mode == TagMode::replace);
    const auto augmented =
        duplicate_augment(pairs, spans, alignments.empty() ? nullptr : &alignments, options);
    write_pairs(augmented, *io, ctx);
  });
}

void add_restore(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("restore",
                                "Replace hypothesis tag tokens with their translations");
  auto source = std::make_shared<std::string>();
  auto sidecar = std::make_shared<std::string>();
  auto attention = std::make_shared<std::string>();
  auto dict = std::make_shared<std::string>();
  auto labels = std::make_shared<std::string>();
  auto input = std::make_shared<std::string>("-");
  auto output = std::make_shared<std::string>("-");
  sub->add_option("--source", *source, "Processed source file")->required();
  sub->add_option("--sidecar", *sidecar, "Sidecar file from entity-tag")->required();
  sub->add_option("--attention", *attention, "Attention JSONL file")->required();
  sub->add_option("--dict", *dict, "Term dictionary TSV");
  sub->add_option("--labels", *labels, "Comma-separated tag labels")->required();
  sub->add_option("input", *input, "Hypothesis file (default stdin)");
  sub->add_option("-o,--output", *output, "Output file (default stdout)");
  sub->callback([&ctx, source, sidecar, attention, dict, labels, input, output] {
    ctx.start();
    const auto hyp_lines = read_input(*input);
    const auto src_lines = read_input(*source);
    const auto sidecar_lines = read_input(*sidecar);
    const auto attention_lines = read_input(*attention);
    check_line_parallel(hyp_lines.size(), src_lines.size(), "hypothesis vs source");
    check_line_parallel(hyp_lines.size(), sidecar_lines.size(), "hypothesis vs sidecar");
    check_line_parallel(hyp_lines.size(), attention_lines.size(), "hypothesis vs attention");
    const TermDictionary dictionary =
        dict->empty() ? TermDictionary{} : TermDictionary::parse_file(*dict);
    const std::set<std::string> tag_labels = csv_set(*labels);
    if (tag_labels.empty()) raise(Errc::bad_config, "--labels must name at least one tag");

    std::size_t extra_deleted = 0;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < hyp_lines.size(); ++i) {
      const Sentence hyp = parse_token_line(hyp_lines[i], ctx.separator);
      const Sentence src = parse_token_line(src_lines[i], ctx.separator);
      const ReplacementSidecar records = parse_sidecar_line(sidecar_lines[i]);
      const AttentionMatrix matrix = AttentionMatrix::from_json_line(attention_lines[i]);
      out.push_back(render_token_line(
          restore_tags(hyp, src, records, matrix, dictionary, tag_labels, &extra_deleted),
          ctx.separator));
    }
    if (extra_deleted > 0) {
      std::cerr << "restore: deleted " << extra_deleted << " surplus hypothesis tag(s)\n";
    }
    write_output(*output, out);
  });
}

void add_phrase_table(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("phrase-table",
                                "Build a one-token phrase table from alignments");
  auto source = std::make_shared<std::string>();
  auto target = std::make_shared<std::string>();
  auto alignments = std::make_shared<std::string>();
  auto output = std::make_shared<std::string>("-");
  sub->add_option("--source", *source, "Source token file")->required();
  sub->add_option("--target", *target, "Target token file")->required();
  sub->add_option("--alignments", *alignments, "Pharaoh alignment file")->required();
  sub->add_option("-o,--output", *output, "Output TSV (default stdout)");
  sub->callback([&ctx, source, target, alignments, output] {
    ctx.start();
    const auto src_lines = read_input(*source);
    const auto tgt_lines = read_input(*target);
    check_line_parallel(src_lines.size(), tgt_lines.size(), "source vs target");
    const auto links = parse_alignment_corpus(read_input(*alignments));
    check_line_parallel(src_lines.size(), links.size(), "corpus vs alignments");
    std::vector<ParallelPair> pairs;
    for (std::size_t i = 0; i < src_lines.size(); ++i) {
      pairs.push_back({i, parse_token_line(src_lines[i], ctx.separator),
                       parse_token_line(tgt_lines[i], ctx.separator)});
    }
    const PhraseTable table = build_phrase_table(pairs, links);
    const std::string serialized = table.serialize();
    std::vector<std::string> lines;
    for (auto piece : split_on(serialized, "\n")) {
      if (!piece.empty()) lines.emplace_back(piece);
    }
    write_output(*output, lines);
  });
}

void add_unk_replace(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("unk-replace",
                                "Replace unknown tokens via attention and a phrase table");
  auto source = std::make_shared<std::string>();
  auto attention = std::make_shared<std::string>();
  auto table_path = std::make_shared<std::string>();
  auto unk = std::make_shared<std::string>("<unk>");
  auto input = std::make_shared<std::string>("-");
  auto output = std::make_shared<std::string>("-");
  sub->add_option("--source", *source, "Source token file")->required();
  sub->add_option("--attention", *attention, "Attention JSONL file")->required();
  sub->add_option("--table", *table_path, "Phrase table TSV")->required();
  sub->add_option("--unk-token", *unk, "Unknown token (default <unk>)");
  sub->add_option("input", *input, "Hypothesis file (default stdin)");
  sub->add_option("-o,--output", *output, "Output file (default stdout)");
  sub->callback([&ctx, source, attention, table_path, unk, input, output] {
    ctx.start();
    const auto hyp_lines = read_input(*input);
    const auto src_lines = read_input(*source);
    const auto attention_lines = read_input(*attention);
    check_line_parallel(hyp_lines.size(), src_lines.size(), "hypothesis vs source");
    check_line_parallel(hyp_lines.size(), attention_lines.size(), "hypothesis vs attention");
    const PhraseTable table = PhraseTable::parse_file(*table_path);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < hyp_lines.size(); ++i) {
      const Sentence hyp = parse_token_line(hyp_lines[i], ctx.separator);
      const Sentence src = parse_token_line(src_lines[i], ctx.separator);
      const AttentionMatrix matrix = AttentionMatrix::from_json_line(attention_lines[i]);
      out.push_back(
          render_token_line(replace_unknowns(hyp, src, matrix, table, *unk), ctx.separator));
    }
    write_output(*output, out);
  });
}

void add_cap_vocab(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("cap-vocab", "Rewrite out-of-vocabulary surfaces to <unk>");
  auto max_size = std::make_shared<std::size_t>(50000);
  auto unk = std::make_shared<std::string>("<unk>");
  auto vocab_out = std::make_shared<std::string>();
  auto input = std::make_shared<std::string>("-");
  auto output = std::make_shared<std::string>("-");
  sub->add_option("--max-size", *max_size, "Vocabulary size cap (default 50000)");
  sub->add_option("--unk-token", *unk, "Unknown token (default <unk>)");
  sub->add_option("--vocab-out", *vocab_out, "Vocabulary file (surface TAB count)");
  sub->add_option("input", *input, "Token file (default stdin)");
  sub->add_option("-o,--output", *output, "Output file (default stdout)");
  sub->callback([&ctx, max_size, unk, vocab_out, input, output] {
    ctx.start();
    const auto corpus = parse_corpus(read_input(*input), ctx.separator);
    std::vector<std::pair<std::string, std::uint64_t>> vocab;
    const auto capped = cap_vocabulary(corpus, *max_size, *unk, &vocab);
    write_output(*output, render_corpus(capped, ctx.separator));
    if (!vocab_out->empty()) {
      std::vector<std::string> lines;
      for (const auto& [surface, count] : vocab) {
        lines.push_back(surface + "\t" + std::to_string(count));
      }
      write_lines_file(*vocab_out, lines);
    }
  });
}

void add_select_testset(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("select-testset",
                                "Pick focused evaluation pairs disjoint from training data");
  auto source = std::make_shared<std::string>();
  auto target = std::make_shared<std::string>();
  auto surface_forms = std::make_shared<std::string>();
  auto spans = std::make_shared<std::string>();
  auto excludes = std::make_shared<std::vector<std::string>>();
  auto take = std::make_shared<std::size_t>(0);
  auto seed = std::make_shared<std::uint64_t>(1);
  auto out_source = std::make_shared<std::string>();
  auto out_target = std::make_shared<std::string>();
  sub->add_option("--source", *source, "Source token file")->required();
  sub->add_option("--target", *target, "Target token file")->required();
  sub->add_option("--surface-forms", *surface_forms, "File of surface forms, one per line");
  sub->add_option("--spans", *spans, "Line-parallel span file (span-presence predicate)");
  sub->add_option("--exclude", *excludes, "Corpus whose lines must not be selected");
  sub->add_option("--take-random", *take, "Seeded subsample size (default: all)");
  sub->add_option("--seed", *seed, "Subsample seed (default 1)");
  sub->add_option("--out-source", *out_source, "Selected source output")->required();
  sub->add_option("--out-target", *out_target, "Selected target output")->required();
  sub->callback([&ctx, source, target, surface_forms, spans, excludes, take, seed, out_source,
                 out_target] {
    ctx.start();
    if (surface_forms->empty() == spans->empty()) {
      raise(Errc::bad_config, "give exactly one of --surface-forms or --spans");
    }
    const auto src_lines = read_input(*source);
    const auto tgt_lines = read_input(*target);
    check_line_parallel(src_lines.size(), tgt_lines.size(), "source vs target");
    std::vector<ParallelPair> pairs;
    for (std::size_t i = 0; i < src_lines.size(); ++i) {
      pairs.push_back({i, parse_token_line(src_lines[i], ctx.separator),
                       parse_token_line(tgt_lines[i], ctx.separator)});
    }

    FocusPredicate predicate;
    std::vector<std::vector<EntitySpan>> span_rows;
    if (!surface_forms->empty()) {
      for (const auto& line : read_input(*surface_forms)) {
        for (auto piece : split_ws(line)) predicate.surface_forms.emplace(piece);
      }
    } else {
      predicate.kind = FocusPredicate::Kind::span_presence;
      span_rows = read_span_lines(*spans);
      check_line_parallel(src_lines.size(), span_rows.size(), "corpus vs spans");
    }

    ExclusionSet exclusion;
    for (const auto& path : *excludes) {
      const ExclusionSet part = build_exclusion_set(read_input(path), ctx.separator);
      exclusion.insert(part.begin(), part.end());
    }

    auto selected =
        select_focused(pairs, predicate, span_rows.empty() ? nullptr : &span_rows, exclusion);
    if (*take > 0) selected = take_random(selected, *take, *seed);

    std::vector<std::string> src_out, tgt_out;
    for (const auto& pair : selected) {
      src_out.push_back(render_token_line(pair.source, ctx.separator));
      tgt_out.push_back(render_token_line(pair.target, ctx.separator));
    }
    write_output(*out_source, src_out);
    write_output(*out_target, tgt_out);
  });
}

void add_stats(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("stats", "Corpus statistics");
  auto subword = std::make_shared<std::string>();
  auto machine = std::make_shared<bool>(false);
  auto input = std::make_shared<std::string>("-");
  auto output = std::make_shared<std::string>("-");
  sub->add_option("--subword", *subword, "Line-parallel subword rendering of the corpus");
  sub->add_flag("--machine", *machine, "Emit key=value lines");
  sub->add_option("input", *input, "Token file (default stdin)");
  sub->add_option("-o,--output", *output, "Output file (default stdout)");
  sub->callback([&ctx, subword, machine, input, output] {
    ctx.start();
    const auto corpus = parse_corpus(read_input(*input), ctx.separator);
    CorpusStats stats;
    if (!subword->empty()) {
      const auto sub_corpus = parse_corpus(read_input(*subword), ctx.separator);
      stats = corpus_stats(corpus, &sub_corpus);
    } else {
      stats = corpus_stats(corpus);
    }
    const std::string report = *machine ? format_stats_machine(stats) : format_stats_table(stats);
    std::vector<std::string> lines;
    for (auto piece : split_on(report, "\n")) {
      if (!piece.empty()) lines.emplace_back(piece);
    }
    write_output(*output, lines);
  });
}

void add_score(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("score", "BLEU, chrF and TER against a reference");
  auto reference = std::make_shared<std::string>();
  auto metric = std::make_shared<std::string>("all");
  auto smoothing = std::make_shared<std::string>("none");
  auto chrf_keep_ws = std::make_shared<bool>(false);
  auto json_out = std::make_shared<bool>(false);
  auto count_unk_flag = std::make_shared<bool>(false);
  auto unk = std::make_shared<std::string>("<unk>");
  auto input = std::make_shared<std::string>("-");
  auto output = std::make_shared<std::string>("-");
  sub->add_option("--reference", *reference, "Reference token file")->required();
  sub->add_option("--metric", *metric, "all, bleu, chrf or ter (default all)");
  sub->add_option("--smoothing", *smoothing, "BLEU smoothing: none or add1 (default none)");
  sub->add_flag("--chrf-keep-whitespace", *chrf_keep_ws,
                "Keep token boundaries in the chrF character stream");
  sub->add_flag("--json", *json_out, "Emit a JSON object instead of the table");
  sub->add_flag("--count-unks", *count_unk_flag, "Also report unknown-token counts");
  sub->add_option("--unk-token", *unk, "Unknown token (default <unk>)");
  sub->add_option("input", *input, "Hypothesis file (default stdin)");
  sub->add_option("-o,--output", *output, "Output file (default stdout)");
  sub->callback([&ctx, reference, metric, smoothing, chrf_keep_ws, json_out, count_unk_flag,
                 unk, input, output] {
    ctx.start();
    const auto hyps = parse_corpus(read_input(*input), ctx.separator);
    const auto refs = parse_corpus(read_input(*reference), ctx.separator);

    BleuOptions bleu_options;
    if (*smoothing == "add1") {
      bleu_options.smoothing = BleuSmoothing::add1;
    } else if (*smoothing != "none") {
      raise(Errc::bad_config, "smoothing must be none or add1, got '" + *smoothing + "'");
    }

    const bool all = *metric == "all";
    std::vector<std::pair<std::string, std::string>> rows;
    nlohmann::json json = nlohmann::json::object();
    if (all || *metric == "bleu") {
      const double value = bleu(hyps, refs, bleu_options);
      rows.emplace_back("bleu", format_double(value, 4));
      json["bleu"] = value;
    }
    if (all || *metric == "chrf") {
      ChrfOptions chrf_options;
      chrf_options.strip_whitespace = !*chrf_keep_ws;
      const double value = chrf(hyps, refs, chrf_options);
      rows.emplace_back("chrf", format_double(value, 4));
      json["chrf"] = value;
    }
    if (all || *metric == "ter") {
      const double value = ter(hyps, refs);
      rows.emplace_back("ter", format_double(value, 4));
      json["ter"] = value;
    }
    if (rows.empty()) raise(Errc::bad_config, "unknown metric '" + *metric + "'");
    if (*count_unk_flag) {
      const std::size_t unks = count_unks(hyps, *unk);
      rows.emplace_back("unks", std::to_string(unks));
      json["unks"] = unks;
    }

    std::vector<std::string> lines;
    if (*json_out) {
      lines.push_back(json.dump());
    } else {
      for (const auto& [name, value] : rows) lines.push_back(name + "\t" + value);
    }
    write_output(*output, lines);
  });
}

void add_significance(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("significance",
                                "Paired bootstrap resampling between two systems");
  auto system_a = std::make_shared<std::string>();
  auto system_b = std::make_shared<std::string>();
  auto reference = std::make_shared<std::string>();
  auto metric = std::make_shared<std::string>("bleu");
  auto sample_size = std::make_shared<std::size_t>(1000);
  auto iterations = std::make_shared<std::size_t>(1000);
  auto alpha = std::make_shared<double>(0.05);
  auto seed = std::make_shared<std::uint64_t>(1);
  auto json_out = std::make_shared<bool>(false);
  auto output = std::make_shared<std::string>("-");
  sub->add_option("--system-a", *system_a, "Hypotheses of system A")->required();
  sub->add_option("--system-b", *system_b, "Hypotheses of system B")->required();
  sub->add_option("--reference", *reference, "Reference token file")->required();
  sub->add_option("--metric", *metric, "bleu, chrf or ter (default bleu)");
  sub->add_option("--sample-size", *sample_size, "Bootstrap sample size (default 1000)");
  sub->add_option("--iterations", *iterations, "Bootstrap iterations (default 1000)");
  sub->add_option("--alpha", *alpha, "Significance level (default 0.05)");
  sub->add_option("--seed", *seed, "RNG seed (default 1)");
  sub->add_flag("--json", *json_out, "Emit a JSON object instead of the table");
  sub->add_option("-o,--output", *output, "Output file (default stdout)");
  sub->callback([&ctx, system_a, system_b, reference, metric, sample_size, iterations, alpha,
                 seed, json_out, output] {
    ctx.start();
    BootstrapOptions options;
    options.metric = metric_kind_from_name(*metric);
    options.sample_size = *sample_size;
    options.iterations = *iterations;
    options.alpha = *alpha;
    options.seed = *seed;
    const SignificanceReport report = bootstrap_significance(
        parse_corpus(read_input(*system_a), ctx.separator),
        parse_corpus(read_input(*system_b), ctx.separator),
        parse_corpus(read_input(*reference), ctx.separator), options);

    std::vector<std::string> lines;
    if (*json_out) {
      nlohmann::json json{{"metric", *metric},
                          {"win_fraction", report.win_fraction},
                          {"p_value", report.p_value},
                          {"significant", report.significant}};
      lines.push_back(json.dump());
    } else {
      lines.push_back("win_fraction\t" + format_double(report.win_fraction, 6));
      lines.push_back("p_value\t" + format_double(report.p_value, 6));
      lines.push_back(std::string("verdict\t") +
                      (report.significant ? "significant" : "not-significant"));
    }
    write_output(*output, lines);
  });
}

void add_backtranslate(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("backtranslate",
                                "Pair monolingual target text with black-box translations");
  auto command = std::make_shared<std::string>();
  auto timeout = std::make_shared<double>(0.0);
  auto work_dir = std::make_shared<std::string>();
  auto out_source = std::make_shared<std::string>();
  auto out_target = std::make_shared<std::string>();
  auto input = std::make_shared<std::string>("-");
  sub->add_option("--command", *command,
                  "Translator command template with {in} and {out} placeholders")
      ->required();
  sub->add_option("--timeout", *timeout, "Translator timeout in seconds (default: none)");
  sub->add_option("--work-dir", *work_dir, "Directory for translator files (default: temp)");
  sub->add_option("--out-source", *out_source, "Back-translated source output")->required();
  sub->add_option("--out-target", *out_target, "Original target output")->required();
  sub->add_option("input", *input, "Monolingual target file (default stdin)");
  sub->callback([&ctx, command, timeout, work_dir, out_source, out_target, input] {
    ctx.start();
    const auto mono = parse_corpus(read_input(*input), ctx.separator);

    std::string dir = *work_dir;
    std::string scratch;
    if (dir.empty()) {
      scratch = (std::filesystem::temp_directory_path() / "mtkit-bt-XXXXXX").string();
      if (mkdtemp(scratch.data()) == nullptr) {
        raise(Errc::io_failure, "cannot create a scratch directory");
      }
      dir = scratch;
    }
    std::vector<ParallelPair> pairs;
    try {
      pairs = backtranslate_round(mono, {*command, *timeout}, dir, ctx.separator);
    } catch (...) {
      if (!scratch.empty()) std::filesystem::remove_all(scratch);
      throw;
    }
    if (!scratch.empty()) std::filesystem::remove_all(scratch);

    std::vector<std::string> src_out, tgt_out;
    for (const auto& pair : pairs) {
      src_out.push_back(render_token_line(pair.source, ctx.separator));
      tgt_out.push_back(render_token_line(pair.target, ctx.separator));
    }
    write_output(*out_source, src_out);
    write_output(*out_target, tgt_out);
  });
}

void add_validate(CLI::App& app, Context& ctx) {
  auto sub = app.add_subcommand("validate",
                                "Check feature arity and reserved tag labels");
  auto spans = std::make_shared<std::string>();
  auto labels = std::make_shared<std::string>();
  auto input = std::make_shared<std::string>("-");
  sub->add_option("--spans", *spans, "Line-parallel span file");
  sub->add_option("--labels", *labels, "Comma-separated reserved tag labels");
  sub->add_option("input", *input, "Token file (default stdin)");
  sub->callback([&ctx, spans, labels, input] {
    ctx.start();
    const auto corpus = parse_corpus(read_input(*input), ctx.separator);
    check_uniform_arity(corpus);

    std::vector<std::vector<EntitySpan>> span_rows(corpus.size());
    if (!spans->empty()) {
      span_rows = read_span_lines(*spans);
      check_line_parallel(corpus.size(), span_rows.size(), "corpus vs spans");
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        validate_spans(span_rows[i], corpus[i].size());
      }
    }

    if (!labels->empty()) {
      const std::set<std::string> reserved = csv_set(*labels);
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (std::size_t t = 0; t < corpus[i].size(); ++t) {
          if (reserved.count(corpus[i].tokens[t].surface) == 0) continue;
          bool inside = false;
          for (const auto& span : span_rows[i]) {
            if (t >= span.start && t < span.end) inside = true;
          }
          if (!inside) {
            raise(Errc::reserved_tag_collision,
                  "line " + std::to_string(i) + ": tag label '" + corpus[i].tokens[t].surface +
                      "' occurs as a natural token");
          }
        }
      }
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corpus preprocessing, lexicon-knowledge injection and MT evaluation toolkit"};
  app.require_subcommand(1);

  Context ctx;
  ctx.app = &app;
  app.add_option("--separator", ctx.separator,
                 "Feature separator code point (default U+FFE8)");
  app.add_flag("--emit-config", ctx.emit_config,
               "Print the effective configuration and exit");
  app.set_config("--config", "", "Configuration file (key = value lines)");

  add_annotate(app, ctx);
  add_disambiguate(app, ctx);
  add_pos_annotate(app, ctx);
  add_linearize(app, ctx);
  add_bpe_learn(app, ctx);
  add_bpe_apply(app, ctx);
  add_bpe_undo(app, ctx);
  add_entity_tag(app, ctx);
  add_prepare_pairs(app, ctx);
  add_duplicate(app, ctx);
  add_restore(app, ctx);
  add_phrase_table(app, ctx);
  add_unk_replace(app, ctx);
  add_cap_vocab(app, ctx);
  add_select_testset(app, ctx);
  add_stats(app, ctx);
  add_score(app, ctx);
  add_significance(app, ctx);
  add_backtranslate(app, ctx);
  add_validate(app, ctx);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  } catch (const EmitConfigRequested&) {
    return 0;
  } catch (const Error& e) {
    std::cerr << "mtkit: " << e.what() << '\n';
    return is_contract_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "mtkit: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
