#include "mtkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "mtkit/error.hpp"
#include "mtkit/text.hpp"

namespace mtkit {

namespace {

void check_parallel(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    raise(Errc::line_count_mismatch, std::string(what) + ": " + std::to_string(a) + " vs " +
                                         std::to_string(b) + " lines");
  }
}

// N-grams keyed by joining tokens with an unlikely separator byte.
std::unordered_map<std::string, std::int64_t> ngram_counts(const std::vector<std::string>& tokens,
                                                           std::size_t n) {
  std::unordered_map<std::string, std::int64_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0) key.push_back('\x1f');
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

std::int64_t clipped_matches(const std::unordered_map<std::string, std::int64_t>& hyp,
                             const std::unordered_map<std::string, std::int64_t>& ref) {
  std::int64_t matches = 0;
  for (const auto& [key, count] : hyp) {
    const auto it = ref.find(key);
    if (it != ref.end()) matches += std::min(count, it->second);
  }
  return matches;
}

// BLEU sufficient statistics: per-n clipped matches and totals on both
// sides, then lengths. Orders with no n-grams on either side are skipped so
// identical pairs shorter than max_n still score 100.
struct BleuMetric final : CorpusMetric {
  explicit BleuMetric(const BleuOptions& options) : options_(options) {}

  std::size_t stat_size() const override {
    return 3 * static_cast<std::size_t>(options_.max_n) + 2;
  }

  void sentence_stats(const Sentence& hypothesis, const Sentence& reference,
                      std::int64_t* out) const override {
    const auto hyp = hypothesis.surfaces();
    const auto ref = reference.surfaces();
    const auto n_orders = static_cast<std::size_t>(options_.max_n);
    for (std::size_t n = 1; n <= n_orders; ++n) {
      const auto hyp_counts = ngram_counts(hyp, n);
      const auto ref_counts = ngram_counts(ref, n);
      out[n - 1] = clipped_matches(hyp_counts, ref_counts);
      out[n_orders + n - 1] =
          hyp.size() >= n ? static_cast<std::int64_t>(hyp.size() - n + 1) : 0;
      out[2 * n_orders + n - 1] =
          ref.size() >= n ? static_cast<std::int64_t>(ref.size() - n + 1) : 0;
    }
    out[3 * n_orders] = static_cast<std::int64_t>(hyp.size());
    out[3 * n_orders + 1] = static_cast<std::int64_t>(ref.size());
  }

  double finalize(const std::int64_t* acc) const override {
    const auto n_orders = static_cast<std::size_t>(options_.max_n);
    const double hyp_len = static_cast<double>(acc[3 * n_orders]);
    const double ref_len = static_cast<double>(acc[3 * n_orders + 1]);
    if (hyp_len == 0) return 0.0;
    double log_sum = 0.0;
    std::size_t used_orders = 0;
    for (std::size_t n = 1; n <= n_orders; ++n) {
      double matches = static_cast<double>(acc[n - 1]);
      double total = static_cast<double>(acc[n_orders + n - 1]);
      const double ref_total = static_cast<double>(acc[2 * n_orders + n - 1]);
      if (total == 0 && ref_total == 0) continue;
      ++used_orders;
      if (options_.smoothing == BleuSmoothing::add1 && n >= 2) {
        matches += 1.0;
        total += 1.0;
      }
      if (matches <= 0.0 || total <= 0.0) return 0.0;
      log_sum += std::log(matches / total);
    }
    if (used_orders == 0) return 0.0;
    const double brevity = hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
    return 100.0 * brevity * std::exp(log_sum / static_cast<double>(used_orders));
  }

  bool lower_is_better() const override { return false; }

  BleuOptions options_;
};

// ---------------------------------------------------------------------------
// TER

std::size_t levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

struct ShiftCandidate {
  std::vector<std::string> result;
  std::size_t distance = 0;
};

// Blocks are hypothesis subsequences that exactly match a reference
// subsequence; the block is reinserted so it starts at the matching
// reference position.
std::vector<std::string> apply_shift(const std::vector<std::string>& seq, std::size_t start,
                                     std::size_t length, std::size_t target) {
  std::vector<std::string> out;
  out.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i < start || i >= start + length) out.push_back(seq[i]);
  }
  const std::size_t insert_at = std::min(target, out.size());
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(insert_at), seq.begin() + static_cast<std::ptrdiff_t>(start),
             seq.begin() + static_cast<std::ptrdiff_t>(start + length));
  return out;
}

}  // namespace

double bleu(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& references,
            const BleuOptions& options) {
  check_parallel(hypotheses.size(), references.size(), "bleu");
  if (hypotheses.empty()) raise(Errc::empty_corpus, "bleu needs at least one sentence pair");
  BleuMetric metric(options);
  std::vector<std::int64_t> acc(metric.stat_size(), 0);
  std::vector<std::int64_t> stats(metric.stat_size(), 0);
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    metric.sentence_stats(hypotheses[i], references[i], stats.data());
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += stats[k];
  }
  return metric.finalize(acc.data());
}

double bleu_sentence(const Sentence& hypothesis, const Sentence& reference,
                     const BleuOptions& options) {
  return bleu({hypothesis}, {reference}, options);
}

TerResult ter_sentence(const Sentence& hypothesis, const Sentence& reference,
                       const TerOptions& options) {
  const auto ref = reference.surfaces();
  if (ref.empty()) raise(Errc::empty_reference, "TER reference must be non-empty");
  auto hyp = hypothesis.surfaces();

  std::size_t current = levenshtein(hyp, ref);
  std::size_t shifts = 0;

  while (options.enable_shifts && current > 0) {
    std::size_t best_gain = 0;
    ShiftCandidate best;
    const std::size_t max_len = std::min(options.max_block_length, hyp.size());
    for (std::size_t start = 0; start < hyp.size(); ++start) {
      for (std::size_t len = 1; len <= max_len && start + len <= hyp.size(); ++len) {
        for (std::size_t j = 0; j + len <= ref.size(); ++j) {
          if (!std::equal(hyp.begin() + static_cast<std::ptrdiff_t>(start),
                          hyp.begin() + static_cast<std::ptrdiff_t>(start + len),
                          ref.begin() + static_cast<std::ptrdiff_t>(j))) {
            continue;
          }
          // Skip blocks that already sit at the matching position.
          if (j == start) continue;
          const std::size_t distance = j > start ? j - start : start - j;
          if (distance > options.max_shift_distance) continue;
          auto shifted = apply_shift(hyp, start, len, j);
          if (shifted == hyp) continue;
          const std::size_t d = levenshtein(shifted, ref);
          if (d < current && current - d > best_gain) {
            best_gain = current - d;
            best.result = std::move(shifted);
            best.distance = distance;
          }
        }
      }
    }
    if (best_gain == 0) break;
    hyp = std::move(best.result);
    current -= best_gain;
    ++shifts;
  }

  TerResult result;
  result.shifts = shifts;
  result.edits = current + shifts;
  result.ref_length = ref.size();
  return result;
}

double ter(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& references,
           const TerOptions& options) {
  check_parallel(hypotheses.size(), references.size(), "ter");
  if (hypotheses.empty()) raise(Errc::empty_corpus, "ter needs at least one sentence pair");
  std::size_t edits = 0;
  std::size_t ref_len = 0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const TerResult r = ter_sentence(hypotheses[i], references[i], options);
    edits += r.edits;
    ref_len += r.ref_length;
  }
  return static_cast<double>(edits) / static_cast<double>(ref_len);
}

namespace {

struct TerMetric final : CorpusMetric {
  explicit TerMetric(const TerOptions& options) : options_(options) {}

  std::size_t stat_size() const override { return 2; }

  void sentence_stats(const Sentence& hypothesis, const Sentence& reference,
                      std::int64_t* out) const override {
    const TerResult r = ter_sentence(hypothesis, reference, options_);
    out[0] = static_cast<std::int64_t>(r.edits);
    out[1] = static_cast<std::int64_t>(r.ref_length);
  }

  double finalize(const std::int64_t* acc) const override {
    if (acc[1] == 0) return 0.0;
    return static_cast<double>(acc[0]) / static_cast<double>(acc[1]);
  }

  bool lower_is_better() const override { return true; }

  TerOptions options_;
};

// ---------------------------------------------------------------------------
// chrF

std::vector<std::string> chrf_stream(const Sentence& sentence, const ChrfOptions& options) {
  std::string text;
  const auto surfaces = sentence.surfaces();
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    if (i > 0 && !options.strip_whitespace) text.push_back(' ');
    text += surfaces[i];
  }
  return utf8_codepoints(text);
}

struct ChrfMetric final : CorpusMetric {
  explicit ChrfMetric(const ChrfOptions& options) : options_(options) {}

  std::size_t stat_size() const override { return 3 * static_cast<std::size_t>(options_.max_n); }

  void sentence_stats(const Sentence& hypothesis, const Sentence& reference,
                      std::int64_t* out) const override {
    const auto hyp = chrf_stream(hypothesis, options_);
    const auto ref = chrf_stream(reference, options_);
    for (std::size_t n = 1; n <= static_cast<std::size_t>(options_.max_n); ++n) {
      const auto hyp_counts = ngram_counts(hyp, n);
      const auto ref_counts = ngram_counts(ref, n);
      std::int64_t hyp_total = 0;
      for (const auto& [k, c] : hyp_counts) hyp_total += c;
      std::int64_t ref_total = 0;
      for (const auto& [k, c] : ref_counts) ref_total += c;
      out[3 * (n - 1)] = clipped_matches(hyp_counts, ref_counts);
      out[3 * (n - 1) + 1] = hyp_total;
      out[3 * (n - 1) + 2] = ref_total;
    }
  }

  double finalize(const std::int64_t* acc) const override {
    double precision_sum = 0.0;
    double recall_sum = 0.0;
    std::size_t orders = 0;
    for (std::size_t n = 1; n <= static_cast<std::size_t>(options_.max_n); ++n) {
      const double matches = static_cast<double>(acc[3 * (n - 1)]);
      const double hyp_total = static_cast<double>(acc[3 * (n - 1) + 1]);
      const double ref_total = static_cast<double>(acc[3 * (n - 1) + 2]);
      if (hyp_total == 0 && ref_total == 0) continue;  // order absent on both sides
      ++orders;
      precision_sum += hyp_total > 0 ? matches / hyp_total : 0.0;
      recall_sum += ref_total > 0 ? matches / ref_total : 0.0;
    }
    if (orders == 0) return 100.0;  // both sides empty, trivially equal
    const double precision = precision_sum / static_cast<double>(orders);
    const double recall = recall_sum / static_cast<double>(orders);
    const double beta2 = options_.beta * options_.beta;
    const double denom = beta2 * precision + recall;
    if (denom == 0.0) return 0.0;
    return 100.0 * (1.0 + beta2) * precision * recall / denom;
  }

  bool lower_is_better() const override { return false; }

  ChrfOptions options_;
};

}  // namespace

double chrf_sentence(const Sentence& hypothesis, const Sentence& reference,
                     const ChrfOptions& options) {
  ChrfMetric metric(options);
  std::vector<std::int64_t> stats(metric.stat_size(), 0);
  metric.sentence_stats(hypothesis, reference, stats.data());
  return metric.finalize(stats.data());
}

double chrf(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& references,
            const ChrfOptions& options) {
  check_parallel(hypotheses.size(), references.size(), "chrf");
  if (hypotheses.empty()) raise(Errc::empty_corpus, "chrf needs at least one sentence pair");
  ChrfMetric metric(options);
  std::vector<std::int64_t> acc(metric.stat_size(), 0);
  std::vector<std::int64_t> stats(metric.stat_size(), 0);
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    metric.sentence_stats(hypotheses[i], references[i], stats.data());
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += stats[k];
  }
  return metric.finalize(acc.data());
}

std::size_t count_unks(const std::vector<Sentence>& hypotheses, std::string_view unk_token) {
  std::size_t count = 0;
  for (const auto& sentence : hypotheses) {
    for (const auto& token : sentence.tokens) {
      if (token.surface == unk_token) ++count;
    }
  }
  return count;
}

MetricKind metric_kind_from_name(std::string_view name) {
  if (name == "bleu") return MetricKind::bleu;
  if (name == "ter") return MetricKind::ter;
  if (name == "chrf") return MetricKind::chrf;
  raise(Errc::bad_config, "unknown metric '" + std::string(name) + "'");
}

std::string_view metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::bleu: return "bleu";
    case MetricKind::ter: return "ter";
    case MetricKind::chrf: return "chrf";
  }
  return "unknown";
}

std::unique_ptr<CorpusMetric> make_metric(MetricKind kind, const MetricOptions& options) {
  switch (kind) {
    case MetricKind::bleu: return std::make_unique<BleuMetric>(options.bleu);
    case MetricKind::ter: return std::make_unique<TerMetric>(options.ter);
    case MetricKind::chrf: return std::make_unique<ChrfMetric>(options.chrf);
  }
  raise(Errc::bad_config, "unknown metric kind");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

SignificanceReport bootstrap_significance(const std::vector<Sentence>& hyps_a,
                                          const std::vector<Sentence>& hyps_b,
                                          const std::vector<Sentence>& references,
                                          const BootstrapOptions& options) {
  check_parallel(hyps_a.size(), references.size(), "bootstrap system A");
  check_parallel(hyps_b.size(), references.size(), "bootstrap system B");
  if (references.empty()) raise(Errc::empty_corpus, "bootstrap needs at least one sentence");

  const auto metric = make_metric(options.metric, options.metric_options);
  const std::size_t width = metric->stat_size();
  const std::size_t n = references.size();

  std::vector<std::int64_t> stats_a(n * width);
  std::vector<std::int64_t> stats_b(n * width);
  for (std::size_t i = 0; i < n; ++i) {
    metric->sentence_stats(hyps_a[i], references[i], stats_a.data() + i * width);
    metric->sentence_stats(hyps_b[i], references[i], stats_b.data() + i * width);
  }

  double wins = 0.0;
  std::vector<std::int64_t> acc_a(width);
  std::vector<std::int64_t> acc_b(width);
  for (std::size_t iter = 0; iter < options.iterations; ++iter) {
    // Independent per-iteration stream keeps chunked evaluation reproducible.
    std::mt19937_64 rng(splitmix64(options.seed ^ (0x51ED2700ULL + iter)));
    std::fill(acc_a.begin(), acc_a.end(), 0);
    std::fill(acc_b.begin(), acc_b.end(), 0);
    for (std::size_t s = 0; s < options.sample_size; ++s) {
      const std::size_t idx = static_cast<std::size_t>(rng() % n);
      const std::int64_t* row_a = stats_a.data() + idx * width;
      const std::int64_t* row_b = stats_b.data() + idx * width;
      for (std::size_t k = 0; k < width; ++k) {
        acc_a[k] += row_a[k];
        acc_b[k] += row_b[k];
      }
    }
    const double score_a = metric->finalize(acc_a.data());
    const double score_b = metric->finalize(acc_b.data());
    if (score_a == score_b) {
      wins += 0.5;
    } else {
      const bool a_better =
          metric->lower_is_better() ? score_a < score_b : score_a > score_b;
      if (a_better) wins += 1.0;
    }
  }

  SignificanceReport report;
  report.win_fraction = wins / static_cast<double>(options.iterations);
  report.p_value = 1.0 - report.win_fraction;
  report.significant = report.p_value < options.alpha;
  return report;
}

}  // namespace mtkit
