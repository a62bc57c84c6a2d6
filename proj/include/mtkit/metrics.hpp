#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mtkit/corpus.hpp"

namespace mtkit {

enum class BleuSmoothing { none, add1 };

struct BleuOptions {
  int max_n = 4;
  BleuSmoothing smoothing = BleuSmoothing::none;
};

// Corpus BLEU on clipped n-gram precisions with the brevity penalty.
// add1 smoothing adds one to numerator and denominator for n >= 2 and is
// meant for sentence-level reporting.
double bleu(const std::vector<Sentence>& hypotheses,
            const std::vector<Sentence>& references, const BleuOptions& options = {});
double bleu_sentence(const Sentence& hypothesis, const Sentence& reference,
                     const BleuOptions& options = {});

struct TerOptions {
  bool enable_shifts = true;
  std::size_t max_block_length = 10;
  std::size_t max_shift_distance = 50;
};

struct TerResult {
  std::size_t edits = 0;   // insertions + deletions + substitutions + shifts
  std::size_t shifts = 0;
  std::size_t ref_length = 0;

  double rate() const { return static_cast<double>(edits) / static_cast<double>(ref_length); }
};

// Translation error rate with greedy block shifts: repeatedly apply the shift
// with the largest reduction in remaining Levenshtein distance.
TerResult ter_sentence(const Sentence& hypothesis, const Sentence& reference,
                       const TerOptions& options = {});
double ter(const std::vector<Sentence>& hypotheses,
           const std::vector<Sentence>& references, const TerOptions& options = {});

struct ChrfOptions {
  int max_n = 6;
  double beta = 3.0;
  bool strip_whitespace = true;
};

// Character n-gram F-score; n-gram orders empty on both sides are skipped so
// identical strings score 100.
double chrf_sentence(const Sentence& hypothesis, const Sentence& reference,
                     const ChrfOptions& options = {});
double chrf(const std::vector<Sentence>& hypotheses,
            const std::vector<Sentence>& references, const ChrfOptions& options = {});

std::size_t count_unks(const std::vector<Sentence>& hypotheses,
                       std::string_view unk_token = "<unk>");

enum class MetricKind { bleu, ter, chrf };

MetricKind metric_kind_from_name(std::string_view name);
std::string_view metric_name(MetricKind kind);

// Per-sentence sufficient statistics that sum associatively to the corpus
// score; this is what the bootstrap resamples.
class CorpusMetric {
 public:
  virtual ~CorpusMetric() = default;
  virtual std::size_t stat_size() const = 0;
  virtual void sentence_stats(const Sentence& hypothesis, const Sentence& reference,
                              std::int64_t* out) const = 0;
  virtual double finalize(const std::int64_t* accumulated) const = 0;
  virtual bool lower_is_better() const = 0;
};

struct MetricOptions {
  BleuOptions bleu;
  TerOptions ter;
  ChrfOptions chrf;
};

std::unique_ptr<CorpusMetric> make_metric(MetricKind kind, const MetricOptions& options = {});

struct SignificanceReport {
  double win_fraction = 0.0;
  double p_value = 0.0;
  bool significant = false;

  bool operator==(const SignificanceReport&) const = default;
};

struct BootstrapOptions {
  std::size_t sample_size = 1000;
  std::size_t iterations = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  MetricKind metric = MetricKind::bleu;
  MetricOptions metric_options;
};

// Paired bootstrap resampling. Ties count as half wins; per-iteration RNG
// streams are derived from (seed, iteration) so chunked parallel evaluation
// would reproduce the sequential result.
SignificanceReport bootstrap_significance(const std::vector<Sentence>& hyps_a,
                                          const std::vector<Sentence>& hyps_b,
                                          const std::vector<Sentence>& references,
                                          const BootstrapOptions& options = {});

}  // namespace mtkit
