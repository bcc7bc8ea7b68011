#pragma once

#include "cbm/representation.hpp"
#include "cbm/segmenter.hpp"
#include "cbm/similarity.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cbm {

struct AnnotationSet
{
  std::vector<double>             boundaries_seconds;
  std::optional<std::vector<int>> boundaries_bars;

  /// Strictly increasing with at least two entries.
  void validate() const;
};

struct HitRate
{
  double      precision = 0.0;
  double      recall = 0.0;
  double      f_measure = 0.0;
  std::size_t matched = 0;
};

/// Maps every annotated time to the nearest bar time (the earlier one on an
/// exact tie), collapsing duplicates. Bar index k + 1 for bar_times[k].
AnnotationSet align_to_downbeats(const AnnotationSet& ann, std::span<const double> barTimes);

/// One-to-one matching within |est - ann| <= tolerance, maximum cardinality.
HitRate hit_rate(std::span<const double> est, std::span<const double> ann, double tolerance);
HitRate barwise_hit_rate(std::span<const int> est, std::span<const int> ann, int tolBars);

using SizeHistogram = std::map<int, std::size_t>;

SizeHistogram size_histogram(const Segmentation& seg);
SizeHistogram size_histogram(std::span<const int> boundaries);

inline constexpr double kKlSmoothing = 1e-6;

/// KL(p || q) over the union support; q gets kKlSmoothing added per bin
/// before normalization.
double kl_divergence(const SizeHistogram& p, const SizeHistogram& q);

enum class Tolerance { Seconds05, Seconds3, Bars0, Bars1 };

std::string to_string(Tolerance t);
Tolerance parse_tolerance(const std::string& label);
std::vector<Tolerance> parse_tolerances(const std::string& commaSeparated);
inline const std::vector<Tolerance> kAllTolerances = {Tolerance::Seconds05, Tolerance::Seconds3,
                                                      Tolerance::Bars0, Tolerance::Bars1};
inline bool is_time_tolerance(Tolerance t)
{
  return t == Tolerance::Seconds05 || t == Tolerance::Seconds3;
}

/// Whether absolute-time metrics compare against the original annotation
/// times or the downbeat-aligned ones.
enum class TimeReference { Original, Aligned };

std::string_view to_string(TimeReference r);
TimeReference parse_time_reference(std::string_view name);

struct EvalOptions
{
  std::vector<Tolerance> tolerances = kAllTolerances;
  TimeReference          time_reference = TimeReference::Original;
  bool                   trim_endpoints = false;
  bool                   with_kl = false;
};

struct EvalReport
{
  std::map<std::string, HitRate> per_tolerance; // keyed by to_string(Tolerance)
  SizeHistogram                  size_histogram;
  std::optional<double>          kl_vs_reference;
};

/// Evaluates one song. bar_times is needed for time tolerances (to place
/// the estimate in seconds) and for bar tolerances when the annotation has
/// no bar indices yet. Throws std::invalid_argument if it is missing.
EvalReport evaluate(const Segmentation& est, const AnnotationSet& ann,
                    const std::optional<std::vector<double>>& barTimes, const EvalOptions& opts);

/// Mean P/R/F per tolerance, summed matched counts and histograms.
EvalReport mean_report(std::span<const EvalReport> reports);

struct CorpusSong
{
  SelfSimilarityMatrix ssm;
  AnnotationSet        annotation;
  std::vector<double>  bar_times;
};

struct SweepPoint
{
  double     lambda = 0.0;
  double     mean_f0bar = 0.0;
  EvalReport report; // mean over the corpus
};

struct SweepResult
{
  double                  best_lambda = 0.0;
  std::vector<SweepPoint> points;
};

/// For each lambda, segments every song with cfg (penalty lambda replaced)
/// and averages F at 0 bar. Best = highest mean, ties to the smaller lambda.
/// Kernel scores are computed once per song and shared across lambdas.
SweepResult lambda_sweep(std::span<const CorpusSong> corpus, const SegmenterConfig& cfg,
                         std::span<const double> grid, int jobs = 1);

/// 0.01, 0.02, ..., 0.20
std::vector<double> default_lambda_grid();

} // namespace cbm
