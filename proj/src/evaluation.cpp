#include "cbm/evaluation.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace cbm {

namespace {

template <typename T>
void requireIncreasing(std::span<const T> xs, const char* what)
{
  if (xs.empty()) throw std::invalid_argument(std::string(what) + " is empty");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1]))
      throw std::invalid_argument(std::string(what) + " must be strictly increasing");
}

HitRate fromMatched(std::size_t matched, std::size_t nEst, std::size_t nAnn)
{
  HitRate h;
  h.matched = matched;
  h.precision = nEst == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(nEst);
  h.recall = nAnn == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(nAnn);
  const double sum = h.precision + h.recall;
  h.f_measure = sum > 0.0 ? 2.0 * h.precision * h.recall / sum : 0.0;
  return h;
}

// Kuhn's augmenting paths; est -> candidate annotations within tolerance.
std::size_t maximumMatching(const std::vector<std::vector<std::size_t>>& adjacency, std::size_t nAnn)
{
  std::vector<long> owner(nAnn, -1);
  std::vector<char> visited;
  std::function<bool(std::size_t)> augment = [&](std::size_t e) {
    for (std::size_t a : adjacency[e])
    {
      if (visited[a]) continue;
      visited[a] = 1;
      if (owner[a] < 0 || augment(static_cast<std::size_t>(owner[a])))
      {
        owner[a] = static_cast<long>(e);
        return true;
      }
    }
    return false;
  };

  std::size_t matched = 0;
  for (std::size_t e = 0; e < adjacency.size(); ++e)
  {
    visited.assign(nAnn, 0);
    if (augment(e)) ++matched;
  }
  return matched;
}

std::vector<double> barsToSeconds(std::span<const int> bars, const std::vector<double>& barTimes)
{
  std::vector<double> out;
  out.reserve(bars.size());
  for (int b : bars)
  {
    if (b < 1 || static_cast<std::size_t>(b) > barTimes.size())
      throw std::invalid_argument("boundary bar " + std::to_string(b) + " has no bar time");
    out.push_back(barTimes[static_cast<std::size_t>(b) - 1]);
  }
  return out;
}

template <typename T>
std::vector<T> trimmed(std::vector<T> xs, bool trim)
{
  if (!trim) return xs;
  if (xs.size() <= 2) return {};
  return std::vector<T>(xs.begin() + 1, xs.end() - 1);
}

} // namespace

void AnnotationSet::validate() const
{
  // Bar-only annotations (e.g. synthetic ground truth) are allowed.
  if (boundaries_seconds.empty() && !boundaries_bars)
    throw std::invalid_argument("an annotation needs boundaries in seconds or bars");
  if (!boundaries_seconds.empty())
  {
    if (boundaries_seconds.size() < 2)
      throw std::invalid_argument("an annotation needs at least two boundaries");
    requireIncreasing(std::span<const double>(boundaries_seconds), "annotation boundaries");
  }
  if (boundaries_bars)
  {
    if (boundaries_bars->size() < 2)
      throw std::invalid_argument("an annotation needs at least two boundaries");
    requireIncreasing(std::span<const int>(*boundaries_bars), "annotation bar boundaries");
  }
}

AnnotationSet align_to_downbeats(const AnnotationSet& ann, std::span<const double> barTimes)
{
  if (barTimes.empty()) throw std::invalid_argument("align_to_downbeats: no bar times");
  requireIncreasing(barTimes, "bar_times");

  AnnotationSet out;
  std::vector<int> bars;
  for (double t : ann.boundaries_seconds)
  {
    const auto it = std::lower_bound(barTimes.begin(), barTimes.end(), t);
    std::size_t k = static_cast<std::size_t>(it - barTimes.begin());
    if (k == barTimes.size())
      k = barTimes.size() - 1;
    else if (k > 0 && t - barTimes[k - 1] <= barTimes[k] - t)
      k = k - 1;
    const int bar = static_cast<int>(k) + 1;
    if (bars.empty() || bars.back() != bar)
    {
      bars.push_back(bar);
      out.boundaries_seconds.push_back(barTimes[k]);
    }
  }
  out.boundaries_bars = std::move(bars);
  return out;
}

HitRate hit_rate(std::span<const double> est, std::span<const double> ann, double tolerance)
{
  if (!(tolerance >= 0.0)) throw std::invalid_argument("tolerance must be >= 0");
  requireIncreasing(est, "estimated boundaries");
  requireIncreasing(ann, "annotated boundaries");

  std::vector<std::vector<std::size_t>> adjacency(est.size());
  for (std::size_t i = 0; i < est.size(); ++i)
    for (std::size_t j = 0; j < ann.size(); ++j)
      if (std::abs(est[i] - ann[j]) <= tolerance) adjacency[i].push_back(j);

  return fromMatched(maximumMatching(adjacency, ann.size()), est.size(), ann.size());
}

HitRate barwise_hit_rate(std::span<const int> est, std::span<const int> ann, int tolBars)
{
  if (tolBars < 0) throw std::invalid_argument("bar tolerance must be >= 0");
  const std::vector<double> e(est.begin(), est.end());
  const std::vector<double> a(ann.begin(), ann.end());
  return hit_rate(e, a, static_cast<double>(tolBars));
}

SizeHistogram size_histogram(std::span<const int> boundaries)
{
  SizeHistogram h;
  for (std::size_t i = 1; i < boundaries.size(); ++i) ++h[boundaries[i] - boundaries[i - 1]];
  return h;
}

SizeHistogram size_histogram(const Segmentation& seg)
{
  return size_histogram(std::span<const int>(seg.boundaries));
}

double kl_divergence(const SizeHistogram& p, const SizeHistogram& q)
{
  if (p.empty() || q.empty()) throw std::invalid_argument("kl_divergence: empty histogram");
  std::map<int, std::pair<double, double>> support;
  for (const auto& [size, count] : p) support[size].first = static_cast<double>(count);
  for (const auto& [size, count] : q) support[size].second = static_cast<double>(count);

  double pTotal = 0.0, qTotal = 0.0;
  for (auto& [size, pq] : support)
  {
    pq.second += kKlSmoothing;
    pTotal += pq.first;
    qTotal += pq.second;
  }
  if (!(pTotal > 0.0)) throw std::invalid_argument("kl_divergence: p has no mass");

  double kl = 0.0;
  for (const auto& [size, pq] : support)
  {
    if (pq.first <= 0.0) continue;
    const double pi = pq.first / pTotal;
    const double qi = pq.second / qTotal;
    kl += pi * std::log(pi / qi);
  }
  return std::max(0.0, kl);
}

std::string to_string(Tolerance t)
{
  switch (t)
  {
  case Tolerance::Seconds05: return "0.5s";
  case Tolerance::Seconds3: return "3s";
  case Tolerance::Bars0: return "0bar";
  case Tolerance::Bars1: return "1bar";
  }
  return "?";
}

Tolerance parse_tolerance(const std::string& label)
{
  for (Tolerance t : kAllTolerances)
    if (to_string(t) == label) return t;
  throw std::invalid_argument("unknown tolerance '" + label + "' (0.5s, 3s, 0bar, 1bar)");
}

std::vector<Tolerance> parse_tolerances(const std::string& commaSeparated)
{
  std::vector<Tolerance> out;
  std::stringstream ss(commaSeparated);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_tolerance(item));
  if (out.empty()) throw std::invalid_argument("no tolerance given");
  return out;
}

std::string_view to_string(TimeReference r)
{
  return r == TimeReference::Original ? "original" : "aligned";
}

TimeReference parse_time_reference(std::string_view name)
{
  if (name == "original") return TimeReference::Original;
  if (name == "aligned") return TimeReference::Aligned;
  throw std::invalid_argument("unknown time reference '" + std::string(name) + "'");
}

EvalReport evaluate(const Segmentation& est, const AnnotationSet& ann,
                    const std::optional<std::vector<double>>& barTimes, const EvalOptions& opts)
{
  est.validate();
  ann.validate();

  const bool needBars = opts.with_kl || std::any_of(opts.tolerances.begin(), opts.tolerances.end(),
                                                    [](Tolerance t) { return !is_time_tolerance(t); });
  std::optional<AnnotationSet> aligned;
  auto alignedAnnotation = [&]() -> const AnnotationSet& {
    if (!aligned)
    {
      if (!barTimes) throw std::invalid_argument("bar times are required to align the annotation");
      aligned = align_to_downbeats(ann, *barTimes);
    }
    return *aligned;
  };

  std::vector<int> annBars;
  if (needBars)
    annBars = ann.boundaries_bars ? *ann.boundaries_bars : *alignedAnnotation().boundaries_bars;

  EvalReport report;
  for (Tolerance t : opts.tolerances)
  {
    HitRate h;
    if (is_time_tolerance(t))
    {
      if (!barTimes)
        throw std::invalid_argument("bar times are required for absolute-time tolerances");
      const auto e = trimmed(barsToSeconds(est.boundaries, *barTimes), opts.trim_endpoints);
      if (opts.time_reference == TimeReference::Original && ann.boundaries_seconds.empty())
        throw std::invalid_argument("annotation has no boundaries in seconds");
      const auto a = trimmed(opts.time_reference == TimeReference::Original
                                 ? ann.boundaries_seconds
                                 : alignedAnnotation().boundaries_seconds,
                             opts.trim_endpoints);
      const double tol = t == Tolerance::Seconds05 ? 0.5 : 3.0;
      h = (e.empty() || a.empty()) ? fromMatched(0, e.size(), a.size()) : hit_rate(e, a, tol);
    }
    else
    {
      const auto e = trimmed(est.boundaries, opts.trim_endpoints);
      const auto a = trimmed(annBars, opts.trim_endpoints);
      const int tol = t == Tolerance::Bars0 ? 0 : 1;
      h = (e.empty() || a.empty()) ? fromMatched(0, e.size(), a.size()) : barwise_hit_rate(e, a, tol);
    }
    report.per_tolerance[to_string(t)] = h;
  }
  report.size_histogram = size_histogram(est);
  if (opts.with_kl) report.kl_vs_reference = kl_divergence(report.size_histogram, size_histogram(annBars));
  return report;
}

EvalReport mean_report(std::span<const EvalReport> reports)
{
  EvalReport out;
  if (reports.empty()) return out;
  std::map<std::string, std::size_t> counts;
  bool allKl = true;
  double klSum = 0.0;
  for (const auto& r : reports)
  {
    for (const auto& [label, h] : r.per_tolerance)
    {
      auto& acc = out.per_tolerance[label];
      acc.precision += h.precision;
      acc.recall += h.recall;
      acc.f_measure += h.f_measure;
      acc.matched += h.matched;
      ++counts[label];
    }
    for (const auto& [size, count] : r.size_histogram) out.size_histogram[size] += count;
    if (r.kl_vs_reference)
      klSum += *r.kl_vs_reference;
    else
      allKl = false;
  }
  for (auto& [label, acc] : out.per_tolerance)
  {
    const double n = static_cast<double>(counts[label]);
    acc.precision /= n;
    acc.recall /= n;
    acc.f_measure /= n;
  }
  if (allKl) out.kl_vs_reference = klSum / static_cast<double>(reports.size());
  return out;
}

std::vector<double> default_lambda_grid()
{
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) grid.push_back(k / 100.0);
  return grid;
}

SweepResult lambda_sweep(std::span<const CorpusSong> corpus, const SegmenterConfig& cfg,
                         std::span<const double> grid, int jobs)
{
  if (corpus.empty()) throw std::invalid_argument("lambda_sweep: empty corpus");
  if (grid.empty()) throw std::invalid_argument("lambda_sweep: empty lambda grid");
  cfg.validate();

  // Song-level state shared read-only across lambdas.
  std::vector<std::optional<SegmentScorer>> scorers(corpus.size());
  std::vector<AnnotationSet>                annotations(corpus.size());
  detail::parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    const CorpusSong& song = corpus[i];
    scorers[i].emplace(song.ssm, cfg.kernel, cfg.max_segment_bars, cfg.normalization);
    AnnotationSet ann = song.annotation;
    if (!ann.boundaries_bars) ann.boundaries_bars = align_to_downbeats(ann, song.bar_times).boundaries_bars;
    annotations[i] = std::move(ann);
  });

  const std::size_t songs = corpus.size();
  std::vector<EvalReport> reports(grid.size() * songs);
  detail::parallel_for(grid.size() * songs, jobs, [&](std::size_t job) {
    const std::size_t g = job / songs, i = job % songs;
    SegmenterConfig local = cfg;
    local.penalty.lambda = grid[g];
    const Segmentation seg = cbm_segment(*scorers[i], local);
    EvalOptions opts;
    if (annotations[i].boundaries_seconds.empty()) opts.tolerances = {Tolerance::Bars0, Tolerance::Bars1};
    reports[job] = evaluate(seg, annotations[i], corpus[i].bar_times, opts);
  });

  SweepResult result;
  double bestF = -1.0;
  for (std::size_t g = 0; g < grid.size(); ++g)
  {
    SweepPoint point;
    point.lambda = grid[g];
    point.report = mean_report(std::span<const EvalReport>(reports.data() + g * songs, songs));
    point.mean_f0bar = point.report.per_tolerance.at(to_string(Tolerance::Bars0)).f_measure;
    const bool better = point.mean_f0bar > bestF ||
                        (point.mean_f0bar == bestF && point.lambda < result.best_lambda);
    if (better)
    {
      bestF = point.mean_f0bar;
      result.best_lambda = point.lambda;
    }
    result.points.push_back(std::move(point));
  }
  return result;
}

} // namespace cbm
