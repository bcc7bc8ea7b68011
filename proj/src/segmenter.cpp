#include "cbm/segmenter.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace cbm {

void SegmenterConfig::validate() const
{
  kernel.validate();
  penalty.validate();
  if (max_segment_bars < 1) throw std::invalid_argument("max_segment_bars must be >= 1");
}

SegmentScorer::SegmentScorer(const SelfSimilarityMatrix& a, const KernelSpec& kernel,
                             int maxSegmentBars, ScoreNormalization norm)
    : mBars(a.barCount()), mMaxLen(maxSegmentBars)
{
  kernel.validate();
  if (mMaxLen < 1) throw std::invalid_argument("max_segment_bars must be >= 1");
  mScores.assign(static_cast<std::size_t>(mBars) * static_cast<std::size_t>(mMaxLen), 0.0);

  const Matrix& v = a.values();
  for (int s = 0; s < mBars; ++s)
  {
    const int longest = std::min(mMaxLen, mBars - s);
    // Growing the segment one bar at a time adds column l of the band, in
    // the same order kernel_score sums it: both agree bitwise.
    double upper = 0.0;
    for (int n = 1; n <= longest; ++n)
    {
      const int l = n - 1;
      if (l > 0)
      {
        const int reach = kernel.reach(n);
        for (int k = std::max(0, l - reach); k < l; ++k) upper += v(s + k, s + l);
      }
      const double weighted = 2.0 * upper;
      double score = 0.0;
      if (norm == ScoreNormalization::SegmentLength)
        score = weighted / n;
      else
      {
        const long long mass = kernel_mass(kernel, n);
        score = mass == 0 ? 0.0 : weighted / static_cast<double>(mass);
      }
      mScores[static_cast<std::size_t>(s) * mMaxLen + (n - 1)] = score;
    }
  }

  const int w = std::min(8, mBars);
  if (w <= mMaxLen)
  {
    mUK8Max = kernelScore(1, 1 + w);
    for (int s = 2; s + w <= mBars + 1; ++s) mUK8Max = std::max(mUK8Max, kernelScore(s, s + w));
  }
  else
    mUK8Max = max_window8_score(a, kernel, norm);
}

double SegmentScorer::kernelScore(int start, int endExcl) const
{
  const int n = endExcl - start;
  if (start < 1 || n < 1 || endExcl > mBars + 1 || n > mMaxLen)
    throw std::out_of_range("segment [" + std::to_string(start) + ", " + std::to_string(endExcl) +
                            ") not admissible");
  return mScores[static_cast<std::size_t>(start - 1) * mMaxLen + (n - 1)];
}

double SegmentScorer::score(int start, int endExcl, const PenaltySpec& penalty, ScoreForm form) const
{
  return combine_score(kernelScore(start, endExcl), endExcl - start, penalty, mUK8Max, form);
}

Segmentation optimal_segmentation(int barCount, int maxSegmentBars, const SegmentScoreFn& score,
                                  DpTrace* trace)
{
  if (barCount < 1) throw std::invalid_argument("need at least one bar");
  if (maxSegmentBars < 1) throw std::invalid_argument("max_segment_bars must be >= 1");

  const int last = barCount + 1;
  std::vector<int>    antecedent(static_cast<std::size_t>(last) + 1, 0);
  std::vector<double> prefix(static_cast<std::size_t>(last) + 1,
                             -std::numeric_limits<double>::infinity());
  prefix[1] = 0.0;
  std::uint64_t iterations = 0;

  for (int zeta = 2; zeta <= last; ++zeta)
  {
    const int earliest = std::max(1, zeta - maxSegmentBars);
    int    best = earliest;
    double bestScore = -std::numeric_limits<double>::infinity();
    for (int cand = earliest; cand < zeta; ++cand)
    {
      ++iterations;
      const double total = prefix[cand] + score(cand, zeta);
      if (total >= bestScore)
      {
        bestScore = total;
        best = cand;
      }
    }
    antecedent[zeta] = best;
    prefix[zeta] = bestScore;
  }

  Segmentation seg;
  for (int zeta = last; zeta != 1; zeta = antecedent[zeta]) seg.boundaries.push_back(zeta);
  seg.boundaries.push_back(1);
  std::reverse(seg.boundaries.begin(), seg.boundaries.end());
  seg.total_score = prefix[last];

  if (trace)
  {
    trace->antecedents = std::move(antecedent);
    trace->prefix_scores = std::move(prefix);
    trace->inner_iterations = iterations;
  }
  return seg;
}

Segmentation exhaustive_segmentation(int barCount, int maxSegmentBars, const SegmentScoreFn& score,
                                     std::uint64_t* examined)
{
  if (barCount < 1) throw std::invalid_argument("need at least one bar");
  if (barCount > kMaxBruteForceBars)
    throw std::invalid_argument("exhaustive search limited to " + std::to_string(kMaxBruteForceBars) +
                                " bars, got " + std::to_string(barCount));
  if (maxSegmentBars < 1) throw std::invalid_argument("max_segment_bars must be >= 1");

  const int interior = barCount - 1; // candidate boundaries 2..B
  Segmentation best;
  best.total_score = -std::numeric_limits<double>::infinity();
  bool found = false;
  if (examined) *examined = 0;

  std::vector<int> bounds;
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << interior); ++mask)
  {
    bounds.clear();
    bounds.push_back(1);
    for (int b = 0; b < interior; ++b)
      if (mask & (std::uint32_t{1} << b)) bounds.push_back(b + 2);
    bounds.push_back(barCount + 1);
    if (examined) ++*examined;

    bool admissible = true;
    for (std::size_t i = 1; i < bounds.size() && admissible; ++i)
      admissible = bounds[i] - bounds[i - 1] <= maxSegmentBars;
    if (!admissible) continue;

    double total = 0.0;
    for (std::size_t i = 1; i < bounds.size(); ++i) total += score(bounds[i - 1], bounds[i]);
    if (!found || total > best.total_score)
    {
      best.boundaries = bounds;
      best.total_score = total;
      found = true;
    }
  }
  return best;
}

Segmentation cbm_segment(const SegmentScorer& scorer, const SegmenterConfig& cfg, DpTrace* trace)
{
  cfg.validate();
  if (cfg.max_segment_bars != scorer.maxSegmentBars())
    throw std::invalid_argument("scorer was built for a different max_segment_bars");
  return optimal_segmentation(
      scorer.barCount(), cfg.max_segment_bars,
      [&](int s, int e) { return scorer.score(s, e, cfg.penalty, cfg.score_form); }, trace);
}

Segmentation cbm_segment(const SelfSimilarityMatrix& a, const SegmenterConfig& cfg, DpTrace* trace)
{
  cfg.validate();
  const SegmentScorer scorer(a, cfg.kernel, cfg.max_segment_bars, cfg.normalization);
  return cbm_segment(scorer, cfg, trace);
}

Segmentation brute_force_segment(const SelfSimilarityMatrix& a, const SegmenterConfig& cfg)
{
  cfg.validate();
  if (a.barCount() > kMaxBruteForceBars)
    throw std::invalid_argument("brute_force_segment limited to " +
                                std::to_string(kMaxBruteForceBars) + " bars");
  // Scores come straight from the penalty module, not from the DP's memo.
  const double uK8Max = max_window8_score(a, cfg.kernel, cfg.normalization);
  return exhaustive_segmentation(a.barCount(), cfg.max_segment_bars, [&](int s, int e) {
    return segment_score(a, s, e, cfg.kernel, cfg.penalty, uK8Max, cfg.score_form,
                         cfg.normalization);
  });
}

} // namespace cbm
