#pragma once

#include "cbm/penalty.hpp"
#include "cbm/representation.hpp"
#include "cbm/similarity.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace cbm {

inline constexpr int kDefaultMaxSegmentBars = 32;

struct SegmenterConfig
{
  SimilarityKind     similarity = SimilarityKind::RBF;
  KernelSpec         kernel = KernelSpec::band(7);
  PenaltySpec        penalty{};
  int                max_segment_bars = kDefaultMaxSegmentBars;
  ScoreForm          score_form = ScoreForm::SongNormalized;
  ScoreNormalization normalization = ScoreNormalization::SegmentLength;

  void validate() const;
  bool operator==(const SegmenterConfig&) const = default;
};

/// Kernel scores of every admissible segment of one song, computed once
/// and shared read-only by any number of penalty settings (lambda sweeps).
class SegmentScorer
{
public:
  SegmentScorer(const SelfSimilarityMatrix& a, const KernelSpec& kernel, int maxSegmentBars,
                ScoreNormalization norm = ScoreNormalization::SegmentLength);

  int barCount() const noexcept { return mBars; }
  int maxSegmentBars() const noexcept { return mMaxLen; }

  /// u^K of [start, endExcl); endExcl - start must not exceed maxSegmentBars.
  double kernelScore(int start, int endExcl) const;
  /// Best kernel score over all windows of size min(8, B).
  double uK8Max() const noexcept { return mUK8Max; }

  double score(int start, int endExcl, const PenaltySpec& penalty, ScoreForm form) const;

private:
  int                 mBars;
  int                 mMaxLen;
  std::vector<double> mScores; // [(start-1) * mMaxLen + (n-1)]
  double              mUK8Max;
};

/// Score of the segment [start, endExcl), 1-based bars.
using SegmentScoreFn = std::function<double(int start, int endExcl)>;

/// Arrays built by the dynamic program, indexed by boundary 1..B+1
/// (index 0 unused).
struct DpTrace
{
  std::vector<int>    antecedents;
  std::vector<double> prefix_scores;
  std::uint64_t       inner_iterations = 0;
};

/// Best-antecedent dynamic program with backtracking over an arbitrary
/// segment score. Ties go to the largest antecedent.
Segmentation optimal_segmentation(int barCount, int maxSegmentBars, const SegmentScoreFn& score,
                                  DpTrace* trace = nullptr);

/// Exhaustive search over all 2^(B-1) boundary sets. B <= 20.
/// `examined` receives the number of boundary sets looked at.
Segmentation exhaustive_segmentation(int barCount, int maxSegmentBars, const SegmentScoreFn& score,
                                     std::uint64_t* examined = nullptr);

inline constexpr int kMaxBruteForceBars = 20;

Segmentation cbm_segment(const SelfSimilarityMatrix& a, const SegmenterConfig& cfg,
                         DpTrace* trace = nullptr);
/// Same as above on a prebuilt scorer; cfg.kernel / max_segment_bars /
/// normalization must match the scorer.
Segmentation cbm_segment(const SegmentScorer& scorer, const SegmenterConfig& cfg,
                         DpTrace* trace = nullptr);

Segmentation brute_force_segment(const SelfSimilarityMatrix& a, const SegmenterConfig& cfg);

} // namespace cbm
