#pragma once

#include "cbm/representation.hpp"
#include "cbm/similarity.hpp"

namespace cbm {

struct NoveltyConfig
{
  int    kernel_size = 16;      // even
  bool   gaussian_taper = true;
  double smoothing_sigma = 0.0; // bars; 0 disables smoothing
  double peak_threshold = 0.0;  // relative to the curve maximum, in [0, 1]
  int    median_window = 1;     // odd square median filter on the SSM; 1 disables it

  void validate() const;
  bool operator==(const NoveltyConfig&) const = default;
};

/// Quadrant checkerboard: +1 on the two same-side quadrants, -1 across,
/// optionally tapered by a radial Gaussian with std size/4.
Matrix checkerboard_kernel(int size, bool taper);

/// Correlation of the checkerboard kernel along the diagonal of the
/// (optionally median-filtered) SSM, reflect-padded at the borders.
/// Entry b scores a boundary at the start of bar b + 1.
Vector novelty_curve(const SelfSimilarityMatrix& a, const NoveltyConfig& cfg);
Vector novelty_curve(const Matrix& a, const NoveltyConfig& cfg);

/// Strict local maxima at or above peak_threshold * max(novelty); on a
/// plateau the earliest bar wins. Bars 1 and B+1 are always boundaries.
Segmentation pick_peaks(const Vector& novelty, const NoveltyConfig& cfg);

Segmentation foote_segment(const SelfSimilarityMatrix& a, const NoveltyConfig& cfg);

/// Gaussian smoothing with reflected borders; sigma = 0 returns the input.
Vector gaussian_smooth(const Vector& x, double sigma);

/// Square median filter of odd width with reflected borders.
Matrix median_filter(const Matrix& a, int window);

} // namespace cbm
