#pragma once

#include "cbm/similarity.hpp"

#include <string_view>

namespace cbm {

enum class KernelKind { Full, Band };

/// Zero-diagonal weighting kernel applied to a segment's SSM crop.
struct KernelSpec
{
  KernelKind kind = KernelKind::Band;
  int        bands = 7; // used by Band only

  static KernelSpec full() { return {KernelKind::Full, 0}; }
  static KernelSpec band(int v) { return {KernelKind::Band, v}; }

  void validate() const;
  /// Largest |i - j| with a nonzero weight inside a crop of size n.
  int reach(int n) const;

  /// bands only matters for Band kernels.
  bool operator==(const KernelSpec& o) const
  {
    return kind == o.kind && (kind == KernelKind::Full || bands == o.bands);
  }
};

/// How u^K divides the weighted sum: by the segment length n, or by the
/// number of nonzero kernel entries.
enum class ScoreNormalization { SegmentLength, KernelMass };

std::string_view to_string(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view name);
std::string_view to_string(ScoreNormalization norm);
ScoreNormalization parse_score_normalization(std::string_view name);

Matrix kernel_matrix(const KernelSpec& spec, int n);

/// Number of nonzero entries of kernel_matrix(spec, n).
long long kernel_mass(const KernelSpec& spec, int n);

/// u^K of the segment [start, end_excl) (1-based bar indices):
/// (1/n) sum_kl A_kl K_kl over the diagonal crop. The band is summed
/// directly; the kernel is never materialized.
double kernel_score(const SelfSimilarityMatrix& a, int start, int endExcl, const KernelSpec& spec,
                    ScoreNormalization norm = ScoreNormalization::SegmentLength);
double kernel_score(const Matrix& a, int start, int endExcl, const KernelSpec& spec,
                    ScoreNormalization norm = ScoreNormalization::SegmentLength);

/// Best kernel_score over all windows of size min(8, B).
double max_window8_score(const SelfSimilarityMatrix& a, const KernelSpec& spec,
                         ScoreNormalization norm = ScoreNormalization::SegmentLength);

} // namespace cbm
