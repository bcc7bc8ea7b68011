#pragma once

#include "cbm/kernels.hpp"

#include <string_view>

namespace cbm {

enum class PenaltyKind { None, TargetDeviation, Modulo8 };

struct PenaltySpec
{
  PenaltyKind kind = PenaltyKind::Modulo8;
  int         tau = 8;      // TargetDeviation only
  double      alpha = 1.0;  // TargetDeviation only
  double      lambda = 0.04;

  void validate() const;
  bool operator==(const PenaltySpec&) const = default;
};

/// Whether the penalty term is scaled by the song's best size-8 window
/// score (SongNormalized, the default) or used as is (Unnormalized).
/// Config files carry the tokens "Eq9" / "Eq4"; "song_normalized" and
/// "unnormalized" are accepted on input too.
enum class ScoreForm { Unnormalized, SongNormalized };

std::string_view to_string(PenaltyKind kind);
PenaltyKind parse_penalty_kind(std::string_view name);
std::string_view to_string(ScoreForm form);
ScoreForm parse_score_form(std::string_view name);

/// |n - tau|^alpha
double target_deviation(int n, int tau, double alpha);

/// 0 for n = 8, then 1/4 if 4 | n, 1/2 if 2 | n, 1 otherwise.
double modulo8(int n);

/// p(n) for the chosen kind; exactly 0 for PenaltyKind::None.
double penalty_value(const PenaltySpec& spec, int n);

/// u^K(segment) - scale * lambda * p(n), where scale is u_k8_max for the
/// song-normalized form and 1 otherwise.
double segment_score(const SelfSimilarityMatrix& a, int start, int endExcl, const KernelSpec& kernel,
                     const PenaltySpec& penalty, double uK8Max,
                     ScoreForm form = ScoreForm::SongNormalized,
                     ScoreNormalization norm = ScoreNormalization::SegmentLength);

/// Combines a precomputed kernel score with the penalty term. Every
/// segment score in the library goes through this one expression.
double combine_score(double kernelScore, int n, const PenaltySpec& penalty, double uK8Max,
                     ScoreForm form);

} // namespace cbm
