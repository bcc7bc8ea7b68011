#include "cbm/penalty.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cbm {

void PenaltySpec::validate() const
{
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be a finite nonnegative number");
  if (kind == PenaltyKind::TargetDeviation)
  {
    if (tau < 1) throw std::invalid_argument("target-deviation tau must be positive");
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw std::invalid_argument("target-deviation alpha must be positive");
  }
}

std::string_view to_string(PenaltyKind kind)
{
  switch (kind)
  {
  case PenaltyKind::None: return "none";
  case PenaltyKind::TargetDeviation: return "target_deviation";
  case PenaltyKind::Modulo8: return "modulo8";
  }
  return "?";
}

PenaltyKind parse_penalty_kind(std::string_view name)
{
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return c == '-' ? '_' : static_cast<char>(std::tolower(c));
  });
  if (s == "none") return PenaltyKind::None;
  if (s == "target_deviation" || s == "targetdeviation") return PenaltyKind::TargetDeviation;
  if (s == "modulo8" || s == "modulo_8") return PenaltyKind::Modulo8;
  throw std::invalid_argument("unknown penalty '" + std::string(name) + "'");
}

std::string_view to_string(ScoreForm form)
{
  return form == ScoreForm::SongNormalized ? "Eq9" : "Eq4";
}

ScoreForm parse_score_form(std::string_view name)
{
  if (name == "Eq9" || name == "song_normalized") return ScoreForm::SongNormalized;
  if (name == "Eq4" || name == "unnormalized") return ScoreForm::Unnormalized;
  throw std::invalid_argument("unknown score_form '" + std::string(name) +
                              "' (song_normalized or unnormalized)");
}

double target_deviation(int n, int tau, double alpha)
{
  if (n < 1) throw std::invalid_argument("segment size must be positive");
  return std::pow(static_cast<double>(std::abs(n - tau)), alpha);
}

double modulo8(int n)
{
  if (n < 1) throw std::invalid_argument("segment size must be positive");
  if (n == 8) return 0.0;
  if (n % 4 == 0) return 0.25;
  if (n % 2 == 0) return 0.5;
  return 1.0;
}

double penalty_value(const PenaltySpec& spec, int n)
{
  switch (spec.kind)
  {
  case PenaltyKind::None: return 0.0;
  case PenaltyKind::TargetDeviation: return target_deviation(n, spec.tau, spec.alpha);
  case PenaltyKind::Modulo8: return modulo8(n);
  }
  throw std::invalid_argument("unknown penalty kind");
}

double combine_score(double kernelScore, int n, const PenaltySpec& penalty, double uK8Max,
                     ScoreForm form)
{
  if (penalty.kind == PenaltyKind::None) return kernelScore;
  const double scale = form == ScoreForm::SongNormalized ? uK8Max : 1.0;
  return kernelScore - scale * penalty.lambda * penalty_value(penalty, n);
}

double segment_score(const SelfSimilarityMatrix& a, int start, int endExcl, const KernelSpec& kernel,
                     const PenaltySpec& penalty, double uK8Max, ScoreForm form,
                     ScoreNormalization norm)
{
  penalty.validate();
  const double k = kernel_score(a, start, endExcl, kernel, norm);
  return combine_score(k, endExcl - start, penalty, uK8Max, form);
}

} // namespace cbm
