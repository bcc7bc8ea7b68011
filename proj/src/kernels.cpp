#include "cbm/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

namespace cbm {

namespace {

std::string lowercase(std::string_view s)
{
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

} // namespace

void KernelSpec::validate() const
{
  if (kind == KernelKind::Band && bands < 1)
    throw std::invalid_argument("band kernel needs at least one band");
}

int KernelSpec::reach(int n) const
{
  const int full = std::max(0, n - 1);
  return kind == KernelKind::Full ? full : std::min(bands, full);
}

std::string_view to_string(KernelKind kind)
{
  return kind == KernelKind::Full ? "full" : "band";
}

KernelKind parse_kernel_kind(std::string_view name)
{
  const auto s = lowercase(name);
  if (s == "full") return KernelKind::Full;
  if (s == "band" || s == "vband" || s == "v-band") return KernelKind::Band;
  throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
}

std::string_view to_string(ScoreNormalization norm)
{
  return norm == ScoreNormalization::SegmentLength ? "segment_length" : "kernel_mass";
}

ScoreNormalization parse_score_normalization(std::string_view name)
{
  const auto s = lowercase(name);
  if (s == "segment_length") return ScoreNormalization::SegmentLength;
  if (s == "kernel_mass") return ScoreNormalization::KernelMass;
  throw std::invalid_argument("unknown score normalization '" + std::string(name) + "'");
}

Matrix kernel_matrix(const KernelSpec& spec, int n)
{
  spec.validate();
  if (n < 1) throw std::invalid_argument("kernel size must be positive");
  const int reach = spec.reach(n);
  Matrix k = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
    {
      const int d = std::abs(i - j);
      if (d >= 1 && d <= reach) k(i, j) = 1.0;
    }
  return k;
}

long long kernel_mass(const KernelSpec& spec, int n)
{
  long long mass = 0;
  for (int d = 1; d <= spec.reach(n); ++d) mass += 2LL * (n - d);
  return mass;
}

double kernel_score(const Matrix& a, int start, int endExcl, const KernelSpec& spec,
                    ScoreNormalization norm)
{
  spec.validate();
  const int bars = static_cast<int>(a.rows());
  if (start < 1 || endExcl <= start || endExcl > bars + 1)
    throw std::out_of_range("segment [" + std::to_string(start) + ", " + std::to_string(endExcl) +
                            ") outside 1.." + std::to_string(bars + 1));
  const int n = endExcl - start;
  const int reach = spec.reach(n);
  const Eigen::Index s = start - 1;

  // Column-major over the upper band; the memoized DP scorer extends
  // segments one column at a time in this exact order.
  double upper = 0.0;
  for (int l = 1; l < n; ++l)
    for (int k = std::max(0, l - reach); k < l; ++k) upper += a(s + k, s + l);

  const double weighted = 2.0 * upper;
  if (norm == ScoreNormalization::SegmentLength) return weighted / n;
  const long long mass = kernel_mass(spec, n);
  return mass == 0 ? 0.0 : weighted / static_cast<double>(mass);
}

double kernel_score(const SelfSimilarityMatrix& a, int start, int endExcl, const KernelSpec& spec,
                    ScoreNormalization norm)
{
  return kernel_score(a.values(), start, endExcl, spec, norm);
}

double max_window8_score(const SelfSimilarityMatrix& a, const KernelSpec& spec,
                         ScoreNormalization norm)
{
  const int bars = a.barCount();
  const int w = std::min(8, bars);
  double best = kernel_score(a, 1, 1 + w, spec, norm);
  for (int s = 2; s + w <= bars + 1; ++s) best = std::max(best, kernel_score(a, s, s + w, spec, norm));
  return best;
}

} // namespace cbm
