#include "cbm/similarity.hpp"

#include "cbm/error.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cbm {

std::string_view to_string(SimilarityKind kind)
{
  switch (kind)
  {
  case SimilarityKind::Cosine: return "Cosine";
  case SimilarityKind::Autocorrelation: return "Autocorrelation";
  case SimilarityKind::RBF: return "RBF";
  }
  return "?";
}

SimilarityKind parse_similarity_kind(std::string_view name)
{
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "cosine") return SimilarityKind::Cosine;
  if (lower == "autocorrelation" || lower == "autocorr") return SimilarityKind::Autocorrelation;
  if (lower == "rbf") return SimilarityKind::RBF;
  throw std::invalid_argument("unknown similarity '" + std::string(name) + "'");
}

SelfSimilarityMatrix::SelfSimilarityMatrix(Matrix values, SimilarityKind kind,
                                           std::optional<double> gamma)
    : mValues(std::move(values)), mKind(kind), mGamma(gamma)
{
  const Eigen::Index n = mValues.rows();
  if (n < 1 || mValues.cols() != n)
    throw std::invalid_argument("self-similarity matrix must be square and non-empty");
  if (!mValues.allFinite())
    throw std::invalid_argument("self-similarity matrix contains non-finite values");
  if (kind != SimilarityKind::RBF && gamma.has_value())
    throw std::invalid_argument("only RBF matrices carry a gamma");
  if (gamma && !(*gamma > 0.0))
    throw std::invalid_argument("gamma must be positive");

  constexpr double kRangeSlack = 1e-9;
  for (Eigen::Index i = 0; i < n; ++i)
  {
    if (mValues(i, i) != 1.0)
      throw std::invalid_argument("self-similarity diagonal must be exactly 1 (row " +
                                  std::to_string(i + 1) + ")");
    for (Eigen::Index j = i + 1; j < n; ++j)
    {
      const double v = mValues(i, j);
      if (v != mValues(j, i))
        throw std::invalid_argument("self-similarity matrix is not symmetric at (" +
                                    std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
      const bool inRange = kind == SimilarityKind::RBF
                               ? (v > 0.0 && v <= 1.0)
                               : (v >= -1.0 - kRangeSlack && v <= 1.0 + kRangeSlack);
      if (!inRange)
        throw std::invalid_argument("self-similarity value out of range at (" +
                                    std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
    }
  }
}

namespace {

// Upper-triangle products mirrored so the result is exactly symmetric.
Matrix symmetricGram(const Matrix& rows)
{
  const Eigen::Index n = rows.rows();
  Matrix gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    gram(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j)
    {
      const double v = std::clamp(rows.row(i).dot(rows.row(j)), -1.0, 1.0);
      gram(i, j) = v;
      gram(j, i) = v;
    }
  }
  return gram;
}

// Squared distances between normalized bars, upper triangle, row-major order.
std::vector<double> pairwiseSquaredDistances(const Matrix& normalized)
{
  const Eigen::Index n = normalized.rows();
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      d.push_back((normalized.row(i) - normalized.row(j)).squaredNorm());
  return d;
}

std::optional<double> gammaFromDistances(const std::vector<double>& d)
{
  // Ordered pairs (i,j) and (j,i) carry the same value, so the population
  // statistics over unordered pairs are identical.
  const double count = static_cast<double>(d.size());
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= count;
  double var = 0.0;
  for (double v : d) var += (v - mean) * (v - mean);
  var /= count;
  const double sigma = std::sqrt(var);
  // Equal distances computed along different rounding paths can leave a
  // residual of a few ulps.
  if (!(sigma > 1e-12 * std::max(1.0, mean))) return std::nullopt;
  return 1.0 / (2.0 * sigma);
}

SelfSimilarityMatrix rbfFromDistances(Eigen::Index n, const std::vector<double>& d, double gamma)
{
  Matrix values(n, n);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
  {
    values(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j, ++k)
    {
      // Never exactly 0 for finite inputs: distances are at most 4.
      const double v = std::max(std::exp(-gamma * d[k]), std::numeric_limits<double>::min());
      values(i, j) = v;
      values(j, i) = v;
    }
  }
  return SelfSimilarityMatrix(std::move(values), SimilarityKind::RBF, gamma);
}

} // namespace

SelfSimilarityMatrix cosine_ssm(const BarwiseTF& x)
{
  return SelfSimilarityMatrix(symmetricGram(row_normalize_l2(x.data())), SimilarityKind::Cosine);
}

SelfSimilarityMatrix autocorrelation_ssm(const BarwiseTF& x)
{
  if (x.barCount() < 2)
    throw std::invalid_argument("autocorrelation needs at least two bars");
  const Matrix centered = center_rows(x).data();
  if (centered.isZero(0.0))
    throw DegenerateInput("autocorrelation: every bar equals the mean bar");
  return SelfSimilarityMatrix(symmetricGram(row_normalize_l2(centered)),
                              SimilarityKind::Autocorrelation);
}

std::optional<double> rbf_gamma(const BarwiseTF& x)
{
  if (x.barCount() < 2) throw std::invalid_argument("rbf_gamma needs at least two bars");
  return gammaFromDistances(pairwiseSquaredDistances(row_normalize_l2(x.data())));
}

SelfSimilarityMatrix rbf_ssm(const BarwiseTF& x, double gamma)
{
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("rbf gamma must be positive and finite");
  return rbfFromDistances(x.barCount(), pairwiseSquaredDistances(row_normalize_l2(x.data())), gamma);
}

SelfSimilarityMatrix rbf_ssm(const BarwiseTF& x)
{
  const Eigen::Index n = x.barCount();
  const auto d = pairwiseSquaredDistances(row_normalize_l2(x.data()));
  const std::optional<double> gamma = n >= 2 ? gammaFromDistances(d) : std::nullopt;
  if (!gamma)
  {
    // Degenerate limit: no spread in distances, every pair equally similar.
    return SelfSimilarityMatrix(Matrix::Ones(n, n), SimilarityKind::RBF);
  }
  return rbfFromDistances(n, d, *gamma);
}

SelfSimilarityMatrix compute_ssm(const BarwiseTF& x, SimilarityKind kind)
{
  switch (kind)
  {
  case SimilarityKind::Cosine: return cosine_ssm(x);
  case SimilarityKind::Autocorrelation: return autocorrelation_ssm(x);
  case SimilarityKind::RBF: return rbf_ssm(x);
  }
  throw std::invalid_argument("unknown similarity kind");
}

} // namespace cbm
