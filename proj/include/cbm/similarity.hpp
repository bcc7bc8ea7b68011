#pragma once

#include "cbm/representation.hpp"

#include <optional>
#include <string_view>

namespace cbm {

enum class SimilarityKind { Cosine, Autocorrelation, RBF };

std::string_view to_string(SimilarityKind kind);
/// Throws std::invalid_argument on an unknown name.
SimilarityKind parse_similarity_kind(std::string_view name);

/// B x B bar-pair similarities. Construction checks symmetry (exact),
/// the unit diagonal (exact) and the value range of the kind.
class SelfSimilarityMatrix
{
public:
  SelfSimilarityMatrix(Matrix values, SimilarityKind kind,
                       std::optional<double> gamma = std::nullopt);

  const Matrix& values() const noexcept { return mValues; }
  SimilarityKind kind() const noexcept { return mKind; }
  std::optional<double> gamma() const noexcept { return mGamma; }
  int barCount() const noexcept { return static_cast<int>(mValues.rows()); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return mValues(i, j); }

private:
  Matrix                mValues;
  SimilarityKind        mKind;
  std::optional<double> mGamma;
};

SelfSimilarityMatrix cosine_ssm(const BarwiseTF& x);

/// Cosine similarity of the mean-centered bars. Throws std::invalid_argument
/// for B < 2 and DegenerateInput when every centered bar is zero.
SelfSimilarityMatrix autocorrelation_ssm(const BarwiseTF& x);

/// gamma = 1 / (2 sigma), sigma the population standard deviation of the
/// squared distances between l2-normalized bars over pairs i != j.
/// Returns nullopt when sigma is zero. Throws std::invalid_argument for B < 2.
std::optional<double> rbf_gamma(const BarwiseTF& x);

/// exp(-gamma |x_i/|x_i| - x_j/|x_j||^2), gamma from rbf_gamma. A single bar
/// or a zero sigma gives the all-ones matrix with no gamma recorded.
SelfSimilarityMatrix rbf_ssm(const BarwiseTF& x);
SelfSimilarityMatrix rbf_ssm(const BarwiseTF& x, double gamma);

SelfSimilarityMatrix compute_ssm(const BarwiseTF& x, SimilarityKind kind);

} // namespace cbm
