#include "cbm/foote.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cbm {

namespace {

// Mirror with the edge sample repeated: -1 -> 0, n -> n - 1.
Eigen::Index reflect(Eigen::Index i, Eigen::Index n)
{
  const Eigen::Index period = 2 * n;
  Eigen::Index m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

} // namespace

void NoveltyConfig::validate() const
{
  if (kernel_size < 2 || kernel_size % 2 != 0)
    throw std::invalid_argument("novelty kernel size must be even and >= 2");
  if (!(smoothing_sigma >= 0.0)) throw std::invalid_argument("smoothing_sigma must be >= 0");
  if (!(peak_threshold >= 0.0 && peak_threshold <= 1.0))
    throw std::invalid_argument("peak_threshold must lie in [0, 1]");
  if (median_window < 1 || median_window % 2 == 0)
    throw std::invalid_argument("median_window must be odd and >= 1");
}

Matrix checkerboard_kernel(int size, bool taper)
{
  if (size < 2 || size % 2 != 0)
    throw std::invalid_argument("checkerboard kernel size must be even and >= 2");
  const int half = size / 2;
  const double center = (size - 1) / 2.0;
  const double sigma = size / 4.0;
  Matrix k(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j)
    {
      const double sign = ((i < half) == (j < half)) ? 1.0 : -1.0;
      double w = 1.0;
      if (taper)
      {
        const double di = i - center, dj = j - center;
        w = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
      }
      k(i, j) = sign * w;
    }
  return k;
}

Matrix median_filter(const Matrix& a, int window)
{
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("median window must be odd");
  if (window == 1) return a;
  const Eigen::Index rows = a.rows(), cols = a.cols();
  const int r = window / 2;
  Matrix out(rows, cols);
  std::vector<double> buf(static_cast<std::size_t>(window) * window);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
    {
      std::size_t k = 0;
      for (int di = -r; di <= r; ++di)
        for (int dj = -r; dj <= r; ++dj) buf[k++] = a(reflect(i + di, rows), reflect(j + dj, cols));
      auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
      std::nth_element(buf.begin(), mid, buf.end());
      out(i, j) = *mid;
    }
  return out;
}

Vector gaussian_smooth(const Vector& x, double sigma)
{
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  if (sigma == 0.0 || x.size() == 0) return x;
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int d = -radius; d <= radius; ++d)
    total += w[static_cast<std::size_t>(d + radius)] = std::exp(-0.5 * (d / sigma) * (d / sigma));
  for (double& v : w) v /= total;

  const Eigen::Index n = x.size();
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    double acc = 0.0;
    for (int d = -radius; d <= radius; ++d) acc += w[static_cast<std::size_t>(d + radius)] * x[reflect(i + d, n)];
    out[i] = acc;
  }
  return out;
}

Vector novelty_curve(const Matrix& a, const NoveltyConfig& cfg)
{
  cfg.validate();
  const Matrix filtered = median_filter(a, cfg.median_window);
  const Matrix kernel = checkerboard_kernel(cfg.kernel_size, cfg.gaussian_taper);
  const Eigen::Index n = filtered.rows();
  const int half = cfg.kernel_size / 2;

  Vector raw(n);
  for (Eigen::Index b = 0; b < n; ++b)
  {
    double acc = 0.0;
    for (int k = 0; k < cfg.kernel_size; ++k)
    {
      const Eigen::Index row = reflect(b - half + k, n);
      for (int l = 0; l < cfg.kernel_size; ++l)
        acc += filtered(row, reflect(b - half + l, n)) * kernel(k, l);
    }
    raw[b] = acc;
  }
  return gaussian_smooth(raw, cfg.smoothing_sigma);
}

Vector novelty_curve(const SelfSimilarityMatrix& a, const NoveltyConfig& cfg)
{
  return novelty_curve(a.values(), cfg);
}

Segmentation pick_peaks(const Vector& novelty, const NoveltyConfig& cfg)
{
  cfg.validate();
  const Eigen::Index n = novelty.size();
  if (n < 1) throw std::invalid_argument("empty novelty curve");
  const double threshold = cfg.peak_threshold * novelty.maxCoeff();

  Segmentation seg;
  seg.boundaries.push_back(1);
  // Index 0 is bar 1, already a boundary.
  for (Eigen::Index i = 1; i < n; ++i)
  {
    if (!(novelty[i] > novelty[i - 1])) continue;
    Eigen::Index j = i + 1;
    while (j < n && novelty[j] == novelty[i]) ++j;
    const bool isPeak = j == n || novelty[j] < novelty[i];
    if (isPeak && novelty[i] >= threshold) seg.boundaries.push_back(static_cast<int>(i) + 1);
  }
  seg.boundaries.push_back(static_cast<int>(n) + 1);
  return seg;
}

Segmentation foote_segment(const SelfSimilarityMatrix& a, const NoveltyConfig& cfg)
{
  return pick_peaks(novelty_curve(a, cfg), cfg);
}

} // namespace cbm
