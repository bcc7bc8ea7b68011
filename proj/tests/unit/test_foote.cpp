#include "cbm/foote.hpp"

#include "../support/oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace cbm;

namespace {

Matrix twoBlocks(int first, int second, double cross = 0.0)
{
  const int b = first + second;
  Matrix a = Matrix::Constant(b, b, cross);
  a.topLeftCorner(first, first).setOnes();
  a.bottomRightCorner(second, second).setOnes();
  return a;
}

int argmax(const Vector& v)
{
  Eigen::Index i = 0;
  v.maxCoeff(&i);
  return static_cast<int>(i);
}

} // namespace

TEST_SUITE("foote")
{
  TEST_CASE("checkerboard kernels")
  {
    Matrix two(2, 2);
    two << 1, -1, -1, 1;
    CHECK(checkerboard_kernel(2, false) == two);
    CHECK(checkerboard_kernel(4, false).sum() == 0.0);
    CHECK_THROWS_AS(checkerboard_kernel(5, false), std::invalid_argument);

    const Matrix k = checkerboard_kernel(16, true);
    CHECK(std::abs(k(0, 0)) < std::abs(k(7, 7)));
    CHECK(std::abs(k(0, 15)) < std::abs(k(7, 8)));
  }

  TEST_CASE("checkerboard kernels are symmetric; untapered ones sum to zero")
  {
    for (int size = 2; size <= 32; size += 2)
      for (bool taper : {false, true})
      {
        const Matrix k = checkerboard_kernel(size, taper);
        CHECK(k == k.transpose());
        if (!taper) CHECK(k.sum() == 0.0);
        CHECK(std::abs(k.sum()) <= 1e-12 * k.cwiseAbs().sum());
      }
  }

  TEST_CASE("homogeneous song has no novelty")
  {
    const SelfSimilarityMatrix ones(Matrix::Ones(20, 20), SimilarityKind::Cosine);
    for (bool taper : {false, true})
    {
      NoveltyConfig cfg;
      cfg.gaussian_taper = taper;
      CHECK(novelty_curve(ones, cfg).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK(foote_segment(ones, NoveltyConfig{}).boundaries == std::vector<int>{1, 21});
  }

  TEST_CASE("novelty peaks where two blocks meet")
  {
    for (int m : {5, 9, 13, 17})
    {
      const Matrix a = twoBlocks(m - 1, 25 - m);
      NoveltyConfig cfg;
      const Vector curve = novelty_curve(a, cfg);
      CHECK(argmax(curve) + 1 == m);
      CHECK(foote_segment(SelfSimilarityMatrix(a, SimilarityKind::Cosine), cfg).boundaries ==
            std::vector<int>{1, m, 25});
    }
  }

  TEST_CASE("novelty is linear in the similarity matrix")
  {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 20; ++trial)
    {
      const int b = 5 + trial * 2;
      const Matrix a1 = oracle::randomSymmetric(rng, b);
      const Matrix a2 = oracle::randomSymmetric(rng, b);
      NoveltyConfig cfg;
      cfg.kernel_size = 2 * (1 + trial % 8);
      cfg.smoothing_sigma = (trial % 3) * 0.75;
      const Vector sum = novelty_curve(Matrix(a1 + a2), cfg);
      const Vector parts = novelty_curve(a1, cfg) + novelty_curve(a2, cfg);
      CHECK((sum - parts).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }

  TEST_CASE("zero smoothing returns the raw correlation")
  {
    std::mt19937_64 rng(62);
    const Matrix a = oracle::randomSymmetric(rng, 30);
    NoveltyConfig cfg;
    cfg.kernel_size = 8;
    const Matrix k = checkerboard_kernel(8, true);
    const Vector curve = novelty_curve(a, cfg);
    // Interior bars need no padding: plain windowed sum.
    for (int b = 4; b + 4 <= 30; ++b)
    {
      double expected = 0.0;
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) expected += a(b - 4 + i, b - 4 + j) * k(i, j);
      CHECK(curve(b) == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(gaussian_smooth(curve, 0.0) == curve);
  }

  TEST_CASE("reflect padding repeats the edge sample")
  {
    Matrix a = Matrix::Identity(3, 3);
    a(0, 1) = a(1, 0) = 0.5;
    NoveltyConfig cfg;
    cfg.kernel_size = 2;
    cfg.gaussian_taper = false;
    // Bar 0 window covers padded index -1 (reflects to 0) and 0.
    const Vector curve = novelty_curve(a, cfg);
    CHECK(curve(0) == doctest::Approx(a(0, 0) - 2 * a(0, 0) + a(0, 0)).epsilon(1e-15));
    CHECK(curve(1) == doctest::Approx(a(0, 0) - 2 * a(0, 1) + a(1, 1)).epsilon(1e-15));
  }

  TEST_CASE("peak picking")
  {
    NoveltyConfig cfg;
    CHECK(pick_peaks(Vector::Zero(10), cfg).boundaries == std::vector<int>{1, 11});

    Vector single = Vector::Zero(10);
    single(5) = 2.0;
    CHECK(pick_peaks(single, cfg).boundaries == std::vector<int>{1, 6, 11});

    Vector tie = Vector::Zero(10);
    tie(3) = tie(4) = 1.0;
    CHECK(pick_peaks(tie, cfg).boundaries == std::vector<int>{1, 4, 11});

    Vector two = Vector::Zero(12);
    two(3) = 1.0;
    two(8) = 0.4;
    cfg.peak_threshold = 0.5;
    CHECK(pick_peaks(two, cfg).boundaries == std::vector<int>{1, 4, 13});
    cfg.peak_threshold = 0.3;
    CHECK(pick_peaks(two, cfg).boundaries == std::vector<int>{1, 4, 9, 13});
  }

  TEST_CASE("peak picking always yields a valid segmentation")
  {
    std::mt19937_64 rng(63);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial)
    {
      Vector v(1 + trial % 40);
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = trial % 4 == 0 ? std::round(u(rng) * 2) : u(rng);
      NoveltyConfig cfg;
      cfg.peak_threshold = (trial % 5) / 5.0;
      const Segmentation seg = pick_peaks(v, cfg);
      CHECK_NOTHROW(seg.validate());
      CHECK(seg.barCount() == v.size());
    }
  }

  TEST_CASE("median filter")
  {
    Matrix a = Matrix::Ones(5, 5);
    a(2, 2) = 100.0;
    CHECK(median_filter(a, 3) == Matrix::Ones(5, 5));
    CHECK(median_filter(a, 1) == a);
    CHECK_THROWS_AS(median_filter(a, 2), std::invalid_argument);
  }

  TEST_CASE("gaussian smoothing preserves constants")
  {
    const Vector c = Vector::Constant(15, 2.5);
    CHECK((gaussian_smooth(c, 1.7) - c).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("novelty config validation")
  {
    NoveltyConfig cfg;
    cfg.kernel_size = 7;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.peak_threshold = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.median_window = 4;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
}
