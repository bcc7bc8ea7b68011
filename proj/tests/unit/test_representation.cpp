#include "cbm/representation.hpp"
#include "cbm/similarity.hpp"

#include "../support/oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace cbm;

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> r)
{
  Matrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r)
  {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

} // namespace

TEST_SUITE("representation")
{
  TEST_CASE("barwise matrix checks its shape, values and bar times")
  {
    const BarwiseTF x(rows({{1, 0, 0, 0}, {0, 1, 0, 0}}), 2, 2);
    CHECK(x.barCount() == 2);
    CHECK(x.rowSize() == 4);

    CHECK_THROWS_AS(BarwiseTF(rows({{1, 0, 0}}), 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(BarwiseTF(rows({{1, NAN}}), 1, 2), std::invalid_argument);
    CHECK_THROWS_AS(BarwiseTF(rows({{1, INFINITY}}), 1, 2), std::invalid_argument);
    CHECK_THROWS_AS(BarwiseTF(rows({{1}}), 0, 1), std::invalid_argument);

    CHECK_NOTHROW(x.withBarTimes(std::vector<double>{0.0, 1.0, 2.5}));
    CHECK_THROWS_AS(x.withBarTimes(std::vector<double>{0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(x.withBarTimes(std::vector<double>{0.0, 1.0, 1.0}), std::invalid_argument);
  }

  TEST_CASE("row normalization")
  {
    const Matrix n = row_normalize_l2(rows({{3, 4}, {0, 0}, {0.6, 0.8}}));
    CHECK(n(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(n(0, 1) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(n(1, 0) == 0.0);
    CHECK(n(1, 1) == 0.0);
    CHECK(n(2, 0) == doctest::Approx(0.6).epsilon(1e-15));
  }

  TEST_CASE("row normalization is idempotent, zero rows included")
  {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial)
    {
      Matrix x = oracle::randomFeatures(rng, 6, 5);
      x.row(trial % 6).setZero();
      const Matrix once = row_normalize_l2(x);
      const Matrix twice = row_normalize_l2(once);
      CHECK((once - twice).cwiseAbs().maxCoeff() <= 1e-15);
      for (Eigen::Index i = 0; i < x.rows(); ++i)
        if (i != trial % 6) CHECK(once.row(i).norm() == doctest::Approx(1.0).epsilon(1e-14));
    }
  }

  TEST_CASE("centering subtracts the mean bar")
  {
    const BarwiseTF c = center_rows(BarwiseTF::fromRows(rows({{1, 1}, {3, 3}})));
    CHECK(c.data() == rows({{-1, -1}, {1, 1}}));

    CHECK(center_rows(BarwiseTF::fromRows(rows({{2, -5, 7}}))).data().isZero(0.0));
    CHECK(center_rows(BarwiseTF::fromRows(rows({{2, 5}, {2, 5}, {2, 5}}))).data().isZero(0.0));
  }

  TEST_CASE("centered columns have zero mean")
  {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial)
    {
      const Matrix x = oracle::randomFeatures(rng, 2 + trial % 10, 7, -100.0, 100.0);
      const Matrix c = center_rows(BarwiseTF::fromRows(x)).data();
      const double scale = x.cwiseAbs().maxCoeff();
      for (Eigen::Index j = 0; j < c.cols(); ++j) CHECK(std::abs(c.col(j).mean()) <= 1e-12 * scale);
    }
  }

  TEST_CASE("segmentation invariants")
  {
    Segmentation ok{{1, 5, 9}, 0.0};
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.barCount() == 8);
    CHECK(ok.segmentCount() == 2);
    CHECK_THROWS_AS((Segmentation{{2, 5}, 0.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((Segmentation{{1, 5, 5}, 0.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((Segmentation{{1}, 0.0}).validate(), std::invalid_argument);
  }

  TEST_CASE("synthetic song with two sections is block diagonal")
  {
    SyntheticSongSpec spec;
    spec.section_lengths = {8, 8};
    spec.archetypes_per_section = {"A", "B"};
    const SyntheticSong song = synth_block_song(spec);
    CHECK(song.features.barCount() == 16);
    CHECK(song.truth.boundaries == std::vector<int>{1, 9, 17});

    const Matrix a = cosine_ssm(song.features).values();
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j)
      {
        if ((i < 8) == (j < 8))
          CHECK(a(i, j) == doctest::Approx(1.0).epsilon(1e-12));
        else
          CHECK(a(i, j) < 0.1);
      }
  }

  TEST_CASE("synthetic single section and determinism")
  {
    SyntheticSongSpec spec;
    spec.section_lengths = {4};
    CHECK(synth_block_song(spec).truth.boundaries == std::vector<int>{1, 5});

    spec.section_lengths = {3, 5, 2};
    spec.noise_level = 0.3;
    spec.seed = 99;
    CHECK(synth_block_song(spec).features.data() == synth_block_song(spec).features.data());
    spec.seed = 100;
    const Matrix other = synth_block_song(spec).features.data();
    spec.seed = 99;
    CHECK(other != synth_block_song(spec).features.data());

    spec.section_lengths.clear();
    CHECK_THROWS_AS(synth_block_song(spec), std::invalid_argument);
  }

  TEST_CASE("noiseless synthetic bars: shared labels give identical rows, distinct labels near-orthogonal")
  {
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
      SyntheticSongSpec spec;
      spec.section_lengths = {3, 2, 4, 3, 2};
      spec.archetypes_per_section = {"A", "B", "A", "C", "B"};
      spec.seed = seed;
      const SyntheticSong song = synth_block_song(spec);
      const Matrix& x = song.features.data();
      std::vector<std::string> labelOfBar;
      for (std::size_t s = 0; s < spec.section_lengths.size(); ++s)
        for (int b = 0; b < spec.section_lengths[s]; ++b) labelOfBar.push_back(spec.archetypes_per_section[s]);

      for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.rows(); ++j)
        {
          const auto li = labelOfBar[static_cast<std::size_t>(i)];
          const auto lj = labelOfBar[static_cast<std::size_t>(j)];
          if (li == lj)
            CHECK(x.row(i) == x.row(j));
          else
            CHECK(x.row(i).dot(x.row(j)) / (x.row(i).norm() * x.row(j).norm()) < 0.1);
        }
    }
  }

  TEST_CASE("noise level is relative to the archetype norm")
  {
    SyntheticSongSpec spec;
    spec.section_lengths = {200};
    spec.noise_level = 0.05;
    spec.seed = 5;
    const Matrix x = synth_block_song(spec).features.data();
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const double meanDeviation = (x.rowwise() - mean).rowwise().norm().mean();
    CHECK(meanDeviation == doctest::Approx(0.05).epsilon(0.05));
  }

  TEST_CASE("synthetic corpus")
  {
    SyntheticCorpusSpec spec;
    spec.songs = 12;
    spec.seed = 4;
    const auto specs = synth_corpus_specs(spec);
    REQUIRE(specs.size() == 12);
    for (const auto& s : specs)
    {
      CHECK(s.section_lengths.size() == 6);
      for (int len : s.section_lengths) CHECK((len == 4 || len == 8 || len == 12 || len == 16));
      for (std::size_t i = 1; i < s.archetypes_per_section.size(); ++i)
        CHECK(s.archetypes_per_section[i] != s.archetypes_per_section[i - 1]);
    }

    SyntheticCorpusSpec shorter = spec;
    shorter.songs = 5;
    const auto prefix = synth_corpus_specs(shorter);
    for (std::size_t i = 0; i < prefix.size(); ++i)
    {
      CHECK(prefix[i].section_lengths == specs[i].section_lengths);
      CHECK(prefix[i].seed == specs[i].seed);
    }
  }
}
