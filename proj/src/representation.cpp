#include "cbm/representation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace cbm {

BarwiseTF::BarwiseTF(Matrix data, int framesPerBar, int featureBins,
                     std::optional<std::vector<double>> barTimes)
    : mData(std::move(data)), mFramesPerBar(framesPerBar), mFeatureBins(featureBins),
      mBarTimes(std::move(barTimes))
{
  if (mFramesPerBar < 1 || mFeatureBins < 1)
    throw std::invalid_argument("frames_per_bar and feature_bins must be positive");
  if (mData.rows() < 1)
    throw std::invalid_argument("a barwise matrix needs at least one bar");
  if (mData.cols() != static_cast<Eigen::Index>(mFramesPerBar) * mFeatureBins)
    throw std::invalid_argument("row size " + std::to_string(mData.cols()) + " != T*F = " +
                                std::to_string(mFramesPerBar * mFeatureBins));
  if (!mData.allFinite())
    throw std::invalid_argument("barwise matrix contains non-finite values");
  if (mBarTimes)
  {
    const auto& t = *mBarTimes;
    if (t.size() != static_cast<std::size_t>(mData.rows()) + 1)
      throw std::invalid_argument("bar_times must have B+1 = " + std::to_string(mData.rows() + 1) +
                                  " entries, got " + std::to_string(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i)
    {
      if (!std::isfinite(t[i]))
        throw std::invalid_argument("bar_times contains a non-finite value");
      if (i > 0 && !(t[i] > t[i - 1]))
        throw std::invalid_argument("bar_times must be strictly increasing");
    }
  }
}

BarwiseTF BarwiseTF::fromRows(Matrix data)
{
  const int cols = static_cast<int>(data.cols());
  return BarwiseTF(std::move(data), 1, cols);
}

BarwiseTF BarwiseTF::withData(Matrix data) const
{
  return BarwiseTF(std::move(data), mFramesPerBar, mFeatureBins, mBarTimes);
}

BarwiseTF BarwiseTF::withBarTimes(std::optional<std::vector<double>> barTimes) const
{
  return BarwiseTF(mData, mFramesPerBar, mFeatureBins, std::move(barTimes));
}

Matrix row_normalize_l2(const Matrix& x)
{
  Matrix out = x;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
  {
    const double norm = out.row(i).norm();
    if (norm > 0.0) out.row(i) /= norm;
  }
  return out;
}

BarwiseTF row_normalize_l2(const BarwiseTF& x)
{
  return x.withData(row_normalize_l2(x.data()));
}

BarwiseTF center_rows(const BarwiseTF& x)
{
  const Eigen::RowVectorXd mean = x.data().colwise().mean();
  Matrix centered = x.data().rowwise() - mean;
  return x.withData(std::move(centered));
}

void Segmentation::validate() const
{
  if (boundaries.size() < 2)
    throw std::invalid_argument("a segmentation needs at least two boundaries");
  if (boundaries.front() != 1)
    throw std::invalid_argument("first boundary must be bar 1");
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    if (boundaries[i] <= boundaries[i - 1])
      throw std::invalid_argument("boundaries must be strictly increasing");
}

namespace {

constexpr double kMaxArchetypeCosine = 0.1;
constexpr int    kMaxArchetypeAttempts = 10000;

Vector drawArchetype(std::mt19937_64& rng, Eigen::Index dim)
{
  const Eigen::Index support = std::max<Eigen::Index>(1, dim / 16);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(dim));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::shuffle(idx.begin(), idx.end(), rng);

  std::uniform_real_distribution<double> magnitude(0.5, 1.5);
  Vector v = Vector::Zero(dim);
  for (Eigen::Index k = 0; k < support; ++k) v[idx[static_cast<std::size_t>(k)]] = magnitude(rng);
  return v / v.norm();
}

} // namespace

SyntheticSong synth_block_song(const SyntheticSongSpec& spec)
{
  if (spec.section_lengths.empty())
    throw std::invalid_argument("synth_block_song: section_lengths is empty");
  if (!(spec.noise_level >= 0.0))
    throw std::invalid_argument("synth_block_song: noise_level must be >= 0");
  if (!spec.archetypes_per_section.empty() &&
      spec.archetypes_per_section.size() != spec.section_lengths.size())
    throw std::invalid_argument("synth_block_song: one archetype label per section expected");
  for (int len : spec.section_lengths)
    if (len < 1) throw std::invalid_argument("synth_block_song: section lengths must be positive");
  if (!(spec.seconds_per_bar > 0.0))
    throw std::invalid_argument("synth_block_song: seconds_per_bar must be positive");

  std::vector<std::string> labels = spec.archetypes_per_section;
  if (labels.empty())
    for (std::size_t i = 0; i < spec.section_lengths.size(); ++i) labels.push_back(std::to_string(i));

  const Eigen::Index dim = static_cast<Eigen::Index>(spec.frames_per_bar) * spec.feature_bins;
  if (dim < 1) throw std::invalid_argument("synth_block_song: empty bar dimension");

  std::mt19937_64 rng(spec.seed);

  // Archetypes in order of first appearance of each label.
  std::map<std::string, std::size_t> archetypeOf;
  std::vector<Vector>                archetypes;
  for (const auto& label : labels)
  {
    if (archetypeOf.count(label)) continue;
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxArchetypeAttempts && !accepted; ++attempt)
    {
      Vector candidate = drawArchetype(rng, dim);
      accepted = std::all_of(archetypes.begin(), archetypes.end(), [&](const Vector& other) {
        return candidate.dot(other) < kMaxArchetypeCosine;
      });
      if (accepted)
      {
        archetypeOf[label] = archetypes.size();
        archetypes.push_back(std::move(candidate));
      }
    }
    if (!accepted)
      throw std::runtime_error("synth_block_song: could not draw " +
                               std::to_string(archetypes.size() + 1) +
                               " near-orthogonal archetypes in dimension " + std::to_string(dim));
  }

  const int bars = std::accumulate(spec.section_lengths.begin(), spec.section_lengths.end(), 0);
  Matrix data(bars, dim);
  std::normal_distribution<double> noise(0.0, spec.noise_level / std::sqrt(static_cast<double>(dim)));

  Segmentation truth;
  truth.boundaries.push_back(1);
  int row = 0;
  for (std::size_t s = 0; s < spec.section_lengths.size(); ++s)
  {
    const Vector& base = archetypes[archetypeOf[labels[s]]];
    for (int b = 0; b < spec.section_lengths[s]; ++b, ++row)
    {
      data.row(row) = base.transpose();
      if (spec.noise_level > 0.0)
        for (Eigen::Index k = 0; k < dim; ++k) data(row, k) += noise(rng);
    }
    truth.boundaries.push_back(row + 1);
  }

  std::vector<double> barTimes(static_cast<std::size_t>(bars) + 1);
  for (std::size_t i = 0; i < barTimes.size(); ++i)
    barTimes[i] = static_cast<double>(i) * spec.seconds_per_bar;

  return {BarwiseTF(std::move(data), spec.frames_per_bar, spec.feature_bins, std::move(barTimes)),
          std::move(truth)};
}

std::vector<SyntheticSongSpec> synth_corpus_specs(const SyntheticCorpusSpec& spec)
{
  if (spec.section_sizes.empty()) throw std::invalid_argument("synth_corpus: no section sizes");
  if (spec.sections_per_song < 1) throw std::invalid_argument("synth_corpus: sections_per_song must be >= 1");
  if (spec.distinct_labels < 2 || spec.distinct_labels > 26)
    throw std::invalid_argument("synth_corpus: distinct_labels must be in [2, 26]");

  std::vector<SyntheticSongSpec> out;
  out.reserve(spec.songs);
  for (std::size_t i = 0; i < spec.songs; ++i)
  {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pickSize(0, spec.section_sizes.size() - 1);
    std::uniform_int_distribution<int>         pickLabel(0, spec.distinct_labels - 2);

    SyntheticSongSpec song;
    song.noise_level = spec.noise_level;
    song.frames_per_bar = spec.frames_per_bar;
    song.feature_bins = spec.feature_bins;
    song.seconds_per_bar = spec.seconds_per_bar;
    int previous = -1;
    for (int s = 0; s < spec.sections_per_song; ++s)
    {
      song.section_lengths.push_back(spec.section_sizes[pickSize(rng)]);
      int label = pickLabel(rng);
      if (previous >= 0 && label >= previous) ++label; // skip the previous label
      song.archetypes_per_section.push_back(std::string(1, static_cast<char>('A' + label)));
      previous = label;
    }
    song.seed = rng();
    out.push_back(std::move(song));
  }
  return out;
}

std::vector<SyntheticSong> synth_corpus(const SyntheticCorpusSpec& spec)
{
  std::vector<SyntheticSong> out;
  for (const auto& song : synth_corpus_specs(spec)) out.push_back(synth_block_song(song));
  return out;
}

} // namespace cbm
