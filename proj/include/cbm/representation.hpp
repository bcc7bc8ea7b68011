#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cbm {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr int kDefaultFramesPerBar = 96;
inline constexpr int kDefaultFeatureBins = 80;

/// One row per bar, each row the time-major vectorization of that bar's
/// frames_per_bar x feature_bins time-frequency patch.
class BarwiseTF
{
public:
  BarwiseTF(Matrix data, int framesPerBar, int featureBins,
            std::optional<std::vector<double>> barTimes = std::nullopt);

  /// Convenience for small inputs: frames_per_bar = 1, feature_bins = cols.
  static BarwiseTF fromRows(Matrix data);

  const Matrix& data() const noexcept { return mData; }
  int barCount() const noexcept { return static_cast<int>(mData.rows()); }
  int framesPerBar() const noexcept { return mFramesPerBar; }
  int featureBins() const noexcept { return mFeatureBins; }
  int rowSize() const noexcept { return mFramesPerBar * mFeatureBins; }
  const std::optional<std::vector<double>>& barTimes() const noexcept { return mBarTimes; }

  BarwiseTF withData(Matrix data) const;
  BarwiseTF withBarTimes(std::optional<std::vector<double>> barTimes) const;

private:
  Matrix                             mData;
  int                                mFramesPerBar;
  int                                mFeatureBins;
  std::optional<std::vector<double>> mBarTimes;
};

/// Rows divided by their l2 norm; zero rows stay zero.
BarwiseTF row_normalize_l2(const BarwiseTF& x);
Matrix row_normalize_l2(const Matrix& x);

/// Subtracts the mean bar from every bar.
BarwiseTF center_rows(const BarwiseTF& x);

/// Ordered boundary set over bars, 1-based: first = 1, last = B + 1.
struct Segmentation
{
  std::vector<int> boundaries;
  double           total_score = 0.0;

  int barCount() const { return boundaries.empty() ? 0 : boundaries.back() - 1; }
  std::size_t segmentCount() const { return boundaries.empty() ? 0 : boundaries.size() - 1; }
  /// Throws std::invalid_argument if the invariants do not hold.
  void validate() const;
};

struct SyntheticSongSpec
{
  std::vector<int>         section_lengths;
  std::vector<std::string> archetypes_per_section; // label per section, empty = all distinct
  double                   noise_level = 0.0;      // relative to the unit archetype norm
  std::uint64_t            seed = 0;
  int                      frames_per_bar = 16;
  int                      feature_bins = 32;
  double                   seconds_per_bar = 2.0;  // bar_times of the generated song
};

struct SyntheticSong
{
  BarwiseTF    features;
  Segmentation truth;
};

/// Block-structured song: every bar of a section is its archetype plus
/// Gaussian noise. Archetypes are sparse nonnegative unit vectors with
/// pairwise cosine below 0.1.
SyntheticSong synth_block_song(const SyntheticSongSpec& spec);

struct SyntheticCorpusSpec
{
  std::size_t      songs = 50;
  std::vector<int> section_sizes = {4, 8, 12, 16}; // drawn uniformly per section
  int              sections_per_song = 6;
  int              distinct_labels = 3;            // adjacent sections never share one
  double           noise_level = 0.05;
  std::uint64_t    seed = 0;
  int              frames_per_bar = 16;
  int              feature_bins = 32;
  double           seconds_per_bar = 2.0;
};

/// Song i only depends on (seed, i), so corpora are prefix-stable.
std::vector<SyntheticSongSpec> synth_corpus_specs(const SyntheticCorpusSpec& spec);
std::vector<SyntheticSong> synth_corpus(const SyntheticCorpusSpec& spec);

} // namespace cbm
