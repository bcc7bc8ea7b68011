#pragma once

// Batch driver behind the `cbm` executable. Parsing of argv lives in the
// tool; everything here works on an already-resolved manifest.

#include "cbm/evaluation.hpp"
#include "cbm/foote.hpp"
#include "cbm/representation.hpp"
#include "cbm/segmenter.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cbm::cli {

namespace fs = std::filesystem;

enum class Mode { Similarity, Segment, Eval, Sweep, Foote, Synth };

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view name);

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitInvalid = 2;

struct SynthOptions
{
  SyntheticCorpusSpec corpus;
  std::vector<int>         sections; // fixed layout for every song; empty = random sizes
  std::vector<std::string> labels;   // per fixed section
};

struct RunManifest
{
  Mode                  mode = Mode::Segment;
  std::vector<fs::path> input_paths;
  SegmenterConfig       config;
  NoveltyConfig         novelty;
  fs::path              output_dir = ".";

  // eval / sweep: one annotation per input, same order.
  std::vector<fs::path> annotation_paths;
  // Optional bar-time files per input; otherwise "<stem>.bars.json" beside it.
  std::vector<fs::path> bar_time_paths;
  EvalOptions           eval;
  std::vector<double>   lambda_grid = default_lambda_grid();

  int                          jobs = 1;
  std::optional<std::uint64_t> seed; // synth only, required there
  SynthOptions                 synth;

  /// Throws std::invalid_argument when the mode's required inputs are absent.
  void validate() const;
};

struct RunResult
{
  int                      exit_code = kExitOk;
  std::vector<fs::path>    written;
  std::vector<std::string> errors; // "path: message"
};

/// Never throws for per-file problems: those are listed in errors and the
/// batch continues. Manifest problems yield kExitInvalid.
RunResult run(const RunManifest& manifest);

} // namespace cbm::cli
