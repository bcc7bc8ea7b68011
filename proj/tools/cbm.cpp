// cbm: batch front end for the segmentation library.
//
//   cbm synth    --seed 7 --count 10 --out corpus/
//   cbm segment  corpus/*.csv --out seg/
//   cbm eval     seg/*.seg.json --annotations corpus/*.truth.json --bars corpus/*.bars.json --out eval/
//   cbm sweep    corpus/*.csv --annotations corpus/*.truth.json --out sweep/

#include "cbm/cli.hpp"
#include "cbm/io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

using namespace cbm;
using cli::Mode;

struct Flags
{
  std::vector<std::string> inputs;
  std::string              config;
  std::string              out = ".";
  int                      jobs = 1;

  std::optional<std::string> similarity, kernel, penalty, scoreForm, normalization;
  std::optional<int>         bands, maxSegment, tau;
  std::optional<double>      lambda, alpha;

  std::vector<std::string>   annotations, bars;
  std::optional<std::string> tolerances, timeReference, grid;
  bool                       trimEndpoints = false, kl = false;

  std::optional<int>    kernelSize, median;
  std::optional<double> smoothing, threshold;
  bool                  noTaper = false;

  std::optional<std::uint64_t> seed;
  std::optional<std::string>   sizes, sections, labels;
  std::optional<std::size_t>   count;
  std::optional<int>           sectionsPerSong, frames, bins, distinctLabels;
  std::optional<double>        noise;
};

std::vector<std::string> splitList(const std::string& s)
{
  std::vector<std::string> out;
  std::stringstream        ss(s);
  std::string              item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<int> intList(const std::string& s)
{
  std::vector<int> out;
  for (const auto& item : splitList(s)) out.push_back(std::stoi(item));
  return out;
}

std::vector<double> realList(const std::string& s)
{
  std::vector<double> out;
  for (const auto& item : splitList(s)) out.push_back(std::stod(item));
  return out;
}

void addSegmenterFlags(CLI::App* sub, Flags& f)
{
  sub->add_option("inputs", f.inputs, "Barwise feature CSVs or SSM CSVs");
  sub->add_option("--config", f.config, "JSON config; flags override it");
  sub->add_option("--out", f.out, "Output directory");
  sub->add_option("--jobs", f.jobs, "Songs processed in parallel")->check(CLI::PositiveNumber);
  sub->add_option("--bars", f.bars, "Bar-time JSON per input, same order");
  sub->add_option("--similarity", f.similarity, "cosine | autocorrelation | rbf");
  sub->add_option("--kernel", f.kernel, "full | band");
  sub->add_option("--bands", f.bands, "Bands of the band kernel");
  sub->add_option("--penalty", f.penalty, "none | target_deviation | modulo8");
  sub->add_option("--lambda", f.lambda, "Penalty weight");
  sub->add_option("--tau", f.tau, "Target size of target_deviation");
  sub->add_option("--alpha", f.alpha, "Exponent of target_deviation");
  sub->add_option("--max-segment", f.maxSegment, "Longest segment in bars");
  sub->add_option("--score-form", f.scoreForm, "song_normalized | unnormalized");
  sub->add_option("--normalization", f.normalization, "segment_length | kernel_mass");
}

void addEvalFlags(CLI::App* sub, Flags& f)
{
  sub->add_option("--annotations", f.annotations, "Annotation per input, same order")->required();
}

cli::RunManifest buildManifest(Mode mode, const Flags& f)
{
  cli::RunManifest m;
  m.mode = mode;
  for (const auto& p : f.inputs) m.input_paths.emplace_back(p);
  for (const auto& p : f.annotations) m.annotation_paths.emplace_back(p);
  for (const auto& p : f.bars) m.bar_time_paths.emplace_back(p);
  m.output_dir = f.out;
  m.jobs = f.jobs;

  // defaults < config file < flags
  bool similarityChosen = false;
  if (!f.config.empty())
  {
    const io::json j = io::json::parse(io::read_text(f.config));
    m.config = io::config_from_json(j, m.config);
    similarityChosen = j.contains("similarity");
    if (j.contains("novelty")) m.novelty = io::novelty_from_json(j["novelty"], m.novelty);
  }
  if (mode == Mode::Foote && !similarityChosen && !f.similarity)
    m.config.similarity = SimilarityKind::Cosine;

  SegmenterConfig& c = m.config;
  if (f.similarity) c.similarity = parse_similarity_kind(*f.similarity);
  if (f.kernel) c.kernel.kind = parse_kernel_kind(*f.kernel);
  if (f.bands) c.kernel.bands = *f.bands;
  if (f.penalty) c.penalty.kind = parse_penalty_kind(*f.penalty);
  if (f.lambda) c.penalty.lambda = *f.lambda;
  if (f.tau) c.penalty.tau = *f.tau;
  if (f.alpha) c.penalty.alpha = *f.alpha;
  if (f.maxSegment) c.max_segment_bars = *f.maxSegment;
  if (f.scoreForm) c.score_form = parse_score_form(*f.scoreForm);
  if (f.normalization) c.normalization = parse_score_normalization(*f.normalization);

  if (f.tolerances) m.eval.tolerances = parse_tolerances(*f.tolerances);
  if (f.timeReference) m.eval.time_reference = parse_time_reference(*f.timeReference);
  m.eval.trim_endpoints = f.trimEndpoints;
  m.eval.with_kl = f.kl;
  if (f.grid) m.lambda_grid = realList(*f.grid);

  NoveltyConfig& n = m.novelty;
  if (f.kernelSize) n.kernel_size = *f.kernelSize;
  if (f.noTaper) n.gaussian_taper = false;
  if (f.smoothing) n.smoothing_sigma = *f.smoothing;
  if (f.threshold) n.peak_threshold = *f.threshold;
  if (f.median) n.median_window = *f.median;

  m.seed = f.seed;
  SyntheticCorpusSpec& s = m.synth.corpus;
  s.songs = f.count.value_or(1);
  if (f.sizes) s.section_sizes = intList(*f.sizes);
  if (f.sectionsPerSong) s.sections_per_song = *f.sectionsPerSong;
  if (f.distinctLabels) s.distinct_labels = *f.distinctLabels;
  if (f.noise) s.noise_level = *f.noise;
  if (f.frames) s.frames_per_bar = *f.frames;
  if (f.bins) s.feature_bins = *f.bins;
  if (f.sections) m.synth.sections = intList(*f.sections);
  if (f.labels) m.synth.labels = splitList(*f.labels);
  return m;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Correlation block-matching music segmentation"};
  app.require_subcommand(1);
  Flags f;

  auto* similarity = app.add_subcommand("similarity", "Write <stem>.ssm.csv for each feature CSV");
  auto* segment = app.add_subcommand("segment", "Write <stem>.seg.json for each input");
  auto* eval = app.add_subcommand("eval", "Score segmentations against annotations");
  auto* sweep = app.add_subcommand("sweep", "Grid search over the penalty weight");
  auto* foote = app.add_subcommand("foote", "Checkerboard-novelty baseline");
  auto* synth = app.add_subcommand("synth", "Write synthetic songs with ground truth");

  for (auto* sub : {similarity, segment, eval, sweep, foote}) addSegmenterFlags(sub, f);
  for (auto* sub : {similarity, segment, eval, sweep, foote}) sub->get_option("inputs")->required();

  addEvalFlags(eval, f);
  eval->add_option("--tolerances", f.tolerances, "Subset of 0.5s,3s,0bar,1bar");
  eval->add_option("--time-reference", f.timeReference, "original | aligned");
  eval->add_flag("--trim-endpoints", f.trimEndpoints, "Drop first and last boundary before scoring");
  eval->add_flag("--kl", f.kl, "Add KL divergence of segment-size histograms");

  addEvalFlags(sweep, f);
  sweep->add_option("--grid", f.grid, "Comma-separated lambdas (default 0.01..0.20)");

  foote->add_option("--kernel-size", f.kernelSize, "Even checkerboard size in bars");
  foote->add_flag("--no-taper", f.noTaper, "Plain checkerboard without Gaussian taper");
  foote->add_option("--smoothing", f.smoothing, "Gaussian std of the novelty curve, bars");
  foote->add_option("--threshold", f.threshold, "Peak threshold relative to the maximum");
  foote->add_option("--median", f.median, "Odd median-filter width on the SSM");

  synth->add_option("--seed", f.seed, "Random seed")->required();
  synth->add_option("--out", f.out, "Output directory");
  synth->add_option("--jobs", f.jobs, "Songs generated in parallel")->check(CLI::PositiveNumber);
  synth->add_option("--count", f.count, "Number of songs");
  synth->add_option("--sizes", f.sizes, "Section sizes to draw from, e.g. 4,8,12,16");
  synth->add_option("--sections-per-song", f.sectionsPerSong, "Sections per random song");
  synth->add_option("--distinct-labels", f.distinctLabels, "Archetypes per random song");
  synth->add_option("--sections", f.sections, "Fixed section lengths, e.g. 8,8,16");
  synth->add_option("--labels", f.labels, "Archetype label per fixed section, e.g. A,B,A");
  synth->add_option("--noise", f.noise, "Noise std relative to the archetype norm");
  synth->add_option("--frames", f.frames, "Frames per bar");
  synth->add_option("--bins", f.bins, "Feature bins per frame");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::CallForHelp& e)
  {
    return app.exit(e);
  }
  catch (const CLI::ParseError& e)
  {
    app.exit(e);
    return cli::kExitInvalid;
  }

  Mode mode = Mode::Segment;
  for (auto* sub : app.get_subcommands()) mode = cli::parse_mode(sub->get_name());

  cli::RunManifest manifest;
  try
  {
    manifest = buildManifest(mode, f);
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitInvalid;
  }

  const cli::RunResult result = cli::run(manifest);
  for (const auto& p : result.written) std::cout << p.string() << "\n";
  for (const auto& e : result.errors) std::cerr << "error: " << e << "\n";
  if (result.exit_code == cli::kExitPartial)
    std::cerr << result.errors.size() << " input(s) failed\n";
  return result.exit_code;
}
