#include "cbm/cli.hpp"

#include "cbm/error.hpp"
#include "cbm/io.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <mutex>
#include <stdexcept>

namespace cbm::cli {

namespace {

using io::json;

struct LoadedSong
{
  std::optional<SelfSimilarityMatrix> ssm;
  std::optional<std::vector<double>>  bar_times;
};

std::optional<std::vector<double>> barTimesFor(const RunManifest& m, std::size_t i)
{
  if (i < m.bar_time_paths.size() && !m.bar_time_paths[i].empty())
    return io::load_bar_times(m.bar_time_paths[i]);
  const fs::path sidecar = io::sidecar_path(m.input_paths[i]);
  if (fs::exists(sidecar)) return io::load_bar_times(sidecar);
  return std::nullopt;
}

// Feature CSV or SSM CSV -> SSM (computed with cfg.similarity) plus bar times.
LoadedSong loadSong(const RunManifest& m, std::size_t i, SimilarityKind similarity)
{
  const fs::path& path = m.input_paths[i];
  LoadedSong song;
  if (io::looks_like_ssm(path))
  {
    song.ssm = io::load_ssm(path);
    song.bar_times = barTimesFor(m, i);
  }
  else
  {
    BarwiseTF x = io::load_barwise_tf(path);
    if (i < m.bar_time_paths.size() && !m.bar_time_paths[i].empty())
      x = x.withBarTimes(io::load_bar_times(m.bar_time_paths[i]));
    song.bar_times = x.barTimes();
    song.ssm = compute_ssm(x, similarity);
  }
  if (song.bar_times && song.bar_times->size() != static_cast<std::size_t>(song.ssm->barCount()) + 1)
    throw FormatError(FormatError::Kind::DimensionMismatch,
                      "bar times hold " + std::to_string(song.bar_times->size()) + " entries, expected " +
                          std::to_string(song.ssm->barCount() + 1));
  return song;
}

std::string dump(const json& j)
{
  return j.dump(2) + "\n";
}

bool isJson(const fs::path& p)
{
  return p.extension() == ".json";
}

class Collector
{
public:
  void wrote(std::size_t slot, fs::path p)
  {
    std::lock_guard lock(mMutex);
    mWritten.emplace_back(slot, std::move(p));
  }
  void failed(std::size_t slot, const fs::path& p, const std::string& message)
  {
    std::lock_guard lock(mMutex);
    mErrors.emplace_back(slot, p.string() + ": " + message);
  }

  // Input order, independent of thread scheduling.
  RunResult finish()
  {
    std::stable_sort(mWritten.begin(), mWritten.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::stable_sort(mErrors.begin(), mErrors.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    RunResult r;
    for (auto& [slot, p] : mWritten) r.written.push_back(std::move(p));
    for (auto& [slot, e] : mErrors) r.errors.push_back(std::move(e));
    r.exit_code = r.errors.empty() ? kExitOk : kExitPartial;
    return r;
  }

private:
  std::mutex                                       mMutex;
  std::vector<std::pair<std::size_t, fs::path>>    mWritten;
  std::vector<std::pair<std::size_t, std::string>> mErrors;
};

template <typename Fn>
void guarded(Collector& out, std::size_t slot, const fs::path& path, Fn&& fn)
{
  try
  {
    fn();
  }
  catch (const std::exception& e)
  {
    out.failed(slot, path, e.what());
  }
}

fs::path outPath(const RunManifest& m, const fs::path& input, const std::string& suffix)
{
  return m.output_dir / (io::song_stem(input) + suffix);
}

void runSimilarity(const RunManifest& m, Collector& out)
{
  detail::parallel_for(m.input_paths.size(), m.jobs, [&](std::size_t i) {
    const fs::path& in = m.input_paths[i];
    guarded(out, i, in, [&] {
      if (io::looks_like_ssm(in)) throw std::invalid_argument("expected a barwise feature CSV, got an SSM");
      const BarwiseTF x = io::load_barwise_tf(in);
      const fs::path p = outPath(m, in, ".ssm.csv");
      io::write_text(p, io::format_ssm(compute_ssm(x, m.config.similarity)));
      out.wrote(i, p);
      if (x.barTimes())
      {
        const fs::path sidecar = m.output_dir / (io::song_stem(in) + ".bars.json");
        if (fs::weakly_canonical(sidecar) != fs::weakly_canonical(io::sidecar_path(in)))
        {
          io::write_text(sidecar, io::format_bar_times(*x.barTimes()));
          out.wrote(i, sidecar);
        }
      }
    });
  });
}

void runSegment(const RunManifest& m, Collector& out)
{
  detail::parallel_for(m.input_paths.size(), m.jobs, [&](std::size_t i) {
    const fs::path& in = m.input_paths[i];
    guarded(out, i, in, [&] {
      const LoadedSong song = loadSong(m, i, m.config.similarity);
      const Segmentation seg = cbm_segment(*song.ssm, m.config);
      const fs::path p = outPath(m, in, ".seg.json");
      io::write_text(p, dump(io::segmentation_to_json(seg, song.bar_times)));
      out.wrote(i, p);
    });
  });
}

void runFoote(const RunManifest& m, Collector& out)
{
  detail::parallel_for(m.input_paths.size(), m.jobs, [&](std::size_t i) {
    const fs::path& in = m.input_paths[i];
    guarded(out, i, in, [&] {
      const LoadedSong song = loadSong(m, i, m.config.similarity);
      const Vector novelty = novelty_curve(*song.ssm, m.novelty);
      const Segmentation seg = pick_peaks(novelty, m.novelty);
      json j = io::segmentation_to_json(seg, song.bar_times);
      j["novelty"] = std::vector<double>(novelty.begin(), novelty.end());
      const fs::path p = outPath(m, in, ".foote.json");
      io::write_text(p, dump(j));
      out.wrote(i, p);
    });
  });
}

void runEval(const RunManifest& m, Collector& out)
{
  const std::size_t n = m.input_paths.size();
  std::vector<std::optional<EvalReport>> reports(n);
  detail::parallel_for(n, m.jobs, [&](std::size_t i) {
    const fs::path& in = m.input_paths[i];
    guarded(out, i, in, [&] {
      Segmentation                       est;
      std::optional<std::vector<double>> barTimes;
      if (isJson(in))
      {
        est = io::load_segmentation(in);
        barTimes = barTimesFor(m, i);
      }
      else
      {
        LoadedSong song = loadSong(m, i, m.config.similarity);
        est = cbm_segment(*song.ssm, m.config);
        barTimes = std::move(song.bar_times);
      }

      const AnnotationSet ann = io::load_annotation(m.annotation_paths[i]);
      const bool needTimes =
          std::any_of(m.eval.tolerances.begin(), m.eval.tolerances.end(), is_time_tolerance) ||
          !ann.boundaries_bars;
      if (needTimes && !barTimes)
      {
        const fs::path expected = i < m.bar_time_paths.size() && !m.bar_time_paths[i].empty()
                                      ? m.bar_time_paths[i]
                                      : io::sidecar_path(in);
        throw FormatError(FormatError::Kind::Missing,
                          "bar times are required here but " + expected.string() + " was not found");
      }
      if (barTimes && barTimes->size() != static_cast<std::size_t>(est.barCount()) + 1)
        throw FormatError(FormatError::Kind::DimensionMismatch,
                          "bar times hold " + std::to_string(barTimes->size()) +
                              " entries but the estimate spans " + std::to_string(est.barCount()) + " bars");

      reports[i] = evaluate(est, ann, barTimes, m.eval);
      const fs::path p = outPath(m, in, ".eval.json");
      io::write_text(p, dump(io::report_to_json(*reports[i])));
      out.wrote(i, p);
    });
  });

  std::vector<EvalReport> ok;
  for (auto& r : reports)
    if (r) ok.push_back(*r);
  if (ok.empty()) return;
  json mean = io::report_to_json(mean_report(ok));
  mean["songs"] = ok.size();
  const fs::path p = m.output_dir / "corpus.eval.json";
  io::write_text(p, dump(mean));
  out.wrote(n, p);
}

void runSweep(const RunManifest& m, Collector& out)
{
  const std::size_t n = m.input_paths.size();
  std::vector<std::optional<CorpusSong>> loaded(n);
  detail::parallel_for(n, m.jobs, [&](std::size_t i) {
    const fs::path& in = m.input_paths[i];
    guarded(out, i, in, [&] {
      LoadedSong song = loadSong(m, i, m.config.similarity);
      AnnotationSet ann = io::load_annotation(m.annotation_paths[i]);
      if (!song.bar_times)
        throw FormatError(FormatError::Kind::Missing,
                          "bar times are required for a sweep but " + io::sidecar_path(in).string() +
                              " was not found");
      loaded[i] = CorpusSong{std::move(*song.ssm), std::move(ann), std::move(*song.bar_times)};
    });
  });

  std::vector<CorpusSong> corpus;
  for (auto& s : loaded)
    if (s) corpus.push_back(std::move(*s));
  if (corpus.empty())
  {
    out.failed(n, m.output_dir, "no usable songs for the sweep");
    return;
  }

  const SweepResult result = lambda_sweep(corpus, m.config, m.lambda_grid, m.jobs);

  std::string table = "lambda,mean_f0bar\n";
  json points = json::array();
  for (const auto& pt : result.points)
  {
    table += io::format_real(pt.lambda) + "," + io::format_real(pt.mean_f0bar) + "\n";
    points.push_back({{"lambda", pt.lambda}, {"mean_f0bar", pt.mean_f0bar}, {"report", io::report_to_json(pt.report)}});
  }
  const json doc{{"best_lambda", result.best_lambda},
                 {"songs", corpus.size()},
                 {"config", io::config_to_json(m.config)},
                 {"points", points}};
  const fs::path csv = m.output_dir / "sweep.csv";
  const fs::path js = m.output_dir / "sweep.json";
  io::write_text(csv, table);
  io::write_text(js, dump(doc));
  out.wrote(n, csv);
  out.wrote(n, js);
}

void runSynth(const RunManifest& m, Collector& out)
{
  SyntheticCorpusSpec corpus = m.synth.corpus;
  corpus.seed = *m.seed;
  auto specs = synth_corpus_specs(corpus);

  const int digits = std::max<int>(3, static_cast<int>(std::to_string(specs.size()).size()));
  detail::parallel_for(specs.size(), m.jobs, [&](std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof name, "synth_%0*zu", digits, i + 1);
    const fs::path csv = m.output_dir / (std::string(name) + ".csv");
    guarded(out, i, csv, [&] {
      SyntheticSongSpec spec = specs[i];
      if (!m.synth.sections.empty())
      {
        spec.section_lengths = m.synth.sections;
        spec.archetypes_per_section = m.synth.labels;
      }
      const SyntheticSong song = synth_block_song(spec);
      io::write_barwise_tf(csv, song.features);

      AnnotationSet truth;
      truth.boundaries_bars = song.truth.boundaries;
      for (int b : song.truth.boundaries)
        truth.boundaries_seconds.push_back((*song.features.barTimes())[static_cast<std::size_t>(b) - 1]);
      json j = io::annotation_to_json(truth);
      j["section_labels"] = spec.archetypes_per_section;
      const fs::path truthPath = m.output_dir / (std::string(name) + ".truth.json");
      io::write_text(truthPath, dump(j));

      out.wrote(i, csv);
      out.wrote(i, io::sidecar_path(csv));
      out.wrote(i, truthPath);
    });
  });
}

} // namespace

std::string_view to_string(Mode m)
{
  switch (m)
  {
  case Mode::Similarity: return "similarity";
  case Mode::Segment: return "segment";
  case Mode::Eval: return "eval";
  case Mode::Sweep: return "sweep";
  case Mode::Foote: return "foote";
  case Mode::Synth: return "synth";
  }
  return "?";
}

Mode parse_mode(std::string_view name)
{
  for (Mode m : {Mode::Similarity, Mode::Segment, Mode::Eval, Mode::Sweep, Mode::Foote, Mode::Synth})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

void RunManifest::validate() const
{
  config.validate();
  novelty.validate();
  if (jobs < 1) throw std::invalid_argument("--jobs must be at least 1");

  if (mode == Mode::Synth)
  {
    if (!seed) throw std::invalid_argument("synth requires --seed");
    if (!input_paths.empty()) throw std::invalid_argument("synth takes no input files");
    if (!synth.labels.empty() && synth.labels.size() != synth.sections.size())
      throw std::invalid_argument("--labels needs one label per --sections entry");
    return;
  }

  if (input_paths.empty()) throw std::invalid_argument(std::string(to_string(mode)) + " needs input files");
  if (mode == Mode::Eval || mode == Mode::Sweep)
  {
    if (annotation_paths.size() != input_paths.size())
      throw std::invalid_argument(std::string(to_string(mode)) + " needs one annotation per input (" +
                                  std::to_string(input_paths.size()) + " inputs, " +
                                  std::to_string(annotation_paths.size()) + " annotations)");
  }
  if (!bar_time_paths.empty() && bar_time_paths.size() != input_paths.size())
    throw std::invalid_argument("--bars needs one file per input");
  if (mode == Mode::Sweep && lambda_grid.empty()) throw std::invalid_argument("empty lambda grid");
  if (mode == Mode::Eval && eval.tolerances.empty()) throw std::invalid_argument("no tolerances selected");
}

RunResult run(const RunManifest& manifest)
{
  try
  {
    manifest.validate();
    fs::create_directories(manifest.output_dir);
  }
  catch (const std::exception& e)
  {
    RunResult r;
    r.exit_code = kExitInvalid;
    r.errors.push_back(e.what());
    return r;
  }

  Collector out;
  switch (manifest.mode)
  {
  case Mode::Similarity: runSimilarity(manifest, out); break;
  case Mode::Segment: runSegment(manifest, out); break;
  case Mode::Eval: runEval(manifest, out); break;
  case Mode::Sweep: runSweep(manifest, out); break;
  case Mode::Foote: runFoote(manifest, out); break;
  case Mode::Synth: runSynth(manifest, out); break;
  }
  return out.finish();
}

} // namespace cbm::cli
