// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any criterion fails; skipped ones do not count.

#include "cbm/evaluation.hpp"
#include "cbm/io.hpp"
#include "cbm/penalty.hpp"
#include "cbm/segmenter.hpp"
#include "cbm/similarity.hpp"

#include "../support/oracle.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>

using namespace cbm;

namespace {

constexpr double kDpTolerance = 1e-9;
constexpr double kDpBudgetSeconds = 60.0;
constexpr int    kDpMatrices = 100;

constexpr std::size_t kCorpusSongs = 50;
constexpr double      kPlantedNoise = 0.05;
constexpr double      kPlantedTargetF0 = 0.95;
constexpr double      kPlantedBudgetSeconds = 120.0;
constexpr double      kBandBiasShare = 0.60;

constexpr int    kMetricPairs = 500;
constexpr int    kMetricMaxBoundaries = 12;
constexpr int    kRbfInputs = 100;
constexpr double kRbfStrictGap = 1e-12; // gamma * distance gap below which ties are allowed

constexpr double kDatasetPoints = 0.02;

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point since)
{
  return std::chrono::duration<double>(Clock::now() - since).count();
}

int failures = 0;

void report(const char* name, bool pass, const std::string& detail)
{
  std::printf("%-4s  %-28s %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void skip(const char* name, const std::string& detail)
{
  std::printf("SKIP  %-28s %s\n", name, detail.c_str());
  std::fflush(stdout);
}

void info(const std::string& detail)
{
  std::printf("      %s\n", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void dpOptimality()
{
  const auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> bars(2, 12);

  std::vector<PenaltySpec> penalties{{PenaltyKind::None, 8, 1.0, 0.0},
                                     {PenaltyKind::TargetDeviation, 8, 0.5, 0.0},
                                     {PenaltyKind::TargetDeviation, 8, 1.0, 0.0},
                                     {PenaltyKind::TargetDeviation, 8, 2.0, 0.0},
                                     {PenaltyKind::Modulo8, 8, 1.0, 0.0}};
  const KernelSpec kernels[] = {KernelSpec::full(), KernelSpec::band(1), KernelSpec::band(3), KernelSpec::band(7)};

  std::size_t runs = 0, mismatches = 0, oracleMismatches = 0;
  double      worst = 0.0;
  for (int m = 0; m < kDpMatrices; ++m)
  {
    const int    b = bars(rng);
    const Matrix raw = oracle::randomSymmetric(rng, b);
    const SelfSimilarityMatrix a(raw, SimilarityKind::Cosine);
    for (const auto& kernel : kernels)
      for (PenaltySpec penalty : penalties)
        for (double lambda : {0.0, 0.04, 0.2})
        {
          penalty.lambda = lambda;
          SegmenterConfig cfg;
          cfg.kernel = kernel;
          cfg.penalty = penalty;
          const double dp = cbm_segment(a, cfg).total_score;
          const double bf = brute_force_segment(a, cfg).total_score;

          // Second opinion from the recursive test oracle.
          const double u8 = oracle::maxWindow8(raw, kernel);
          const double ref = oracle::bestSegmentation(b, cfg.max_segment_bars, [&](int s, int e) {
                               return oracle::kernelScore(raw, s, e, kernel) -
                                      u8 * lambda * penalty_value(penalty, e - s);
                             }).score;

          worst = std::max(worst, std::abs(dp - bf));
          if (std::abs(dp - bf) > kDpTolerance) ++mismatches;
          if (std::abs(dp - ref) > kDpTolerance) ++oracleMismatches;
          ++runs;
        }
  }
  const double elapsed = seconds(start);
  report("dp-optimality", mismatches == 0 && oracleMismatches == 0 && elapsed < kDpBudgetSeconds,
         fmt("%zu runs on %d matrices, %zu mismatches vs exhaustive, %zu vs recursive oracle, "
             "max |diff| %.3g (tol %.0e), %.2fs (budget %.0fs)",
             runs, kDpMatrices, mismatches, oracleMismatches, worst, kDpTolerance, elapsed, kDpBudgetSeconds));
}

void workedExample()
{
  const std::map<std::pair<int, int>, double> arcs = {{{1, 2}, 2}, {{1, 3}, 6}, {{1, 4}, 8},
                                                      {{2, 3}, 1}, {{2, 4}, 1}, {{3, 4}, 4}};
  const Segmentation seg = optimal_segmentation(3, 32, [&](int s, int e) { return arcs.at({s, e}); });
  const bool pass = seg.boundaries == std::vector<int>{1, 3, 4} && seg.total_score == 10.0;
  std::string z;
  for (int b : seg.boundaries) z += (z.empty() ? "b" : ",b") + std::to_string(b);
  report("four-bar-worked-example", pass, fmt("Z* = {%s}, score %g (expected {b1,b3,b4}, 10)", z.c_str(), seg.total_score));
}

void modulo8Table()
{
  const std::pair<int, double> table[] = {{8, 0.0}, {4, 0.25}, {12, 0.25}, {16, 0.25},
                                          {2, 0.5}, {6, 0.5},  {7, 1.0},   {9, 1.0}};
  bool        pass = true;
  std::string got;
  for (const auto& [n, expected] : table)
  {
    const double p = modulo8(n);
    pass = pass && p == expected;
    got += fmt("%s%d->%g", got.empty() ? "" : " ", n, p);
  }
  report("modulo8-table", pass, got);
}

struct CorpusScore
{
  double f0 = 0.0;
  double f1 = 0.0;
};

CorpusScore scoreCorpus(const std::vector<SyntheticSong>& songs, const SegmenterConfig& cfg)
{
  std::vector<EvalReport> reports;
  EvalOptions opts;
  opts.tolerances = {Tolerance::Bars0, Tolerance::Bars1};
  for (const auto& song : songs)
  {
    const Segmentation est = cbm_segment(compute_ssm(song.features, cfg.similarity), cfg);
    AnnotationSet ann;
    ann.boundaries_bars = song.truth.boundaries;
    reports.push_back(evaluate(est, ann, std::nullopt, opts));
  }
  const EvalReport mean = mean_report(reports);
  return {mean.per_tolerance.at("0bar").f_measure, mean.per_tolerance.at("1bar").f_measure};
}

void plantedRecovery()
{
  const auto start = Clock::now();
  SyntheticCorpusSpec spec;
  spec.songs = kCorpusSongs;
  spec.section_sizes = {4, 8, 12, 16};
  spec.noise_level = kPlantedNoise;
  spec.seed = 4242;
  const auto songs = synth_corpus(spec);

  SegmenterConfig cfg; // RBF, 7-band, modulo 8, lambda 0.04
  const CorpusScore s = scoreCorpus(songs, cfg);
  const double elapsed = seconds(start);
  report("planted-recovery", s.f0 >= kPlantedTargetF0 && elapsed < kPlantedBudgetSeconds,
         fmt("mean F0bar %.4f (target >= %.2f), F1bar %.4f, %zu songs, noise %.2f, %.2fs (budget %.0fs)", s.f0,
             kPlantedTargetF0, s.f1, songs.size(), kPlantedNoise, elapsed, kPlantedBudgetSeconds));

  // Where the misses come from.
  std::map<int, std::size_t> plantedSplit, plantedTotal;
  for (const auto& song : songs)
  {
    const Segmentation est = cbm_segment(rbf_ssm(song.features), cfg);
    for (std::size_t i = 1; i < song.truth.boundaries.size(); ++i)
    {
      const int lo = song.truth.boundaries[i - 1], hi = song.truth.boundaries[i];
      ++plantedTotal[hi - lo];
      if (std::any_of(est.boundaries.begin(), est.boundaries.end(), [&](int b) { return b > lo && b < hi; }))
        ++plantedSplit[hi - lo];
    }
  }
  std::string split;
  for (const auto& [size, total] : plantedTotal)
    split += fmt("%s%d: %zu/%zu", split.empty() ? "" : ", ", size, plantedSplit[size], total);
  info("planted sections cut by an extra boundary (size: cut/total): " + split);

  SegmenterConfig full = cfg;
  full.kernel = KernelSpec::full();
  const CorpusScore f = scoreCorpus(songs, full);
  info(fmt("diagnostic only: same corpus with the full kernel: F0bar %.4f, F1bar %.4f", f.f0, f.f1));
}

int modalSize(const Segmentation& seg)
{
  int         mode = 0;
  std::size_t best = 0;
  for (const auto& [size, count] : size_histogram(seg))
    if (count > best) // ties keep the smaller size
    {
      best = count;
      mode = size;
    }
  return mode;
}

void bandBias()
{
  SyntheticCorpusSpec spec;
  spec.songs = kCorpusSongs;
  spec.section_sizes = {8};
  spec.noise_level = kPlantedNoise;
  spec.seed = 4243;
  const auto songs = synth_corpus(spec);

  std::vector<SelfSimilarityMatrix> ssms;
  for (const auto& song : songs) ssms.push_back(rbf_ssm(song.features));

  bool        pass = true;
  std::string detail;
  for (int v : {3, 7, 15})
  {
    SegmenterConfig cfg;
    cfg.kernel = KernelSpec::band(v);
    cfg.penalty.kind = PenaltyKind::None;
    std::size_t hits = 0;
    std::map<int, std::size_t> modes;
    for (const auto& a : ssms)
    {
      const int mode = modalSize(cbm_segment(a, cfg));
      ++modes[mode];
      if (mode == v + 1) ++hits;
    }
    const double share = static_cast<double>(hits) / static_cast<double>(ssms.size());
    if (v != 15) pass = pass && share >= kBandBiasShare;
    std::string hist;
    for (const auto& [size, count] : modes) hist += fmt("%s%d:%zu", hist.empty() ? "" : " ", size, count);
    detail += fmt("%sv=%d mode==%d in %.0f%% [%s]%s", detail.empty() ? "" : "; ", v, v + 1, 100 * share,
                  hist.c_str(), v == 15 ? " (reported only)" : "");
  }
  report("band-size-bias", pass, detail + fmt(" (need >= %.0f%% for v=3,7)", 100 * kBandBiasShare));
}

void metricOracle()
{
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<std::size_t> count(1, kMetricMaxBoundaries);
  std::uniform_real_distribution<double>     jitter(0.0, 0.999);
  const double tolerances[] = {0.0, 0.5, 1.0, 2.0, 3.0, 6.0};

  std::size_t matchFail = 0, monoFail = 0, swapFail = 0, boundFail = 0;
  for (int pair = 0; pair < kMetricPairs; ++pair)
  {
    auto est = oracle::randomBoundaries(rng, count(rng), 40);
    auto ann = oracle::randomBoundaries(rng, count(rng), 40);
    if (pair % 2) // off-grid times for half of the pairs
    {
      for (double& t : est) t += jitter(rng);
      for (double& t : ann) t += jitter(rng);
    }
    std::size_t previous = 0;
    for (double tol : tolerances)
    {
      const HitRate h = hit_rate(est, ann, tol);
      const HitRate s = hit_rate(ann, est, tol);
      if (h.matched != oracle::maxMatching(est, ann, tol)) ++matchFail;
      if (h.matched < previous) ++monoFail;
      if (s.precision != h.recall || s.recall != h.precision || s.f_measure != h.f_measure || s.matched != h.matched)
        ++swapFail;
      if (h.matched > std::min(est.size(), ann.size())) ++boundFail;
      previous = h.matched;
    }
  }
  report("metric-oracle", matchFail + monoFail + swapFail + boundFail == 0,
         fmt("%d pairs x %zu tolerances: %zu matching mismatches, %zu monotonicity, %zu swap, %zu bound violations",
             kMetricPairs, std::size(tolerances), matchFail, monoFail, swapFail, boundFail));
}

void rbfInvariants()
{
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<int> bars(2, 30), cols(1, 24);
  std::size_t symFail = 0, diagFail = 0, rangeFail = 0, monoFail = 0, comparisons = 0;
  for (int input = 0; input < kRbfInputs; ++input)
  {
    const int b = bars(rng);
    const Matrix x = oracle::randomFeatures(rng, b, cols(rng), input % 3 == 0 ? 0.0 : -1.0, 1.0);
    const auto a = rbf_ssm(BarwiseTF::fromRows(x));
    const Matrix& v = a.values();
    const double gamma = a.gamma().value_or(0.0);

    std::vector<std::tuple<double, int, int>> dist;
    for (int i = 0; i < b; ++i)
    {
      if (v(i, i) != 1.0) ++diagFail;
      for (int j = 0; j < b; ++j)
      {
        if (v(i, j) != v(j, i)) ++symFail;
        if (!(v(i, j) > 0.0 && v(i, j) <= 1.0)) ++rangeFail;
        if (i < j) dist.emplace_back(oracle::squaredDistance(oracle::normalizedRow(x, i), oracle::normalizedRow(x, j)), i, j);
      }
    }
    std::sort(dist.begin(), dist.end());
    for (std::size_t p = 0; p + 1 < dist.size(); ++p)
    {
      const auto [d1, i1, j1] = dist[p];
      const auto [d2, i2, j2] = dist[p + 1];
      ++comparisons;
      const bool strict = gamma * (d2 - d1) > kRbfStrictGap;
      if (strict ? !(v(i1, j1) > v(i2, j2)) : !(v(i1, j1) >= v(i2, j2))) ++monoFail;
    }
  }
  report("rbf-invariants", symFail + diagFail + rangeFail + monoFail == 0,
         fmt("%d inputs: %zu asymmetric, %zu off-unit diagonal, %zu out of (0,1], %zu monotonicity breaks in %zu "
             "ordered comparisons",
             kRbfInputs, symFail, diagFail, rangeFail, monoFail, comparisons));
}

void datasetReproduction(const char* name, const char* envVar, double targetF0, double targetF1)
{
  const char* dir = std::getenv(envVar);
  if (!dir || !*dir)
  {
    skip(name, fmt("set %s to a directory of <stem>.csv + <stem>.bars.json + <stem>.ann.json to run "
                   "(targets F0bar %.2f%%, F1bar %.2f%% +/- %.0f points)",
                   envVar, 100 * targetF0, 100 * targetF1, 100 * kDatasetPoints));
    return;
  }
  namespace fs = std::filesystem;
  std::vector<EvalReport> reports;
  std::size_t             errors = 0;
  EvalOptions             opts;
  opts.tolerances = {Tolerance::Bars0, Tolerance::Bars1};
  for (const auto& entry : fs::directory_iterator(dir))
  {
    const fs::path p = entry.path();
    if (p.extension() != ".csv" || io::looks_like_ssm(p)) continue;
    try
    {
      const BarwiseTF x = io::load_barwise_tf(p);
      const AnnotationSet ann = io::load_annotation(p.parent_path() / (io::song_stem(p) + ".ann.json"));
      const Segmentation est = cbm_segment(rbf_ssm(x), SegmenterConfig{});
      reports.push_back(evaluate(est, ann, x.barTimes(), opts));
    }
    catch (const std::exception& e)
    {
      ++errors;
      info(fmt("%s: %s", p.string().c_str(), e.what()));
    }
  }
  if (reports.empty())
  {
    report(name, false, fmt("no usable songs in %s", dir));
    return;
  }
  const EvalReport mean = mean_report(reports);
  const double f0 = mean.per_tolerance.at("0bar").f_measure, f1 = mean.per_tolerance.at("1bar").f_measure;
  report(name, std::abs(f0 - targetF0) <= kDatasetPoints && std::abs(f1 - targetF1) <= kDatasetPoints,
         fmt("%zu songs (%zu unreadable): F0bar %.2f%% (target %.2f%%), F1bar %.2f%% (target %.2f%%)",
             reports.size(), errors, 100 * f0, 100 * targetF0, 100 * f1, 100 * targetF1));
}

} // namespace

int main()
{
  dpOptimality();
  workedExample();
  modulo8Table();
  plantedRecovery();
  bandBias();
  metricOracle();
  rbfInvariants();
  datasetReproduction("dataset-rwc-pop", "CBM_RWC_POP_DIR", 0.6517, 0.8102);
  datasetReproduction("dataset-salami-test", "CBM_SALAMI_TEST_DIR", 0.4544, 0.6009);
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
