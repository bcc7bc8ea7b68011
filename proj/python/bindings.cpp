#include "cbm/error.hpp"
#include "cbm/evaluation.hpp"
#include "cbm/foote.hpp"
#include "cbm/io.hpp"
#include "cbm/kernels.hpp"
#include "cbm/penalty.hpp"
#include "cbm/representation.hpp"
#include "cbm/segmenter.hpp"
#include "cbm/similarity.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace cbm;

namespace {

// Plain feature arrays are treated as one bar per row.
BarwiseTF asBarwise(const Matrix& x)
{
  return BarwiseTF::fromRows(x);
}

std::string reprBoundaries(const Segmentation& s)
{
  std::string out = "Segmentation(boundaries=[";
  for (std::size_t i = 0; i < s.boundaries.size(); ++i)
    out += (i ? ", " : "") + std::to_string(s.boundaries[i]);
  return out + "], total_score=" + io::format_real(s.total_score) + ")";
}

} // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Bar-level music structure segmentation";

  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<DegenerateInput>(m, "DegenerateInput", PyExc_ValueError);

  py::enum_<SimilarityKind>(m, "SimilarityKind")
    .value("Cosine", SimilarityKind::Cosine)
    .value("Autocorrelation", SimilarityKind::Autocorrelation)
    .value("RBF", SimilarityKind::RBF);

  py::enum_<KernelKind>(m, "KernelKind")
    .value("Full", KernelKind::Full)
    .value("Band", KernelKind::Band);

  py::enum_<ScoreNormalization>(m, "ScoreNormalization")
    .value("SegmentLength", ScoreNormalization::SegmentLength)
    .value("KernelMass", ScoreNormalization::KernelMass);

  py::enum_<PenaltyKind>(m, "PenaltyKind")
    .value("None_", PenaltyKind::None)
    .value("TargetDeviation", PenaltyKind::TargetDeviation)
    .value("Modulo8", PenaltyKind::Modulo8);

  py::enum_<ScoreForm>(m, "ScoreForm")
    .value("Unnormalized", ScoreForm::Unnormalized)
    .value("SongNormalized", ScoreForm::SongNormalized);

  py::enum_<TimeReference>(m, "TimeReference")
    .value("Original", TimeReference::Original)
    .value("Aligned", TimeReference::Aligned);

  // representation

  py::class_<BarwiseTF>(m, "BarwiseTF")
    .def(py::init<Matrix, int, int, std::optional<std::vector<double>>>(), py::arg("data"),
         py::arg("frames_per_bar"), py::arg("feature_bins"), py::arg("bar_times") = py::none())
    .def_static("from_rows", &BarwiseTF::fromRows, py::arg("data"))
    .def_property_readonly("data", [](const BarwiseTF& x) { return Matrix(x.data()); })
    .def_property_readonly("bar_count", &BarwiseTF::barCount)
    .def_property_readonly("frames_per_bar", &BarwiseTF::framesPerBar)
    .def_property_readonly("feature_bins", &BarwiseTF::featureBins)
    .def_property_readonly("bar_times", &BarwiseTF::barTimes)
    .def("__len__", &BarwiseTF::barCount);

  py::class_<Segmentation>(m, "Segmentation")
    .def(py::init([](std::vector<int> b, double score) {
           Segmentation s{std::move(b), score};
           s.validate();
           return s;
         }),
         py::arg("boundaries"), py::arg("total_score") = 0.0)
    .def_readonly("boundaries", &Segmentation::boundaries)
    .def_readonly("total_score", &Segmentation::total_score)
    .def_property_readonly("bar_count", &Segmentation::barCount)
    .def_property_readonly("segment_count", &Segmentation::segmentCount)
    .def("__repr__", &reprBoundaries);

  py::class_<SyntheticSongSpec>(m, "SyntheticSongSpec")
    .def(py::init<>())
    .def_readwrite("section_lengths", &SyntheticSongSpec::section_lengths)
    .def_readwrite("archetypes_per_section", &SyntheticSongSpec::archetypes_per_section)
    .def_readwrite("noise_level", &SyntheticSongSpec::noise_level)
    .def_readwrite("seed", &SyntheticSongSpec::seed)
    .def_readwrite("frames_per_bar", &SyntheticSongSpec::frames_per_bar)
    .def_readwrite("feature_bins", &SyntheticSongSpec::feature_bins)
    .def_readwrite("seconds_per_bar", &SyntheticSongSpec::seconds_per_bar);

  py::class_<SyntheticSong>(m, "SyntheticSong")
    .def_readonly("features", &SyntheticSong::features)
    .def_readonly("truth", &SyntheticSong::truth);

  m.def("synth_block_song", &synth_block_song, py::arg("spec"));
  m.def("synth_block_song",
        [](std::vector<int> sections, std::vector<std::string> labels, double noise, std::uint64_t seed) {
          SyntheticSongSpec spec;
          spec.section_lengths = std::move(sections);
          spec.archetypes_per_section = std::move(labels);
          spec.noise_level = noise;
          spec.seed = seed;
          return synth_block_song(spec);
        },
        py::arg("sections"), py::arg("labels") = std::vector<std::string>{}, py::arg("noise") = 0.0,
        py::arg("seed") = 0);

  // similarity

  py::class_<SelfSimilarityMatrix>(m, "SelfSimilarityMatrix")
    .def(py::init<Matrix, SimilarityKind, std::optional<double>>(), py::arg("values"), py::arg("kind"),
         py::arg("gamma") = py::none())
    .def_property_readonly("values", [](const SelfSimilarityMatrix& a) { return Matrix(a.values()); })
    .def_property_readonly("kind", &SelfSimilarityMatrix::kind)
    .def_property_readonly("gamma", &SelfSimilarityMatrix::gamma)
    .def_property_readonly("bar_count", &SelfSimilarityMatrix::barCount)
    .def("__len__", &SelfSimilarityMatrix::barCount);

  m.def("cosine_ssm", &cosine_ssm, py::arg("x"));
  m.def("cosine_ssm", [](const Matrix& x) { return cosine_ssm(asBarwise(x)); }, py::arg("x"));
  m.def("autocorrelation_ssm", &autocorrelation_ssm, py::arg("x"));
  m.def("autocorrelation_ssm", [](const Matrix& x) { return autocorrelation_ssm(asBarwise(x)); },
        py::arg("x"));
  m.def("rbf_ssm", py::overload_cast<const BarwiseTF&>(&rbf_ssm), py::arg("x"));
  m.def("rbf_ssm", [](const Matrix& x) { return rbf_ssm(asBarwise(x)); }, py::arg("x"));
  m.def("rbf_gamma", &rbf_gamma, py::arg("x"));
  m.def("rbf_gamma", [](const Matrix& x) { return rbf_gamma(asBarwise(x)); }, py::arg("x"));
  m.def("compute_ssm", &compute_ssm, py::arg("x"), py::arg("kind"));
  m.def("compute_ssm", [](const Matrix& x, SimilarityKind k) { return compute_ssm(asBarwise(x), k); },
        py::arg("x"), py::arg("kind"));

  // kernels and penalties

  py::class_<KernelSpec>(m, "KernelSpec")
    .def(py::init<>())
    .def_static("full", &KernelSpec::full)
    .def_static("band", &KernelSpec::band, py::arg("bands"))
    .def_readwrite("kind", &KernelSpec::kind)
    .def_readwrite("bands", &KernelSpec::bands)
    .def("__eq__", &KernelSpec::operator==);

  m.def("kernel_matrix", &kernel_matrix, py::arg("spec"), py::arg("n"));
  m.def("kernel_score",
        py::overload_cast<const SelfSimilarityMatrix&, int, int, const KernelSpec&, ScoreNormalization>(
          &kernel_score),
        py::arg("a"), py::arg("start"), py::arg("end"), py::arg("spec"),
        py::arg("normalization") = ScoreNormalization::SegmentLength);
  m.def("max_window8_score", &max_window8_score, py::arg("a"), py::arg("spec"),
        py::arg("normalization") = ScoreNormalization::SegmentLength);

  py::class_<PenaltySpec>(m, "PenaltySpec")
    .def(py::init<>())
    .def(py::init([](PenaltyKind kind, double lambda, int tau, double alpha) {
           PenaltySpec p{kind, tau, alpha, lambda};
           p.validate();
           return p;
         }),
         py::arg("kind"), py::arg("lambda_") = 0.04, py::arg("tau") = 8, py::arg("alpha") = 1.0)
    .def_readwrite("kind", &PenaltySpec::kind)
    .def_readwrite("tau", &PenaltySpec::tau)
    .def_readwrite("alpha", &PenaltySpec::alpha)
    .def_readwrite("lambda_", &PenaltySpec::lambda);

  m.def("modulo8", &modulo8, py::arg("n"));
  m.def("target_deviation", &target_deviation, py::arg("n"), py::arg("tau"), py::arg("alpha"));
  m.def("penalty_value", &penalty_value, py::arg("spec"), py::arg("n"));

  // segmentation

  py::class_<SegmenterConfig>(m, "SegmenterConfig")
    .def(py::init<>())
    .def_readwrite("similarity", &SegmenterConfig::similarity)
    .def_readwrite("kernel", &SegmenterConfig::kernel)
    .def_readwrite("penalty", &SegmenterConfig::penalty)
    .def_readwrite("max_segment_bars", &SegmenterConfig::max_segment_bars)
    .def_readwrite("score_form", &SegmenterConfig::score_form)
    .def_readwrite("normalization", &SegmenterConfig::normalization)
    .def("validate", &SegmenterConfig::validate)
    .def("to_json", [](const SegmenterConfig& c) { return io::config_to_json(c).dump(); })
    .def_static("from_json",
                [](const std::string& text) { return io::config_from_json(io::json::parse(text)); },
                py::arg("text"));

  m.def("cbm_segment",
        [](const SelfSimilarityMatrix& a, const SegmenterConfig& cfg) { return cbm_segment(a, cfg); },
        py::arg("a"), py::arg("config") = SegmenterConfig{});
  m.def("cbm_segment",
        [](const BarwiseTF& x, const SegmenterConfig& cfg) { return cbm_segment(compute_ssm(x, cfg.similarity), cfg); },
        py::arg("x"), py::arg("config") = SegmenterConfig{});
  m.def("brute_force_segment", &brute_force_segment, py::arg("a"), py::arg("config") = SegmenterConfig{});
  m.def("optimal_segmentation",
        [](int bars, int cap, const SegmentScoreFn& score) { return optimal_segmentation(bars, cap, score); },
        py::arg("bar_count"), py::arg("max_segment_bars"), py::arg("score"));

  // novelty baseline

  py::class_<NoveltyConfig>(m, "NoveltyConfig")
    .def(py::init<>())
    .def_readwrite("kernel_size", &NoveltyConfig::kernel_size)
    .def_readwrite("gaussian_taper", &NoveltyConfig::gaussian_taper)
    .def_readwrite("smoothing_sigma", &NoveltyConfig::smoothing_sigma)
    .def_readwrite("peak_threshold", &NoveltyConfig::peak_threshold)
    .def_readwrite("median_window", &NoveltyConfig::median_window);

  m.def("checkerboard_kernel", &checkerboard_kernel, py::arg("size"), py::arg("taper") = true);
  m.def("novelty_curve",
        py::overload_cast<const SelfSimilarityMatrix&, const NoveltyConfig&>(&novelty_curve), py::arg("a"),
        py::arg("config") = NoveltyConfig{});
  m.def("pick_peaks", &pick_peaks, py::arg("novelty"), py::arg("config") = NoveltyConfig{});
  m.def("foote_segment", &foote_segment, py::arg("a"), py::arg("config") = NoveltyConfig{});

  // evaluation

  py::class_<AnnotationSet>(m, "AnnotationSet")
    .def(py::init([](std::vector<double> seconds, std::optional<std::vector<int>> bars) {
           AnnotationSet a{std::move(seconds), std::move(bars)};
           a.validate();
           return a;
         }),
         py::arg("boundaries_seconds"), py::arg("boundaries_bars") = py::none())
    .def_readonly("boundaries_seconds", &AnnotationSet::boundaries_seconds)
    .def_readonly("boundaries_bars", &AnnotationSet::boundaries_bars);

  py::class_<HitRate>(m, "HitRate")
    .def_readonly("precision", &HitRate::precision)
    .def_readonly("recall", &HitRate::recall)
    .def_readonly("f_measure", &HitRate::f_measure)
    .def_readonly("matched", &HitRate::matched);

  py::class_<EvalOptions>(m, "EvalOptions")
    .def(py::init<>())
    .def_property(
      "tolerances",
      [](const EvalOptions& o) {
        std::vector<std::string> out;
        for (auto t : o.tolerances) out.push_back(to_string(t));
        return out;
      },
      [](EvalOptions& o, const std::vector<std::string>& labels) {
        o.tolerances.clear();
        for (const auto& l : labels) o.tolerances.push_back(parse_tolerance(l));
      })
    .def_readwrite("time_reference", &EvalOptions::time_reference)
    .def_readwrite("trim_endpoints", &EvalOptions::trim_endpoints)
    .def_readwrite("with_kl", &EvalOptions::with_kl);

  py::class_<EvalReport>(m, "EvalReport")
    .def_readonly("per_tolerance", &EvalReport::per_tolerance)
    .def_readonly("size_histogram", &EvalReport::size_histogram)
    .def_readonly("kl_vs_reference", &EvalReport::kl_vs_reference)
    .def("to_json", [](const EvalReport& r) { return io::report_to_json(r).dump(); });

  m.def("hit_rate",
        [](const std::vector<double>& est, const std::vector<double>& ann, double tol) {
          return hit_rate(est, ann, tol);
        },
        py::arg("estimated"), py::arg("reference"), py::arg("tolerance"));
  m.def("barwise_hit_rate",
        [](const std::vector<int>& est, const std::vector<int>& ann, int tol) {
          return barwise_hit_rate(est, ann, tol);
        },
        py::arg("estimated"), py::arg("reference"), py::arg("tolerance_bars"));
  m.def("align_to_downbeats",
        [](const AnnotationSet& ann, const std::vector<double>& barTimes) {
          return align_to_downbeats(ann, barTimes);
        },
        py::arg("annotation"), py::arg("bar_times"));
  m.def("size_histogram", [](const std::vector<int>& b) { return size_histogram(b); }, py::arg("boundaries"));
  m.def("kl_divergence", &kl_divergence, py::arg("p"), py::arg("q"));
  m.def("evaluate", &evaluate, py::arg("estimate"), py::arg("annotation"), py::arg("bar_times") = py::none(),
        py::arg("options") = EvalOptions{});

  // files

  m.def("load_barwise_tf", &io::load_barwise_tf, py::arg("path"));
  m.def("write_barwise_tf", &io::write_barwise_tf, py::arg("path"), py::arg("x"));
  m.def("load_bar_times", &io::load_bar_times, py::arg("path"));
  m.def("load_ssm", &io::load_ssm, py::arg("path"));
  m.def("load_annotation", &io::load_annotation, py::arg("path"));
  m.def("load_segmentation", &io::load_segmentation, py::arg("path"));
}
