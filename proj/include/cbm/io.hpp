#pragma once

// Interchange files: barwise CSV (+ bar-time sidecar), SSM CSV, and the
// JSON documents for segmentations, configs, annotations and reports.

#include "cbm/evaluation.hpp"
#include "cbm/foote.hpp"
#include "cbm/representation.hpp"
#include "cbm/segmenter.hpp"
#include "cbm/similarity.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cbm::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// "song.csv" -> "song", "song.ssm.csv" -> "song".
std::string song_stem(const fs::path& path);

/// "<dir>/<stem>.bars.json" next to a barwise CSV.
fs::path sidecar_path(const fs::path& csvPath);

/// Parses "# B=..,T=..,F=.." then B rows of T*F reals. Picks up the
/// sidecar when it exists. Throws FormatError with the offending location.
BarwiseTF parse_barwise_tf(const std::string& text, const std::string& sourceName = "<memory>");
BarwiseTF load_barwise_tf(const fs::path& path);
std::string format_barwise_tf(const BarwiseTF& x);
/// Writes the CSV and, when bar times are present, its sidecar.
void write_barwise_tf(const fs::path& path, const BarwiseTF& x);

std::vector<double> parse_bar_times(const std::string& text, const std::string& sourceName = "<memory>");
std::vector<double> load_bar_times(const fs::path& path);
std::string format_bar_times(const std::vector<double>& barTimes);

SelfSimilarityMatrix parse_ssm(const std::string& text, const std::string& sourceName = "<memory>");
SelfSimilarityMatrix load_ssm(const fs::path& path);
std::string format_ssm(const SelfSimilarityMatrix& a);
/// True when the file starts with an SSM header ("# kind=").
bool looks_like_ssm(const fs::path& path);

json segmentation_to_json(const Segmentation& seg,
                          const std::optional<std::vector<double>>& barTimes = std::nullopt);
Segmentation segmentation_from_json(const json& j);
Segmentation load_segmentation(const fs::path& path);
/// boundaries_seconds from the file, when present.
std::optional<std::vector<double>> load_segmentation_seconds(const fs::path& path);

json config_to_json(const SegmenterConfig& cfg);
/// Fields present in j override those of base.
SegmenterConfig config_from_json(const json& j, SegmenterConfig base = {});

json novelty_to_json(const NoveltyConfig& cfg);
NoveltyConfig novelty_from_json(const json& j, NoveltyConfig base = {});

/// JSON {"boundaries_seconds": [...]} (optionally "boundaries_bars") or a
/// two-column CSV of segment start/end times.
AnnotationSet load_annotation(const fs::path& path);
json annotation_to_json(const AnnotationSet& ann);

json report_to_json(const EvalReport& r);

std::string read_text(const fs::path& path);
/// Truncates and writes.
void write_text(const fs::path& path, const std::string& text);

/// Shortest round-trip decimal representation.
std::string format_real(double v);

} // namespace cbm::io
