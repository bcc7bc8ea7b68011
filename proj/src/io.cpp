#include "cbm/io.hpp"

#include "cbm/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cbm {

FormatError::FormatError(Kind kind, const std::string& message, std::optional<std::size_t> row,
                         std::optional<std::size_t> column)
    : std::runtime_error(message), mKind(kind), mRow(row), mColumn(column)
{}

namespace io {

namespace {

std::string_view trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true)
  {
    const auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

// Lines with their 1-based line numbers, trailing '\r' removed.
std::vector<std::pair<std::size_t, std::string_view>> lines(std::string_view text)
{
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t lineNo = 0, pos = 0;
  while (pos <= text.size())
  {
    const auto next = text.find('\n', pos);
    std::string_view line = text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.emplace_back(++lineNo, line);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::optional<double> parseReal(std::string_view cell)
{
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return v;
}

std::optional<long long> parseInt(std::string_view cell)
{
  cell = trim(cell);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) return std::nullopt;
  return v;
}

std::string at(const std::string& source, std::size_t line, std::optional<std::size_t> column = {})
{
  std::string s = source + ":" + std::to_string(line);
  if (column) s += ":" + std::to_string(*column);
  return s;
}

// "# key=value,key=value"
std::vector<std::pair<std::string, std::string>> parseHeader(std::string_view line,
                                                             const std::string& source)
{
  line = trim(line);
  if (line.empty() || line.front() != '#')
    throw FormatError(FormatError::Kind::Malformed,
                      at(source, 1) + ": expected a '# key=value,...' header", 1);
  line.remove_prefix(1);
  std::vector<std::pair<std::string, std::string>> out;
  for (auto item : split(line, ','))
  {
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw FormatError(FormatError::Kind::Malformed,
                        at(source, 1) + ": header entry '" + std::string(item) + "' is not key=value", 1);
    out.emplace_back(std::string(trim(item.substr(0, eq))), std::string(trim(item.substr(eq + 1))));
  }
  return out;
}

// Parses `expectedRows` data rows of `expectedCols` reals following the header.
Matrix parseRealRows(std::string_view text, std::optional<std::size_t> expectedRows,
                     std::optional<std::size_t> expectedCols, const std::string& source)
{
  const auto all = lines(text);
  std::vector<std::pair<std::size_t, std::string_view>> rows;
  for (std::size_t i = 1; i < all.size(); ++i)
    if (!trim(all[i].second).empty()) rows.push_back(all[i]);

  const std::size_t nRows = expectedRows.value_or(rows.size());
  if (rows.size() != nRows)
    throw FormatError(FormatError::Kind::DimensionMismatch,
                      source + ": header declares " + std::to_string(nRows) + " rows, found " +
                          std::to_string(rows.size()) + " data rows",
                      rows.size() < nRows ? rows.size() + 1 : nRows + 1);
  const std::size_t nCols = expectedCols.value_or(nRows);

  Matrix m(static_cast<Eigen::Index>(nRows), static_cast<Eigen::Index>(nCols));
  for (std::size_t r = 0; r < nRows; ++r)
  {
    const auto [lineNo, line] = rows[r];
    const auto cells = split(line, ',');
    if (cells.size() != nCols)
      throw FormatError(FormatError::Kind::DimensionMismatch,
                        at(source, lineNo) + ": row " + std::to_string(r + 1) + " has " +
                            std::to_string(cells.size()) + " values, expected " + std::to_string(nCols),
                        r + 1);
    for (std::size_t c = 0; c < nCols; ++c)
    {
      const auto v = parseReal(cells[c]);
      if (!v)
        throw FormatError(FormatError::Kind::Malformed,
                          at(source, lineNo, c + 1) + ": row " + std::to_string(r + 1) + ", column " +
                              std::to_string(c + 1) + ": '" + std::string(trim(cells[c])) +
                              "' is not a number",
                          r + 1, c + 1);
      if (!std::isfinite(*v))
        throw FormatError(FormatError::Kind::NonFinite,
                          at(source, lineNo, c + 1) + ": row " + std::to_string(r + 1) + ", column " +
                              std::to_string(c + 1) + ": non-finite value '" +
                              std::string(trim(cells[c])) + "'",
                          r + 1, c + 1);
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *v;
    }
  }
  return m;
}

json parseJson(const std::string& text, const std::string& source)
{
  try
  {
    return json::parse(text);
  }
  catch (const json::parse_error& e)
  {
    throw FormatError(FormatError::Kind::Malformed, source + ": invalid JSON: " + e.what());
  }
}

std::vector<double> realArray(const json& j, const char* key, const std::string& source)
{
  if (!j.is_object() || !j.contains(key) || !j[key].is_array())
    throw FormatError(FormatError::Kind::Malformed, source + ": expected an array \"" + key + "\"");
  std::vector<double> out;
  for (std::size_t i = 0; i < j[key].size(); ++i)
  {
    const auto& v = j[key][i];
    if (!v.is_number())
      throw FormatError(FormatError::Kind::Malformed,
                        source + ": " + key + "[" + std::to_string(i) + "] is not a number", i + 1);
    out.push_back(v.get<double>());
    if (!std::isfinite(out.back()))
      throw FormatError(FormatError::Kind::NonFinite,
                        source + ": " + key + "[" + std::to_string(i) + "] is not finite", i + 1);
  }
  return out;
}

template <typename Fn>
auto rethrowAsFormat(const std::string& source, Fn&& fn)
{
  try
  {
    return fn();
  }
  catch (const std::invalid_argument& e)
  {
    throw FormatError(FormatError::Kind::Malformed, source + ": " + e.what());
  }
  catch (const json::exception& e)
  {
    throw FormatError(FormatError::Kind::Malformed, source + ": " + e.what());
  }
}

} // namespace

std::string format_real(double v)
{
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("could not format number");
  return std::string(buf, ptr);
}

std::string read_text(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw FormatError(FormatError::Kind::Missing, path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text)
{
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot write file");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::string song_stem(const fs::path& path)
{
  std::string name = path.filename().string();
  for (const char* suffix : {".csv", ".json", ".ssm", ".seg", ".bars", ".truth", ".eval", ".foote"})
  {
    const std::string s(suffix);
    if (name.size() > s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0)
      name.resize(name.size() - s.size());
  }
  return name;
}

fs::path sidecar_path(const fs::path& csvPath)
{
  return csvPath.parent_path() / (song_stem(csvPath) + ".bars.json");
}

BarwiseTF parse_barwise_tf(const std::string& text, const std::string& source)
{
  const auto all = lines(text);
  std::optional<long long> bars, frames, bins;
  for (const auto& [key, value] : parseHeader(all.front().second, source))
  {
    auto& slot = key == "B" ? bars : key == "T" ? frames : key == "F" ? bins : bars;
    if (key != "B" && key != "T" && key != "F") continue; // provenance entries
    slot = parseInt(value);
    if (!slot || *slot < 1)
      throw FormatError(FormatError::Kind::Malformed,
                        at(source, 1) + ": header " + key + " must be a positive integer", 1);
  }
  if (!bars || !frames || !bins)
    throw FormatError(FormatError::Kind::Malformed, at(source, 1) + ": header must declare B, T and F", 1);

  Matrix data = parseRealRows(text, static_cast<std::size_t>(*bars),
                              static_cast<std::size_t>(*frames * *bins), source);
  return BarwiseTF(std::move(data), static_cast<int>(*frames), static_cast<int>(*bins));
}

BarwiseTF load_barwise_tf(const fs::path& path)
{
  BarwiseTF x = parse_barwise_tf(read_text(path), path.string());
  const fs::path sidecar = sidecar_path(path);
  if (!fs::exists(sidecar)) return x;
  auto times = load_bar_times(sidecar);
  try
  {
    return x.withBarTimes(std::move(times));
  }
  catch (const std::invalid_argument& e)
  {
    throw FormatError(FormatError::Kind::DimensionMismatch, sidecar.string() + ": " + e.what());
  }
}

std::string format_barwise_tf(const BarwiseTF& x)
{
  std::string out = "# B=" + std::to_string(x.barCount()) + ",T=" + std::to_string(x.framesPerBar()) +
                    ",F=" + std::to_string(x.featureBins()) + "\n";
  const Matrix& d = x.data();
  for (Eigen::Index r = 0; r < d.rows(); ++r)
  {
    for (Eigen::Index c = 0; c < d.cols(); ++c)
    {
      if (c) out += ',';
      out += format_real(d(r, c));
    }
    out += '\n';
  }
  return out;
}

void write_barwise_tf(const fs::path& path, const BarwiseTF& x)
{
  write_text(path, format_barwise_tf(x));
  if (x.barTimes()) write_text(sidecar_path(path), format_bar_times(*x.barTimes()));
}

std::vector<double> parse_bar_times(const std::string& text, const std::string& source)
{
  return realArray(parseJson(text, source), "bar_times", source);
}

std::vector<double> load_bar_times(const fs::path& path)
{
  return parse_bar_times(read_text(path), path.string());
}

std::string format_bar_times(const std::vector<double>& barTimes)
{
  return json{{"bar_times", barTimes}}.dump(2) + "\n";
}

SelfSimilarityMatrix parse_ssm(const std::string& text, const std::string& source)
{
  const auto all = lines(text);
  std::optional<SimilarityKind> kind;
  std::optional<double> gamma;
  for (const auto& [key, value] : parseHeader(all.front().second, source))
  {
    if (key == "kind")
      kind = rethrowAsFormat(source, [&] { return parse_similarity_kind(value); });
    else if (key == "gamma" && value != "none")
    {
      gamma = parseReal(value);
      if (!gamma)
        throw FormatError(FormatError::Kind::Malformed, at(source, 1) + ": gamma is not a number", 1);
    }
  }
  if (!kind) throw FormatError(FormatError::Kind::Malformed, at(source, 1) + ": header lacks kind=", 1);

  Matrix values = parseRealRows(text, std::nullopt, std::nullopt, source);
  if (values.rows() == 0)
    throw FormatError(FormatError::Kind::DimensionMismatch, source + ": no rows");
  return rethrowAsFormat(source, [&] { return SelfSimilarityMatrix(std::move(values), *kind, gamma); });
}

SelfSimilarityMatrix load_ssm(const fs::path& path)
{
  return parse_ssm(read_text(path), path.string());
}

std::string format_ssm(const SelfSimilarityMatrix& a)
{
  std::string out = "# kind=" + std::string(to_string(a.kind())) +
                    ",gamma=" + (a.gamma() ? format_real(*a.gamma()) : std::string("none")) + "\n";
  const Matrix& v = a.values();
  for (Eigen::Index r = 0; r < v.rows(); ++r)
  {
    for (Eigen::Index c = 0; c < v.cols(); ++c)
    {
      if (c) out += ',';
      out += format_real(v(r, c));
    }
    out += '\n';
  }
  return out;
}

bool looks_like_ssm(const fs::path& path)
{
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  return trim(first).starts_with("# kind=") || trim(first).starts_with("#kind=");
}

json segmentation_to_json(const Segmentation& seg, const std::optional<std::vector<double>>& barTimes)
{
  json j;
  j["boundaries_bars"] = seg.boundaries;
  if (barTimes)
  {
    std::vector<double> seconds;
    for (int b : seg.boundaries) seconds.push_back(barTimes->at(static_cast<std::size_t>(b) - 1));
    j["boundaries_seconds"] = seconds;
  }
  j["total_score"] = seg.total_score;
  return j;
}

Segmentation segmentation_from_json(const json& j)
{
  Segmentation seg;
  seg.boundaries = j.at("boundaries_bars").get<std::vector<int>>();
  seg.total_score = j.value("total_score", 0.0);
  seg.validate();
  return seg;
}

Segmentation load_segmentation(const fs::path& path)
{
  const json j = parseJson(read_text(path), path.string());
  return rethrowAsFormat(path.string(), [&] { return segmentation_from_json(j); });
}

std::optional<std::vector<double>> load_segmentation_seconds(const fs::path& path)
{
  const json j = parseJson(read_text(path), path.string());
  if (!j.contains("boundaries_seconds")) return std::nullopt;
  return realArray(j, "boundaries_seconds", path.string());
}

json config_to_json(const SegmenterConfig& cfg)
{
  json kernel{{"kind", std::string(to_string(cfg.kernel.kind))}};
  if (cfg.kernel.kind == KernelKind::Band) kernel["bands"] = cfg.kernel.bands;
  return json{
      {"similarity", std::string(to_string(cfg.similarity))},
      {"kernel", kernel},
      {"penalty",
       {{"kind", std::string(to_string(cfg.penalty.kind))},
        {"tau", cfg.penalty.tau},
        {"alpha", cfg.penalty.alpha},
        {"lambda", cfg.penalty.lambda}}},
      {"max_segment_bars", cfg.max_segment_bars},
      {"score_form", std::string(to_string(cfg.score_form))},
      {"normalization", std::string(to_string(cfg.normalization))},
  };
}

SegmenterConfig config_from_json(const json& j, SegmenterConfig cfg)
{
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  if (j.contains("similarity")) cfg.similarity = parse_similarity_kind(j["similarity"].get<std::string>());
  if (j.contains("kernel"))
  {
    const auto& k = j["kernel"];
    if (k.contains("kind")) cfg.kernel.kind = parse_kernel_kind(k["kind"].get<std::string>());
    if (k.contains("bands")) cfg.kernel.bands = k["bands"].get<int>();
  }
  if (j.contains("penalty"))
  {
    const auto& p = j["penalty"];
    if (p.contains("kind")) cfg.penalty.kind = parse_penalty_kind(p["kind"].get<std::string>());
    if (p.contains("tau")) cfg.penalty.tau = p["tau"].get<int>();
    if (p.contains("alpha")) cfg.penalty.alpha = p["alpha"].get<double>();
    if (p.contains("lambda")) cfg.penalty.lambda = p["lambda"].get<double>();
  }
  if (j.contains("max_segment_bars")) cfg.max_segment_bars = j["max_segment_bars"].get<int>();
  if (j.contains("score_form")) cfg.score_form = parse_score_form(j["score_form"].get<std::string>());
  if (j.contains("normalization"))
    cfg.normalization = parse_score_normalization(j["normalization"].get<std::string>());
  cfg.validate();
  return cfg;
}

json novelty_to_json(const NoveltyConfig& cfg)
{
  return json{{"kernel_size", cfg.kernel_size},         {"gaussian_taper", cfg.gaussian_taper},
              {"smoothing_sigma", cfg.smoothing_sigma}, {"peak_threshold", cfg.peak_threshold},
              {"median_window", cfg.median_window}};
}

NoveltyConfig novelty_from_json(const json& j, NoveltyConfig cfg)
{
  if (!j.is_object()) throw std::invalid_argument("novelty config must be a JSON object");
  cfg.kernel_size = j.value("kernel_size", cfg.kernel_size);
  cfg.gaussian_taper = j.value("gaussian_taper", cfg.gaussian_taper);
  cfg.smoothing_sigma = j.value("smoothing_sigma", cfg.smoothing_sigma);
  cfg.peak_threshold = j.value("peak_threshold", cfg.peak_threshold);
  cfg.median_window = j.value("median_window", cfg.median_window);
  cfg.validate();
  return cfg;
}

AnnotationSet load_annotation(const fs::path& path)
{
  const std::string text = read_text(path);
  const std::string source = path.string();
  AnnotationSet ann;

  if (path.extension() == ".json")
  {
    const json j = parseJson(text, source);
    if (j.contains("boundaries_seconds")) ann.boundaries_seconds = realArray(j, "boundaries_seconds", source);
    if (j.contains("boundaries_bars"))
      ann.boundaries_bars = rethrowAsFormat(source, [&] { return j["boundaries_bars"].get<std::vector<int>>(); });
  }
  else
  {
    // start,end[,label] per line; tabs and spaces also separate fields.
    std::vector<double> starts;
    double lastEnd = 0.0;
    for (const auto& [lineNo, raw] : lines(text))
    {
      std::string line(trim(raw));
      if (line.empty() || line.front() == '#') continue;
      for (char& c : line)
        if (c == '\t' || c == ' ') c = ',';
      std::vector<std::string_view> fields;
      for (auto f : split(line, ','))
        if (!trim(f).empty()) fields.push_back(f);
      if (fields.size() < 2)
        throw FormatError(FormatError::Kind::Malformed,
                          at(source, lineNo) + ": expected start and end times", lineNo);
      const auto start = parseReal(fields[0]);
      const auto end = parseReal(fields[1]);
      if (!start || !end)
        throw FormatError(FormatError::Kind::Malformed,
                          at(source, lineNo, start ? 2 : 1) + ": not a number", lineNo, start ? 2 : 1);
      if (!std::isfinite(*start) || !std::isfinite(*end))
        throw FormatError(FormatError::Kind::NonFinite, at(source, lineNo) + ": non-finite time", lineNo);
      if (starts.empty() || *start != starts.back()) starts.push_back(*start);
      lastEnd = *end;
    }
    if (starts.empty()) throw FormatError(FormatError::Kind::Malformed, source + ": no segments");
    if (lastEnd > starts.back()) starts.push_back(lastEnd);
    ann.boundaries_seconds = std::move(starts);
  }
  rethrowAsFormat(source, [&] {
    ann.validate();
    return 0;
  });
  return ann;
}

json annotation_to_json(const AnnotationSet& ann)
{
  json j{{"boundaries_seconds", ann.boundaries_seconds}};
  if (ann.boundaries_bars) j["boundaries_bars"] = *ann.boundaries_bars;
  return j;
}

json report_to_json(const EvalReport& r)
{
  json tol = json::object();
  for (const auto& [label, h] : r.per_tolerance)
    tol[label] = {{"precision", h.precision},
                  {"recall", h.recall},
                  {"f_measure", h.f_measure},
                  {"matched", h.matched}};
  json hist = json::object();
  for (const auto& [size, count] : r.size_histogram) hist[std::to_string(size)] = count;
  json j{{"per_tolerance", tol}, {"size_histogram", hist}};
  if (r.kl_vs_reference) j["kl_vs_reference"] = *r.kl_vs_reference;
  return j;
}

} // namespace io
} // namespace cbm
