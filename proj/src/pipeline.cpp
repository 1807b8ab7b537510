#include "triage/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "triage/error.hpp"
#include "triage/imaging.hpp"
#include "triage/natural_sort.hpp"
#include "triage/sfm.hpp"
#include "triage/tour.hpp"

namespace triage::pipeline {

namespace {

using json = nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

fs::path temp_sibling(const fs::path& path) {
  return path.parent_path() / ("." + path.filename().string() + ".partial");
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

template <typename T>
T get_checked(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

bool parse_bool(std::string_view text, bool& out) {
  if (text == "1" || text == "true") {
    out = true;
    return true;
  }
  if (text == "0" || text == "false") {
    out = false;
    return true;
  }
  return false;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

// ---------------------------------------------------------------- config

void PipelineConfig::validate() const {
  if (k < 0) throw ConfigError("k must be >= 0");
  try {
    keyframes.validate();
  } catch (const InvalidPolicy& e) {
    throw ConfigError(e.what());
  }
  if (max_neighbors < 1) throw ConfigError("max_neighbors must be >= 1");
  if (max_distance && !(*max_distance > 0.0)) throw ConfigError("max_distance must be > 0");
  if (scale && !(*scale > 0.0)) throw ConfigError("scale must be > 0");
  if (downscale < 1) throw ConfigError("downscale must be >= 1");
}

PipelineConfig parse_config(std::string_view document, PipelineConfig config) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "k") {
      config.k = get_checked<int>(value, key);
    } else if (key == "similarity_threshold") {
      config.keyframes.similarity_threshold = get_checked<double>(value, key);
    } else if (key == "min_gap") {
      config.keyframes.min_gap = get_checked<int>(value, key);
    } else if (key == "thumb_width") {
      config.keyframes.thumb_width = get_checked<int>(value, key);
    } else if (key == "thumb_height") {
      config.keyframes.thumb_height = get_checked<int>(value, key);
    } else if (key == "max_neighbors") {
      config.max_neighbors = get_checked<int>(value, key);
    } else if (key == "max_distance") {
      config.max_distance = value.is_null() ? std::nullopt
                                            : std::optional(get_checked<double>(value, key));
    } else if (key == "scale") {
      config.scale = value.is_null() ? std::nullopt : std::optional(get_checked<double>(value, key));
    } else if (key == "downscale") {
      config.downscale = get_checked<int>(value, key);
    } else if (key == "frames_dir") {
      config.frames_dir = get_checked<std::string>(value, key);
    } else if (key == "reconstruction") {
      config.reconstruction = get_checked<std::string>(value, key);
    } else if (key == "output_dir") {
      config.output_dir = get_checked<std::string>(value, key);
    } else if (key == "lenient") {
      config.lenient = get_checked<bool>(value, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const fs::path& path, PipelineConfig base) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, std::move(base));
}

// ---------------------------------------------------------------- files

std::vector<std::string> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = lower(entry.path().extension().string());
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") {
      names.push_back(entry.path().filename().string());
    }
  }
  natural_sort(names);
  return names;
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  ensure_parent(path);
  const fs::path tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string format_double(double v) {
  char buffer[32];
  for (int precision = 9; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof buffer, "%.*g", precision, v);
    if (std::strtod(buffer, nullptr) == v) break;
  }
  return buffer;
}

// ---------------------------------------------------------------- score CSV

std::string format_score_row(const ScoreRow& row) {
  return std::to_string(row.frame_index) + "," + row.filename + "," + format_double(row.variance) +
         "," + format_double(row.threshold) + "," + (row.keep ? "1" : "0") + "\n";
}

std::vector<ScoreRow> parse_score_csv(std::string_view document) {
  std::vector<ScoreRow> rows;
  std::size_t line_number = 0;
  std::size_t start = 0;
  bool header_seen = false;
  while (start < document.size()) {
    auto end = document.find('\n', start);
    if (end == std::string_view::npos) end = document.size();
    std::string_view line = document.substr(start, end - start);
    start = end + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::string where = "score CSV line " + std::to_string(line_number);
    if (!header_seen) {
      if (line != kScoreHeader) throw InvalidSeries(where + ": expected header " +
                                                    std::string(kScoreHeader));
      header_seen = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 5) throw InvalidSeries(where + ": expected 5 fields");
    ScoreRow row;
    const auto [p, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(),
                                         row.frame_index);
    if (ec != std::errc() || p != fields[0].data() + fields[0].size() || row.frame_index < 0) {
      throw InvalidSeries(where + ": bad frame_index");
    }
    row.filename = std::string(fields[1]);
    if (row.filename.empty()) throw InvalidSeries(where + ": empty filename");
    for (auto [text, target] : {std::pair{fields[2], &row.variance},
                                std::pair{fields[3], &row.threshold}}) {
      const std::string copy(text);
      char* parsed_end = nullptr;
      *target = std::strtod(copy.c_str(), &parsed_end);
      if (copy.empty() || parsed_end != copy.c_str() + copy.size() || !std::isfinite(*target)) {
        throw InvalidSeries(where + ": bad number '" + copy + "'");
      }
    }
    if (!parse_bool(fields[4], row.keep)) throw InvalidSeries(where + ": bad keep flag");
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw InvalidSeries("score CSV is empty");
  return rows;
}

// ---------------------------------------------------------------- commands

int cmd_score(const ScoreOptions& options, Log log) {
  std::vector<std::string> names;
  try {
    names = list_frames(options.frames_dir);
  } catch (const IoError& e) {
    log.error << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  if (names.empty()) {
    log.error << "error: no PNG/JPEG frames in " << options.frames_dir.string() << "\n";
    return kInvalidInput;
  }

  ensure_parent(options.out_csv);
  const fs::path tmp = temp_sibling(options.out_csv);
  std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
  if (!out) {
    log.error << "error: cannot write " << tmp.string() << "\n";
    return kFailure;
  }
  out << kScoreHeader << "\n";

  // Only the 2k + 1 most recent variances and their filenames stay resident.
  blur::ThresholdStream stream(options.k);
  std::deque<std::string> pending_names;
  int emitted = 0;
  auto emit = [&](const std::vector<blur::FilterVerdict>& verdicts) {
    for (const auto& v : verdicts) {
      out << format_score_row({v.frame_index, pending_names.front(), v.variance, v.threshold,
                               v.keep});
      pending_names.pop_front();
      ++emitted;
    }
  };

  std::vector<std::string> failures;
  for (const auto& name : names) {
    double score = 0.0;
    try {
      score = imaging::variance_of_laplacian(
          imaging::load_grayscale(options.frames_dir / name, options.downscale));
    } catch (const Error& e) {
      failures.push_back(name);
      log.error << (options.lenient ? "warning: skipping " : "error: cannot decode ") << name
                << " (" << e.what() << ")\n";
      continue;
    }
    if (!failures.empty() && !options.lenient) continue;
    pending_names.push_back(name);
    emit(stream.push(score));
  }
  emit(stream.finish());
  out.close();

  if (!failures.empty() && !options.lenient) {
    fs::remove(tmp);
    log.error << "error: " << failures.size() << " undecodable frame(s)\n";
    return kDecodeFailure;
  }
  if (emitted == 0) {
    fs::remove(tmp);
    log.error << "error: no decodable frames in " << options.frames_dir.string() << "\n";
    return kInvalidInput;
  }
  if (!out) {
    log.error << "error: failed writing " << tmp.string() << "\n";
    return kFailure;
  }
  fs::rename(tmp, options.out_csv);
  log.info << "scored " << emitted << " frame(s), k=" << options.k << " -> "
           << options.out_csv.string() << "\n";
  return kOk;
}

int cmd_filter(const FilterOptions& options, Log log) {
  if (options.k < 0) {
    log.error << "error: k must be >= 0\n";
    return kInvalidInput;
  }
  std::vector<ScoreRow> rows;
  try {
    rows = parse_score_csv(read_file(options.scores_csv));
  } catch (const Error& e) {
    log.error << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  if (rows.empty()) {
    log.error << "error: score CSV has no rows\n";
    return kInvalidInput;
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].frame_index <= rows[i - 1].frame_index) {
      log.error << "error: score CSV frame_index not ascending at row " << i + 1 << "\n";
      return kInvalidInput;
    }
  }

  std::vector<std::string> missing;
  for (const auto& row : rows) {
    if (!fs::is_regular_file(options.frames_dir / row.filename)) missing.push_back(row.filename);
  }
  if (!missing.empty()) {
    for (const auto& name : missing) log.error << "missing frame: " << name << "\n";
    log.error << "error: " << missing.size() << " frame(s) referenced by "
              << options.scores_csv.string() << " are absent from "
              << options.frames_dir.string() << "\n";
    return kInconsistent;
  }

  blur::BlurSeries series;
  series.k = options.k;
  for (const auto& row : rows) series.variances.push_back(row.variance);
  std::vector<blur::FilterVerdict> verdicts;
  try {
    verdicts = blur::classify(blur::compute_thresholds(std::move(series)));
  } catch (const Error& e) {
    log.error << "error: " << e.what() << "\n";
    return kInvalidInput;
  }

  try {
    const fs::path kept_dir = options.out_dir / "kept";
    fs::create_directories(kept_dir);
    std::set<std::string> kept_names;
    std::string discarded;
    std::string report(kScoreHeader);
    report += "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& v = verdicts[i];
      report += format_score_row({rows[i].frame_index, rows[i].filename, v.variance, v.threshold,
                                  v.keep});
      if (v.keep) {
        kept_names.insert(rows[i].filename);
      } else {
        discarded += rows[i].filename + "\n";
      }
    }
    // Stale links from an earlier run; originals stay in frames_dir.
    for (const auto& entry : fs::directory_iterator(kept_dir)) {
      if (entry.is_regular_file() && !kept_names.contains(entry.path().filename().string())) {
        fs::remove(entry.path());
      }
    }
    for (const auto& name : kept_names) {
      const fs::path target = kept_dir / name;
      fs::remove(target);
      std::error_code ec;
      fs::create_hard_link(options.frames_dir / name, target, ec);
      if (ec) fs::copy_file(options.frames_dir / name, target);
    }

    json summary = {{"k", options.k},
                    {"total", rows.size()},
                    {"kept", kept_names.size()},
                    {"discarded", rows.size() - kept_names.size()}};
    write_file_atomic(options.out_dir / "discarded.txt", discarded);
    write_file_atomic(options.out_dir / "verdicts.csv", report);
    write_file_atomic(options.out_dir / "summary.json", summary.dump(2) + "\n");
    log.info << "kept " << kept_names.size() << " of " << rows.size() << " frame(s), k="
             << options.k << "\n";
  } catch (const std::exception& e) {
    log.error << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}

int cmd_keyframes(const KeyframeOptions& options, Log log) {
  std::vector<std::string> names;
  try {
    options.policy.validate();
    names = list_frames(options.frames_dir);
  } catch (const Error& e) {
    log.error << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  if (names.empty()) {
    log.error << "error: no PNG/JPEG frames in " << options.frames_dir.string() << "\n";
    return kInvalidInput;
  }

  std::string listing;
  std::size_t count = 0;
  if (options.external_listing) {
    std::vector<blur::FrameRecord> frames(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
      frames[i].index = static_cast<int>(i);
      frames[i].filename = names[i];
    }
    try {
      std::ifstream in(*options.external_listing);
      if (!in) throw IoError("cannot open " + options.external_listing->string());
      const auto entries = keyframes::parse_keyframe_listing(in);
      const auto result = keyframes::ingest_external_keyframes(entries, frames);
      for (const auto& w : result.warnings) log.error << "warning: " << w << "\n";
      for (const auto& frame : result.selection) listing += frame.filename + "\n";
      count = result.selection.size();
    } catch (const BadListing& e) {
      log.error << "error: " << e.what() << "\n";
      return kInconsistent;
    } catch (const IoError& e) {
      log.error << "error: " << e.what() << "\n";
      return kInvalidInput;
    }
  } else {
    keyframes::KeyframeSelector selector(options.policy);
    std::size_t failures = 0;
    for (std::size_t i = 0; i < names.size(); ++i) {
      try {
        const auto frame = imaging::load_grayscale(options.frames_dir / names[i], options.downscale);
        if (failures == 0 && selector.offer(static_cast<int>(i), frame)) {
          listing += names[i] + "\n";
        }
      } catch (const Error& e) {
        log.error << (options.lenient ? "warning: skipping " : "error: cannot decode ") << names[i]
                  << " (" << e.what() << ")\n";
        if (!options.lenient) ++failures;
      }
    }
    if (failures > 0) return kDecodeFailure;
    count = selector.selected_count();
  }

  try {
    write_file_atomic(options.out_listing, listing);
  } catch (const std::exception& e) {
    log.error << "error: " << e.what() << "\n";
    return kFailure;
  }
  log.info << "selected " << count << " keyframe(s) of " << names.size() << " -> "
           << options.out_listing.string() << "\n";
  return kOk;
}

namespace {

// Parses a reconstruction and reports anything the operator should see.
// Returns nullopt (after logging) when the input is unusable.
std::optional<sfm::Reconstruction> load_model(const fs::path& path, bool lenient, Log log) {
  try {
    auto result = sfm::load_reconstruction(path, {lenient});
    const auto& report = result.report;
    for (std::size_t i = 0; i < report.ignored_reconstructions.size(); ++i) {
      log.error << "warning: ignoring reconstruction " << i + 1 << " with "
                << report.ignored_reconstructions[i] << " shot(s)\n";
    }
    for (const auto& message : report.dropped_shots) {
      log.error << "warning: dropped shot " << message << "\n";
    }
    if (report.unknown_fields > 0) {
      log.info << "ignored " << report.unknown_fields << " unrecognised field(s)\n";
    }
    return std::move(result.model);
  } catch (const Error& e) {
    log.error << "error: " << e.what() << "\n";
    return std::nullopt;
  }
}

}  // namespace

int cmd_tour(const TourOptions& options, Log log) {
  auto model = load_model(options.reconstruction, options.lenient, log);
  if (!model) return kInvalidInput;
  if (model->shots.empty()) {
    log.error << "error: reconstruction has no shots\n";
    return kInvalidInput;
  }

  auto nodes = tour::nodes_from_reconstruction(*model);
  const fs::path out_dir = fs::absolute(options.out).parent_path();
  for (auto& node : nodes) {
    const fs::path image = options.panos_dir / node.id;
    node.image = fs::absolute(image).lexically_normal().lexically_relative(out_dir).generic_string();
    if (!fs::is_regular_file(image)) {
      node.image_missing = true;
      log.error << "warning: panorama " << image.string() << " not found\n";
    }
  }

  tour::GraphParams params;
  params.max_neighbors = options.max_neighbors;
  params.max_distance = options.max_distance;
  params.scale = options.scale;
  try {
    const auto graph = tour::build_graph(std::move(nodes), params);
    for (const auto& w : graph.warnings) log.error << "warning: " << w << "\n";
    write_file_atomic(options.out, tour::emit_tour(graph));
    log.info << "tour: " << graph.nodes.size() << " node(s), " << graph.edges.size()
             << " edge(s) -> " << options.out.string() << "\n";
  } catch (const RangeError& e) {
    log.error << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::exception& e) {
    log.error << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}

int cmd_export_ply(const ExportPlyOptions& options, Log log) {
  if (fs::exists(options.out) && !options.force) {
    log.error << "error: " << options.out.string() << " exists; pass --force to overwrite\n";
    return kRefusedOverwrite;
  }
  auto model = load_model(options.reconstruction, options.lenient, log);
  if (!model) return kInvalidInput;
  try {
    write_file_atomic(options.out, sfm::export_ply(*model, options.include_shots));
  } catch (const std::exception& e) {
    log.error << "error: " << e.what() << "\n";
    return kFailure;
  }
  log.info << "wrote " << model->points.size() << " point(s)"
           << (options.include_shots ? " and " + std::to_string(model->shots.size()) + " shot(s)"
                                     : std::string())
           << " -> " << options.out.string() << "\n";
  return kOk;
}

}  // namespace triage::pipeline
