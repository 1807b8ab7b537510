#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "triage/blur_filter.hpp"
#include "triage/keyframes.hpp"

namespace triage::pipeline {

namespace fs = std::filesystem;

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInvalidInput = 2,
  kDecodeFailure = 3,
  kInconsistent = 4,
  kRefusedOverwrite = 5,
};

struct PipelineConfig {
  int k = blur::kDefaultWindow;
  keyframes::KeyframePolicy keyframes;
  int max_neighbors = 4;
  std::optional<double> max_distance;
  std::optional<double> scale;
  int downscale = 1;
  fs::path frames_dir;
  fs::path reconstruction;
  fs::path output_dir;
  bool lenient = false;

  /// Throws ConfigError when a field is outside its module's range.
  void validate() const;
};

/// Reads a JSON config document; unknown keys are rejected with ConfigError.
PipelineConfig parse_config(std::string_view document, PipelineConfig base = {});
PipelineConfig load_config(const fs::path& path, PipelineConfig base = {});

/// Image files (.png, .jpg, .jpeg, any case) in natural filename order.
std::vector<std::string> list_frames(const fs::path& dir);

/// Writes `content` to a sibling temporary file and renames it into place.
void write_file_atomic(const fs::path& path, std::string_view content);

/// printf("%.17g") style: shortest text that reads back to the same double.
std::string format_double(double v);

// ---------------------------------------------------------------- score CSV

inline constexpr std::string_view kScoreHeader = "frame_index,filename,variance,threshold,keep";

struct ScoreRow {
  int frame_index = 0;
  std::string filename;
  double variance = 0.0;
  double threshold = 0.0;
  bool keep = true;
};

std::string format_score_row(const ScoreRow& row);
/// Throws InvalidSeries describing the offending line.
std::vector<ScoreRow> parse_score_csv(std::string_view document);

// ---------------------------------------------------------------- commands

struct Log {
  std::ostream& info;
  std::ostream& error;
};

struct ScoreOptions {
  fs::path frames_dir;
  fs::path out_csv;
  int k = blur::kDefaultWindow;
  int downscale = 1;
  bool lenient = false;
};
int cmd_score(const ScoreOptions& options, Log log);

struct FilterOptions {
  fs::path scores_csv;
  fs::path frames_dir;
  fs::path out_dir;
  int k = blur::kDefaultWindow;
};
int cmd_filter(const FilterOptions& options, Log log);

struct KeyframeOptions {
  fs::path frames_dir;
  fs::path out_listing;
  keyframes::KeyframePolicy policy;
  std::optional<fs::path> external_listing;
  int downscale = 1;
  bool lenient = false;
};
int cmd_keyframes(const KeyframeOptions& options, Log log);

struct TourOptions {
  fs::path reconstruction;
  fs::path panos_dir;
  fs::path out;
  int max_neighbors = 4;
  std::optional<double> max_distance;
  std::optional<double> scale;
  bool lenient = false;
};
int cmd_tour(const TourOptions& options, Log log);

struct ExportPlyOptions {
  fs::path reconstruction;
  fs::path out;
  bool include_shots = true;
  bool force = false;
  bool lenient = false;
};
int cmd_export_ply(const ExportPlyOptions& options, Log log);

}  // namespace triage::pipeline
