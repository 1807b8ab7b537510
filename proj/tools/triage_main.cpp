// triage: post-flight panorama triage pipeline.
//
//   triage score      --frames DIR --out scores.csv
//   triage filter     --scores scores.csv --frames DIR --out DIR
//   triage keyframes  --frames DIR --out keyframes.txt [--listing slam.txt]
//   triage tour       --reconstruction reconstruction.json --panos DIR --out tour.json
//   triage export-ply --reconstruction reconstruction.json --out cloud.ply
//
// A JSON config (--config or $TRIAGE_CONFIG) supplies defaults; explicit
// flags win.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "triage/error.hpp"
#include "triage/pipeline.hpp"

namespace {

namespace tp = triage::pipeline;

template <typename T>
T pick(const CLI::Option* flag, const T& flag_value, const T& config_value) {
  return flag->count() > 0 ? flag_value : config_value;
}

std::optional<double> pick_optional(const CLI::Option* flag, double flag_value,
                                    const std::optional<double>& config_value) {
  return flag->count() > 0 ? std::optional(flag_value) : config_value;
}

}  // namespace

int main(int argc, char** argv) {
  const tp::PipelineConfig defaults;

  CLI::App app{"Post-flight triage of 360-degree reconnaissance frames into a panorama tour"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (default: $TRIAGE_CONFIG)");

  // score
  auto* score = app.add_subcommand("score", "Score frame sharpness (variance of Laplacian)");
  std::string score_frames, score_out = "scores.csv";
  int score_k = defaults.k, score_downscale = defaults.downscale;
  bool score_lenient = false;
  auto* score_frames_opt = score->add_option("--frames", score_frames, "Frames directory");
  score->add_option("--out", score_out, "Score CSV to write")->capture_default_str();
  auto* score_k_opt =
      score->add_option("--k", score_k, "Threshold window half-width")->capture_default_str();
  auto* score_down_opt = score->add_option("--downscale", score_downscale,
                                           "Integer downscale factor before scoring")
                             ->capture_default_str();
  auto* score_len_opt = score->add_flag("--lenient", score_lenient, "Skip undecodable frames");

  // filter
  auto* filter = app.add_subcommand("filter", "Apply the dynamic blur threshold to a score CSV");
  std::string filter_scores, filter_frames, filter_out;
  int filter_k = defaults.k;
  filter->add_option("--scores", filter_scores, "Score CSV from `triage score`")->required();
  auto* filter_frames_opt = filter->add_option("--frames", filter_frames, "Frames directory");
  auto* filter_out_opt = filter->add_option("--out", filter_out, "Output directory");
  auto* filter_k_opt =
      filter->add_option("--k", filter_k, "Threshold window half-width")->capture_default_str();

  // keyframes
  auto* kf = app.add_subcommand("keyframes", "Reduce frames to representative keyframes");
  std::string kf_frames, kf_out = "keyframes.txt", kf_listing;
  double kf_threshold = defaults.keyframes.similarity_threshold;
  int kf_gap = defaults.keyframes.min_gap;
  int kf_tw = defaults.keyframes.thumb_width, kf_th = defaults.keyframes.thumb_height;
  int kf_downscale = defaults.downscale;
  bool kf_lenient = false;
  auto* kf_frames_opt = kf->add_option("--frames", kf_frames, "Frames directory");
  kf->add_option("--out", kf_out, "Keyframe listing to write")->capture_default_str();
  kf->add_option("--listing", kf_listing, "External SLAM keyframe listing to use instead");
  auto* kf_threshold_opt =
      kf->add_option("--similarity-threshold", kf_threshold,
                     "Mean absolute thumbnail difference needed for a new keyframe")
          ->capture_default_str();
  auto* kf_gap_opt =
      kf->add_option("--min-gap", kf_gap, "Minimum frames between keyframes")->capture_default_str();
  auto* kf_tw_opt = kf->add_option("--thumb-width", kf_tw)->capture_default_str();
  auto* kf_th_opt = kf->add_option("--thumb-height", kf_th)->capture_default_str();
  auto* kf_down_opt = kf->add_option("--downscale", kf_downscale)->capture_default_str();
  auto* kf_len_opt = kf->add_flag("--lenient", kf_lenient, "Skip undecodable frames");

  // tour
  auto* tour = app.add_subcommand("tour", "Generate tour.json for the panorama viewer");
  std::string tour_rec, tour_panos = ".", tour_out = "tour.json";
  int tour_k = defaults.max_neighbors;
  double tour_max_distance = 0.0, tour_scale = 1.0;
  bool tour_lenient = false;
  auto* tour_rec_opt = tour->add_option("--reconstruction", tour_rec, "reconstruction.json");
  tour->add_option("--panos", tour_panos, "Panorama image directory")->capture_default_str();
  tour->add_option("--out", tour_out, "tour.json to write")->capture_default_str();
  auto* tour_k_opt = tour->add_option("--max-neighbors", tour_k, "Hotspots per panorama")
                         ->capture_default_str();
  auto* tour_dist_opt = tour->add_option("--max-distance", tour_max_distance,
                                         "Distance cap for hotspots (default: unlimited)");
  auto* tour_scale_opt = tour->add_option("--scale", tour_scale,
                                          "Metres per reconstruction unit (default: unscaled)");
  auto* tour_len_opt = tour->add_flag("--lenient", tour_lenient, "Drop invalid shots");

  // export-ply
  auto* ply = app.add_subcommand("export-ply", "Export sparse points and cameras as ASCII PLY");
  std::string ply_rec, ply_out = "cloud.ply";
  bool ply_no_shots = false, ply_force = false, ply_lenient = false;
  auto* ply_rec_opt = ply->add_option("--reconstruction", ply_rec, "reconstruction.json");
  ply->add_option("--out", ply_out, "PLY file to write")->capture_default_str();
  ply->add_flag("--no-shots", ply_no_shots, "Omit camera positions");
  ply->add_flag("--force", ply_force, "Overwrite an existing output file");
  auto* ply_len_opt = ply->add_flag("--lenient", ply_lenient, "Drop invalid shots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tp::kInvalidInput;
  }

  tp::PipelineConfig config;
  try {
    if (config_path.empty()) {
      if (const char* env = std::getenv("TRIAGE_CONFIG"); env && *env) config_path = env;
    }
    if (!config_path.empty()) config = tp::load_config(config_path);
  } catch (const triage::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tp::kInvalidInput;
  }

  const tp::Log log{std::cout, std::cerr};
  auto require = [](const std::filesystem::path& p, const char* what) {
    if (p.empty()) {
      std::cerr << "error: " << what << " not given on the command line or in the config\n";
      return false;
    }
    return true;
  };

  if (score->parsed()) {
    tp::ScoreOptions o;
    o.frames_dir = pick(score_frames_opt, std::filesystem::path(score_frames), config.frames_dir);
    o.out_csv = score_out;
    o.k = pick(score_k_opt, score_k, config.k);
    o.downscale = pick(score_down_opt, score_downscale, config.downscale);
    o.lenient = pick(score_len_opt, score_lenient, config.lenient);
    if (!require(o.frames_dir, "--frames")) return tp::kInvalidInput;
    if (o.k < 0 || o.downscale < 1) {
      std::cerr << "error: need k >= 0 and downscale >= 1\n";
      return tp::kInvalidInput;
    }
    return tp::cmd_score(o, log);
  }
  if (filter->parsed()) {
    tp::FilterOptions o;
    o.scores_csv = filter_scores;
    o.frames_dir = pick(filter_frames_opt, std::filesystem::path(filter_frames), config.frames_dir);
    o.out_dir = pick(filter_out_opt, std::filesystem::path(filter_out), config.output_dir);
    o.k = pick(filter_k_opt, filter_k, config.k);
    if (!require(o.frames_dir, "--frames") || !require(o.out_dir, "--out")) {
      return tp::kInvalidInput;
    }
    return tp::cmd_filter(o, log);
  }
  if (kf->parsed()) {
    tp::KeyframeOptions o;
    o.frames_dir = pick(kf_frames_opt, std::filesystem::path(kf_frames), config.frames_dir);
    o.out_listing = kf_out;
    o.policy.similarity_threshold =
        pick(kf_threshold_opt, kf_threshold, config.keyframes.similarity_threshold);
    o.policy.min_gap = pick(kf_gap_opt, kf_gap, config.keyframes.min_gap);
    o.policy.thumb_width = pick(kf_tw_opt, kf_tw, config.keyframes.thumb_width);
    o.policy.thumb_height = pick(kf_th_opt, kf_th, config.keyframes.thumb_height);
    o.downscale = pick(kf_down_opt, kf_downscale, config.downscale);
    o.lenient = pick(kf_len_opt, kf_lenient, config.lenient);
    if (!kf_listing.empty()) o.external_listing = kf_listing;
    if (!require(o.frames_dir, "--frames")) return tp::kInvalidInput;
    return tp::cmd_keyframes(o, log);
  }
  if (tour->parsed()) {
    tp::TourOptions o;
    o.reconstruction = pick(tour_rec_opt, std::filesystem::path(tour_rec), config.reconstruction);
    o.panos_dir = tour_panos;
    o.out = tour_out;
    o.max_neighbors = pick(tour_k_opt, tour_k, config.max_neighbors);
    o.max_distance = pick_optional(tour_dist_opt, tour_max_distance, config.max_distance);
    o.scale = pick_optional(tour_scale_opt, tour_scale, config.scale);
    o.lenient = pick(tour_len_opt, tour_lenient, config.lenient);
    if (!require(o.reconstruction, "--reconstruction")) return tp::kInvalidInput;
    return tp::cmd_tour(o, log);
  }
  if (ply->parsed()) {
    tp::ExportPlyOptions o;
    o.reconstruction = pick(ply_rec_opt, std::filesystem::path(ply_rec), config.reconstruction);
    o.out = ply_out;
    o.include_shots = !ply_no_shots;
    o.force = ply_force;
    o.lenient = pick(ply_len_opt, ply_lenient, config.lenient);
    if (!require(o.reconstruction, "--reconstruction")) return tp::kInvalidInput;
    return tp::cmd_export_ply(o, log);
  }
  return tp::kInvalidInput;
}
