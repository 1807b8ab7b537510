#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "triage/sfm.hpp"

namespace triage::tour {

using sfm::Vec3;

using Rgb = std::array<std::uint8_t, 3>;

struct PanoNode {
  std::string id;
  std::string image;
  Vec3 position = Vec3::Zero();
  Vec3 rotation = Vec3::Zero();  // world-to-camera axis-angle
  bool image_missing = false;
};

struct Hotspot {
  std::string from_id;
  std::string to_id;
  double yaw_deg = 0.0;    // (-180, 180]
  double pitch_deg = 0.0;  // [-90, 90]
  double distance = 0.0;
  Rgb color{};
  int size_px = 0;
};

struct GraphParams {
  int max_neighbors = 4;
  std::optional<double> max_distance;  // unlimited when empty
  /// Metres per reconstruction unit. When set, positions and distances are
  /// scaled and the graph is labelled in metres.
  std::optional<double> scale;
  int min_size = 10;
  int max_size = 30;

  void validate() const;
};

struct TourGraph {
  std::vector<PanoNode> nodes;
  std::vector<Hotspot> edges;
  GraphParams params;
  std::vector<std::string> warnings;  // not serialized

  std::string units() const { return params.scale ? "meters" : "reconstruction"; }
};

struct Bearing {
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
};

/// Direction of `to` as seen in the panorama of `from`, camera axes
/// x right, y down, z forward. Yaw is 0 straight ahead and positive to the
/// right; pitch is positive upwards. Throws DegenerateEdge for coincident
/// positions.
Bearing bearing(const PanoNode& from, const PanoNode& to);

struct HotspotStyle {
  Rgb color{};
  int size_px = 0;
};

/// Red for the nearest (distance == d_min), blue for the farthest, with
/// the marker shrinking linearly from max_size to min_size.
/// Throws RangeError when distance lies outside [d_min, d_max].
HotspotStyle style(double distance, double d_min, double d_max, int min_size = 10,
                   int max_size = 30);

/// One node per shot, ordered by shot id; `image` defaults to the shot id.
std::vector<PanoNode> nodes_from_reconstruction(const sfm::Reconstruction& model);

/// Directed k-nearest-neighbour graph over the given nodes.
/// Throws EmptyModel when there are no nodes.
TourGraph build_graph(std::vector<PanoNode> nodes, const GraphParams& params = {});
TourGraph build_graph(const sfm::Reconstruction& model, const GraphParams& params = {});

/// tour.json document, stable key order, trailing newline.
std::string emit_tour(const TourGraph& graph);

/// Reads a document produced by emit_tour. Throws ParseError or SchemaError.
TourGraph parse_tour(std::string_view document);

void write_tour(const TourGraph& graph, const std::filesystem::path& path);

}  // namespace triage::tour
