#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace triage::sfm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Camera intrinsics entry. Numeric fields (width, height, focal, k1, ...)
/// are kept by name; only projection_type is interpreted.
struct Camera {
  std::string id;
  std::string projection_type;
  std::map<std::string, double> parameters;

  friend bool operator==(const Camera&, const Camera&) = default;
};

/// Localized image. `rotation` is the world-to-camera axis-angle vector and
/// `translation` is expressed in the camera frame (x right, y down, z forward).
struct Shot {
  std::string id;
  std::string camera;
  Vec3 rotation = Vec3::Zero();
  Vec3 translation = Vec3::Zero();

  Mat3 rotation_matrix() const;
  /// Camera centre in world coordinates, -R^T t.
  Vec3 position() const;

  friend bool operator==(const Shot& a, const Shot& b) {
    return a.id == b.id && a.camera == b.camera && a.rotation == b.rotation &&
           a.translation == b.translation;
  }
};

struct SparsePoint {
  std::string id;
  Vec3 position = Vec3::Zero();
  std::array<std::uint8_t, 3> color{};

  friend bool operator==(const SparsePoint& a, const SparsePoint& b) {
    return a.id == b.id && a.position == b.position && a.color == b.color;
  }
};

struct Reconstruction {
  std::map<std::string, Camera> cameras;
  std::map<std::string, Shot> shots;
  std::vector<SparsePoint> points;

  friend bool operator==(const Reconstruction&, const Reconstruction&) = default;
};

struct ParseOptions {
  /// Drop shots that fail validation instead of raising SchemaError.
  bool lenient = false;
};

struct ParseReport {
  std::size_t unknown_fields = 0;
  /// Shot counts of the reconstructions after the first one, which are not loaded.
  std::vector<std::size_t> ignored_reconstructions;
  /// One message per shot dropped in lenient mode.
  std::vector<std::string> dropped_shots;
};

struct ParseResult {
  Reconstruction model;
  ParseReport report;
};

/// Rodrigues' formula. Angles below 1e-12 rad give the identity.
/// Throws InvalidRotation for non-finite input.
Mat3 axis_angle_to_matrix(const Vec3& rotation);

Vec3 shot_position(const Shot& shot);

/// Parses an OpenSfM-style reconstruction.json document and returns the
/// first reconstruction. Accepts NaN/Infinity tokens only to report them as
/// SchemaError at their location.
///
/// Throws ParseError, SchemaError, or NoReconstruction.
ParseResult parse_reconstruction(std::string_view document, const ParseOptions& options = {});

ParseResult load_reconstruction(const std::filesystem::path& path,
                                const ParseOptions& options = {});

/// Emits the model as a one-element reconstruction array that
/// parse_reconstruction reads back to an identical model.
std::string serialize_reconstruction(const Reconstruction& model);

/// ASCII PLY with x, y, z, red, green, blue per vertex. With include_shots,
/// camera centres follow the points as pure green vertices.
std::string export_ply(const Reconstruction& model, bool include_shots);

void write_ply(const Reconstruction& model, bool include_shots, const std::filesystem::path& path);

}  // namespace triage::sfm
