#include "triage/sfm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include <Eigen/Dense>

#include "json.hpp"

#include "triage/error.hpp"

namespace triage::sfm {

namespace {

using json = nlohmann::ordered_json;

// Bare NaN / Infinity tokens (as emitted by Python's json module) and
// overflowing literals are rewritten to this string so the schema walk can
// report them with a path instead of failing inside the tokenizer.
constexpr std::string_view kNonFinite = "\\u0000non-finite";
constexpr std::string_view kNonFiniteDecoded{"\0non-finite", 12};

struct Sanitized {
  std::string text;
  // (offset in `text` just past a rewrite, bytes added up to that point)
  std::vector<std::pair<std::size_t, long long>> shifts;

  std::size_t original_offset(std::size_t offset) const {
    long long delta = 0;
    for (const auto& [at, total] : shifts) {
      if (at > offset) break;
      delta = total;
    }
    return static_cast<std::size_t>(std::max(0LL, static_cast<long long>(offset) - delta));
  }
};

bool is_number_char(char c) {
  return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.' || c == 'e' || c == 'E';
}

Sanitized sanitize(std::string_view in) {
  Sanitized out;
  out.text.reserve(in.size());
  long long added = 0;
  auto replace = [&](std::size_t consumed) {
    const std::string quoted = "\"" + std::string(kNonFinite) + "\"";
    out.text += quoted;
    added += static_cast<long long>(quoted.size()) - static_cast<long long>(consumed);
    out.shifts.emplace_back(out.text.size(), added);
  };

  bool in_string = false;
  std::size_t i = 0;
  while (i < in.size()) {
    const char c = in[i];
    if (in_string) {
      out.text += c;
      if (c == '\\' && i + 1 < in.size()) {
        out.text += in[i + 1];
        i += 2;
        continue;
      }
      if (c == '"') in_string = false;
      ++i;
      continue;
    }
    if (c == '"') {
      in_string = true;
      out.text += c;
      ++i;
      continue;
    }
    const std::string_view rest = in.substr(i);
    bool matched = false;
    for (std::string_view token : {"-Infinity", "Infinity", "NaN"}) {
      if (rest.starts_with(token)) {
        replace(token.size());
        i += token.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (c == '-' || (c >= '0' && c <= '9')) {
      std::size_t end = i;
      while (end < in.size() && is_number_char(in[end])) ++end;
      const std::string literal(in.substr(i, end - i));
      char* parsed_end = nullptr;
      const double value = std::strtod(literal.c_str(), &parsed_end);
      if (parsed_end == literal.c_str() + literal.size() && std::isinf(value)) {
        replace(literal.size());
      } else {
        out.text += literal;
      }
      i = end;
      continue;
    }
    out.text += c;
    ++i;
  }
  return out;
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "/" + key;
}

double number_at(const json& value, const std::string& path) {
  if (value.is_string() && value.get_ref<const std::string&>() == kNonFiniteDecoded) {
    throw SchemaError(path, "non-finite number");
  }
  if (!value.is_number()) throw SchemaError(path, "expected a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "non-finite number");
  return v;
}

Vec3 vec3_at(const json& value, const std::string& path) {
  if (!value.is_array() || value.size() != 3) {
    throw SchemaError(path, "expected an array of 3 numbers");
  }
  return {number_at(value[0], join(path, "0")), number_at(value[1], join(path, "1")),
          number_at(value[2], join(path, "2"))};
}

const json& member(const json& object, const char* key, const std::string& path) {
  auto it = object.find(key);
  if (it == object.end()) throw SchemaError(join(path, key), "missing required field");
  return *it;
}

const json& object_at(const json& value, const std::string& path) {
  if (!value.is_object()) throw SchemaError(path.empty() ? "/" : path, "expected an object");
  return value;
}

Camera parse_camera(const std::string& id, const json& value, const std::string& path,
                    std::size_t& unknown) {
  object_at(value, path);
  Camera camera;
  camera.id = id;
  const json& type = member(value, "projection_type", path);
  if (!type.is_string()) throw SchemaError(join(path, "projection_type"), "expected a string");
  camera.projection_type = type.get<std::string>();
  for (const auto& [key, field] : value.items()) {
    if (key == "projection_type") continue;
    if (field.is_number()) {
      camera.parameters[key] = number_at(field, join(path, key));
    } else if (field.is_string() && field.get_ref<const std::string&>() == kNonFiniteDecoded) {
      throw SchemaError(join(path, key), "non-finite number");
    } else {
      ++unknown;
    }
  }
  return camera;
}

Shot parse_shot(const std::string& id, const json& value, const std::string& path,
                const std::map<std::string, Camera>& cameras, std::size_t& unknown) {
  object_at(value, path);
  Shot shot;
  shot.id = id;
  shot.rotation = vec3_at(member(value, "rotation", path), join(path, "rotation"));
  shot.translation = vec3_at(member(value, "translation", path), join(path, "translation"));
  const json& camera = member(value, "camera", path);
  if (!camera.is_string()) throw SchemaError(join(path, "camera"), "expected a string");
  shot.camera = camera.get<std::string>();
  if (!cameras.contains(shot.camera)) {
    throw SchemaError(join(path, "camera"), "references unknown camera '" + shot.camera + "'");
  }
  for (const auto& [key, field] : value.items()) {
    if (key != "rotation" && key != "translation" && key != "camera") ++unknown;
  }

  const Mat3 r = shot.rotation_matrix();
  const double orthonormality = (r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (orthonormality >= 1e-6 || std::abs(r.determinant() - 1.0) > 1e-6) {
    throw SchemaError(join(path, "rotation"), "does not yield a proper rotation");
  }
  if (!shot.position().allFinite()) throw SchemaError(path, "camera position is not finite");
  return shot;
}

SparsePoint parse_point(std::string id, const json& value, const std::string& path,
                        std::size_t& unknown) {
  object_at(value, path);
  SparsePoint point;
  point.id = std::move(id);
  point.position = vec3_at(member(value, "coordinates", path), join(path, "coordinates"));
  const std::string color_path = join(path, "color");
  const Vec3 color = vec3_at(member(value, "color", path), color_path);
  for (int c = 0; c < 3; ++c) {
    if (color[c] < 0.0 || color[c] > 255.0) {
      throw SchemaError(join(color_path, std::to_string(c)), "color channel outside [0, 255]");
    }
    point.color[c] = static_cast<std::uint8_t>(std::lround(color[c]));
  }
  for (const auto& [key, field] : value.items()) {
    if (key != "coordinates" && key != "color") ++unknown;
  }
  return point;
}

std::size_t shot_count(const json& reconstruction) {
  if (!reconstruction.is_object()) return 0;
  auto it = reconstruction.find("shots");
  return it != reconstruction.end() && it->is_object() ? it->size() : 0;
}

// Shortest representation that reads back to the same double.
std::string format_number(double v) {
  char buffer[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof buffer, "%.*g", precision, v);
    if (std::strtod(buffer, nullptr) == v) break;
  }
  return buffer;
}

}  // namespace

Mat3 axis_angle_to_matrix(const Vec3& rotation) {
  if (!rotation.allFinite()) throw InvalidRotation("axis-angle vector is not finite");
  const double angle = rotation.norm();
  if (angle < 1e-12) return Mat3::Identity();
  const Vec3 axis = rotation / angle;
  Mat3 k;
  k << 0.0, -axis.z(), axis.y(),
       axis.z(), 0.0, -axis.x(),
       -axis.y(), axis.x(), 0.0;
  return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * (k * k);
}

Mat3 Shot::rotation_matrix() const { return axis_angle_to_matrix(rotation); }

Vec3 Shot::position() const { return -rotation_matrix().transpose() * translation; }

Vec3 shot_position(const Shot& shot) { return shot.position(); }

ParseResult parse_reconstruction(std::string_view document, const ParseOptions& options) {
  const Sanitized sanitized = sanitize(document);
  json root;
  try {
    root = json::parse(sanitized.text);
  } catch (const json::parse_error& e) {
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw ParseError(sanitized.original_offset(at), e.what());
  } catch (const json::exception& e) {
    throw ParseError(0, e.what());
  }

  if (!root.is_array()) throw SchemaError("/", "expected a top-level array of reconstructions");
  if (root.empty()) throw NoReconstruction("document contains no reconstruction");

  ParseResult result;
  for (std::size_t i = 1; i < root.size(); ++i) {
    result.report.ignored_reconstructions.push_back(shot_count(root[i]));
  }

  const json& rec = object_at(root[0], "");
  std::size_t& unknown = result.report.unknown_fields;
  for (const auto& [key, field] : rec.items()) {
    if (key != "cameras" && key != "shots" && key != "points") ++unknown;
  }

  const json& cameras = object_at(member(rec, "cameras", ""), "cameras");
  for (const auto& [id, value] : cameras.items()) {
    result.model.cameras.emplace(id, parse_camera(id, value, join("cameras", id), unknown));
  }

  const json& shots = object_at(member(rec, "shots", ""), "shots");
  for (const auto& [id, value] : shots.items()) {
    const std::string path = join("shots", id);
    std::size_t shot_unknown = 0;
    try {
      Shot shot = parse_shot(id, value, path, result.model.cameras, shot_unknown);
      if (!result.model.shots.emplace(id, std::move(shot)).second) {
        throw SchemaError(path, "duplicate shot id");
      }
      unknown += shot_unknown;
    } catch (const SchemaError& e) {
      if (!options.lenient) throw;
      result.report.dropped_shots.push_back(e.what());
    } catch (const InvalidRotation& e) {
      if (!options.lenient) throw SchemaError(join(path, "rotation"), e.what());
      result.report.dropped_shots.push_back(path + ": " + e.what());
    }
  }

  if (auto it = rec.find("points"); it != rec.end()) {
    if (it->is_object()) {
      for (const auto& [id, value] : it->items()) {
        result.model.points.push_back(parse_point(id, value, join("points", id), unknown));
      }
    } else if (it->is_array()) {
      for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string id = std::to_string(i);
        result.model.points.push_back(parse_point(id, (*it)[i], join("points", id), unknown));
      }
    } else {
      throw SchemaError("points", "expected an object or array");
    }
  }
  return result;
}

ParseResult load_reconstruction(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_reconstruction(buffer.str(), options);
}

std::string serialize_reconstruction(const Reconstruction& model) {
  auto vec = [](const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); };
  json rec = json::object();
  json& cameras = rec["cameras"] = json::object();
  for (const auto& [id, camera] : model.cameras) {
    json entry = json::object();
    entry["projection_type"] = camera.projection_type;
    for (const auto& [key, value] : camera.parameters) entry[key] = value;
    cameras[id] = std::move(entry);
  }
  json& shots = rec["shots"] = json::object();
  for (const auto& [id, shot] : model.shots) {
    json entry = json::object();
    entry["rotation"] = vec(shot.rotation);
    entry["translation"] = vec(shot.translation);
    entry["camera"] = shot.camera;
    shots[id] = std::move(entry);
  }
  json& points = rec["points"] = json::object();
  for (const auto& point : model.points) {
    json entry = json::object();
    entry["coordinates"] = vec(point.position);
    entry["color"] = json::array({point.color[0], point.color[1], point.color[2]});
    points[point.id] = std::move(entry);
  }
  return json::array({std::move(rec)}).dump(2) + "\n";
}

std::string export_ply(const Reconstruction& model, bool include_shots) {
  const std::size_t count = model.points.size() + (include_shots ? model.shots.size() : 0);
  std::string out;
  out += "ply\nformat ascii 1.0\n";
  out += "element vertex " + std::to_string(count) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out += "end_header\n";
  auto vertex = [&out](const Vec3& p, int r, int g, int b) {
    out += format_number(p.x()) + " " + format_number(p.y()) + " " + format_number(p.z()) + " " +
           std::to_string(r) + " " + std::to_string(g) + " " + std::to_string(b) + "\n";
  };
  for (const auto& point : model.points) {
    vertex(point.position, point.color[0], point.color[1], point.color[2]);
  }
  if (include_shots) {
    for (const auto& [id, shot] : model.shots) vertex(shot.position(), 0, 255, 0);
  }
  return out;
}

void write_ply(const Reconstruction& model, bool include_shots, const std::filesystem::path& path) {
  const std::string document = export_ply(model, include_shots);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << document;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace triage::sfm
