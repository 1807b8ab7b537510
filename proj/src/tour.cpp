#include "triage/tour.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "json.hpp"

#include "triage/error.hpp"

namespace triage::tour {

namespace {

using json = nlohmann::ordered_json;

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kPoleEpsilon = 1e-9;
constexpr double kUpTolerance = 15.0;  // degrees

double normalize_yaw(double deg) {
  while (deg <= -180.0) deg += 360.0;
  while (deg > 180.0) deg -= 360.0;
  return deg;
}

// Angle between the camera's up direction and world +z, in degrees.
double up_deviation(const PanoNode& node) {
  const sfm::Mat3 r = sfm::axis_angle_to_matrix(node.rotation);
  const Vec3 up = -(r.transpose() * Vec3::UnitY());
  return std::acos(std::clamp(up.z(), -1.0, 1.0)) * kRadToDeg;
}

const json& field(const json& object, const char* key, const std::string& path) {
  auto it = object.find(key);
  if (it == object.end()) throw SchemaError(path + "/" + key, "missing required field");
  return *it;
}

double number(const json& value, const std::string& path) {
  if (!value.is_number()) throw SchemaError(path, "expected a number");
  return value.get<double>();
}

std::string text(const json& value, const std::string& path) {
  if (!value.is_string()) throw SchemaError(path, "expected a string");
  return value.get<std::string>();
}

}  // namespace

void GraphParams::validate() const {
  if (max_neighbors < 1) throw RangeError("max_neighbors must be >= 1");
  if (max_distance && !(*max_distance > 0.0)) throw RangeError("max_distance must be > 0");
  if (scale && !(*scale > 0.0 && std::isfinite(*scale))) throw RangeError("scale must be > 0");
  if (min_size < 1 || max_size < min_size) throw RangeError("need 1 <= min_size <= max_size");
}

Bearing bearing(const PanoNode& from, const PanoNode& to) {
  const Vec3 world = to.position - from.position;
  const double length = world.norm();
  if (!(length > 0.0)) {
    throw DegenerateEdge("panoramas '" + from.id + "' and '" + to.id + "' coincide");
  }
  const Vec3 cam = sfm::axis_angle_to_matrix(from.rotation) * world;
  const double horizontal = std::hypot(cam.x(), cam.z());
  Bearing b;
  b.yaw_deg = horizontal < kPoleEpsilon ? 0.0
                                        : normalize_yaw(std::atan2(cam.x(), cam.z()) * kRadToDeg);
  b.pitch_deg = -std::asin(std::clamp(cam.y() / cam.norm(), -1.0, 1.0)) * kRadToDeg;
  return b;
}

HotspotStyle style(double distance, double d_min, double d_max, int min_size, int max_size) {
  if (!(d_min <= d_max)) throw RangeError("d_min must not exceed d_max");
  if (!(distance >= d_min && distance <= d_max)) {
    throw RangeError("distance " + std::to_string(distance) + " outside [" +
                     std::to_string(d_min) + ", " + std::to_string(d_max) + "]");
  }
  const double u = d_max == d_min ? 0.0 : (distance - d_min) / (d_max - d_min);
  HotspotStyle s;
  s.color = {static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - u))), 0,
             static_cast<std::uint8_t>(std::lround(255.0 * u))};
  s.size_px = static_cast<int>(std::lround(max_size - u * (max_size - min_size)));
  return s;
}

std::vector<PanoNode> nodes_from_reconstruction(const sfm::Reconstruction& model) {
  std::vector<PanoNode> nodes;
  nodes.reserve(model.shots.size());
  for (const auto& [id, shot] : model.shots) {
    nodes.push_back({id, id, shot.position(), shot.rotation, false});
  }
  return nodes;
}

TourGraph build_graph(std::vector<PanoNode> nodes, const GraphParams& params) {
  params.validate();
  if (nodes.empty()) throw EmptyModel("reconstruction has no shots to build a tour from");
  std::sort(nodes.begin(), nodes.end(),
            [](const PanoNode& a, const PanoNode& b) { return a.id < b.id; });

  TourGraph graph;
  graph.params = params;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i].id == nodes[i - 1].id) throw SchemaError("nodes", "duplicate id " + nodes[i].id);
  }
  for (auto& node : nodes) {
    if (!node.position.allFinite()) throw RangeError("node " + node.id + " position not finite");
    if (node.image.empty()) throw RangeError("node " + node.id + " has no image path");
    if (params.scale) node.position *= *params.scale;
    if (const double dev = up_deviation(node); dev > kUpTolerance) {
      graph.warnings.push_back("panorama " + node.id + " up axis deviates " +
                               std::to_string(static_cast<int>(std::lround(dev))) +
                               " deg from world up");
    }
  }

  struct Candidate {
    double distance;
    std::size_t index;
  };
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    std::vector<Candidate> candidates;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (j == i) continue;
      const double d = (nodes[j].position - nodes[i].position).norm();
      if (d == 0.0) {
        graph.warnings.push_back("panoramas " + nodes[i].id + " and " + nodes[j].id +
                                 " share a position; no hotspot");
        continue;
      }
      if (params.max_distance && d > *params.max_distance) continue;
      candidates.push_back({d, j});
    }
    // Nodes are id-sorted, so index order breaks distance ties by id.
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
    });
    if (candidates.size() > static_cast<std::size_t>(params.max_neighbors)) {
      candidates.resize(params.max_neighbors);
    }
    if (candidates.empty()) continue;
    const double d_min = candidates.front().distance;
    const double d_max = candidates.back().distance;
    for (const auto& c : candidates) {
      const Bearing b = bearing(nodes[i], nodes[c.index]);
      const HotspotStyle s = style(c.distance, d_min, d_max, params.min_size, params.max_size);
      graph.edges.push_back({nodes[i].id, nodes[c.index].id, b.yaw_deg, b.pitch_deg, c.distance,
                             s.color, s.size_px});
    }
  }
  graph.nodes = std::move(nodes);
  return graph;
}

TourGraph build_graph(const sfm::Reconstruction& model, const GraphParams& params) {
  return build_graph(nodes_from_reconstruction(model), params);
}

std::string emit_tour(const TourGraph& graph) {
  json doc = json::object();
  doc["version"] = 1;
  doc["units"] = graph.units();
  json nodes = json::array();
  for (const auto& node : graph.nodes) {
    json entry = json::object();
    entry["id"] = node.id;
    entry["image"] = node.image;
    entry["position"] = json::array({node.position.x(), node.position.y(), node.position.z()});
    if (node.image_missing) entry["missing"] = true;
    nodes.push_back(std::move(entry));
  }
  doc["nodes"] = std::move(nodes);
  json edges = json::array();
  for (const auto& edge : graph.edges) {
    json entry = json::object();
    entry["from"] = edge.from_id;
    entry["to"] = edge.to_id;
    entry["yaw_deg"] = edge.yaw_deg;
    entry["pitch_deg"] = edge.pitch_deg;
    entry["distance"] = edge.distance;
    entry["color"] = json::array({edge.color[0], edge.color[1], edge.color[2]});
    entry["size_px"] = edge.size_px;
    edges.push_back(std::move(entry));
  }
  doc["edges"] = std::move(edges);
  json generated = json::object();
  generated["max_neighbors"] = graph.params.max_neighbors;
  generated["max_distance"] =
      graph.params.max_distance ? json(*graph.params.max_distance) : json(nullptr);
  doc["generated"] = std::move(generated);
  return doc.dump(2) + "\n";
}

TourGraph parse_tour(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(e.byte > 0 ? e.byte - 1 : 0, e.what());
  }
  if (!doc.is_object()) throw SchemaError("/", "expected an object");
  if (number(field(doc, "version", ""), "version") != 1) {
    throw SchemaError("version", "unsupported tour version");
  }
  TourGraph graph;
  const std::string units = text(field(doc, "units", ""), "units");
  if (units == "meters") {
    graph.params.scale = 1.0;
  } else if (units != "reconstruction") {
    throw SchemaError("units", "expected \"meters\" or \"reconstruction\"");
  }

  const json& nodes = field(doc, "nodes", "");
  if (!nodes.is_array()) throw SchemaError("nodes", "expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = "nodes/" + std::to_string(i);
    const json& n = nodes[i];
    PanoNode node;
    node.id = text(field(n, "id", path), path + "/id");
    node.image = text(field(n, "image", path), path + "/image");
    const json& p = field(n, "position", path);
    if (!p.is_array() || p.size() != 3) throw SchemaError(path + "/position", "expected 3 numbers");
    for (int c = 0; c < 3; ++c) node.position[c] = number(p[c], path + "/position");
    if (auto it = n.find("missing"); it != n.end()) node.image_missing = it->get<bool>();
    graph.nodes.push_back(std::move(node));
  }

  const json& edges = field(doc, "edges", "");
  if (!edges.is_array()) throw SchemaError("edges", "expected an array");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string path = "edges/" + std::to_string(i);
    const json& e = edges[i];
    Hotspot edge;
    edge.from_id = text(field(e, "from", path), path + "/from");
    edge.to_id = text(field(e, "to", path), path + "/to");
    edge.yaw_deg = number(field(e, "yaw_deg", path), path + "/yaw_deg");
    edge.pitch_deg = number(field(e, "pitch_deg", path), path + "/pitch_deg");
    edge.distance = number(field(e, "distance", path), path + "/distance");
    const json& color = field(e, "color", path);
    if (!color.is_array() || color.size() != 3) throw SchemaError(path + "/color", "expected RGB");
    for (int c = 0; c < 3; ++c) {
      const double v = number(color[c], path + "/color");
      if (v < 0 || v > 255) throw SchemaError(path + "/color", "channel outside [0, 255]");
      edge.color[c] = static_cast<std::uint8_t>(v);
    }
    edge.size_px = static_cast<int>(number(field(e, "size_px", path), path + "/size_px"));
    graph.edges.push_back(std::move(edge));
  }
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    for (const std::string* id : {&graph.edges[i].from_id, &graph.edges[i].to_id}) {
      const bool known = std::any_of(graph.nodes.begin(), graph.nodes.end(),
                                     [id](const PanoNode& n) { return n.id == *id; });
      if (!known) throw SchemaError("edges/" + std::to_string(i), "unknown node " + *id);
    }
  }

  const json& generated = field(doc, "generated", "");
  graph.params.max_neighbors =
      static_cast<int>(number(field(generated, "max_neighbors", "generated"),
                              "generated/max_neighbors"));
  const json& max_distance = field(generated, "max_distance", "generated");
  if (!max_distance.is_null()) {
    graph.params.max_distance = number(max_distance, "generated/max_distance");
  }
  return graph;
}

void write_tour(const TourGraph& graph, const std::filesystem::path& path) {
  const std::string document = emit_tour(graph);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << document;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace triage::tour
