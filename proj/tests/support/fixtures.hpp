#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

namespace triage::testing {

struct ShotSpec {
  std::string id;
  std::array<double, 3> rotation{};
  std::array<double, 3> translation{};
  std::string camera = "cam0";
};

/// OpenSfM-style reconstruction.json text with one spherical camera "cam0".
inline std::string reconstruction_json(const std::vector<ShotSpec>& shots,
                                       const nlohmann::json& points = nlohmann::json::object()) {
  nlohmann::json rec;
  rec["cameras"]["cam0"] = {{"projection_type", "spherical"}, {"width", 5760}, {"height", 2880}};
  rec["shots"] = nlohmann::json::object();
  for (const auto& s : shots) {
    rec["shots"][s.id] = {{"rotation", s.rotation},
                          {"translation", s.translation},
                          {"camera", s.camera},
                          {"capture_time", 0.0}};
  }
  rec["points"] = points;
  return nlohmann::json::array({rec}).dump(2);
}

/// Shots with identity rotation whose camera centres lie on the x axis.
inline std::string collinear_json(const std::vector<double>& xs) {
  std::vector<ShotSpec> shots;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    shots.push_back({"pano_" + std::to_string(i) + ".jpg", {0, 0, 0}, {-xs[i], 0, 0}});
  }
  return reconstruction_json(shots);
}

/// Two cameras, `shot_count` random poses, `point_count` random coloured points.
inline std::string random_reconstruction_json(int shot_count, int point_count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> angle(-1.5, 1.5);
  std::uniform_real_distribution<double> coord(-50.0, 50.0);
  std::uniform_int_distribution<int> channel(0, 255);
  nlohmann::json rec;
  rec["cameras"]["v2 insta360 one x 6080 3040 equirectangular 0.0"] = {
      {"projection_type", "equirectangular"}, {"width", 6080}, {"height", 3040}};
  rec["cameras"]["v2 dji fc6310 4000 3000 perspective 0.85"] = {
      {"projection_type", "perspective"}, {"width", 4000}, {"height", 3000},
      {"focal", 0.8510123456789}, {"k1", -0.0123}, {"k2", 0.00456}};
  for (int i = 0; i < shot_count; ++i) {
    const std::string camera = i % 2 == 0 ? "v2 insta360 one x 6080 3040 equirectangular 0.0"
                                          : "v2 dji fc6310 4000 3000 perspective 0.85";
    rec["shots"]["frame_" + std::to_string(i) + ".jpg"] = {
        {"rotation", {angle(rng), angle(rng), angle(rng)}},
        {"translation", {coord(rng), coord(rng), coord(rng)}},
        {"camera", camera},
        {"gps_dop", 15.0}};
  }
  for (int i = 0; i < point_count; ++i) {
    rec["points"][std::to_string(1000 + i)] = {
        {"coordinates", {coord(rng), coord(rng), coord(rng)}},
        {"color", {channel(rng), channel(rng), channel(rng)}}};
  }
  rec["reference_lla"] = {{"latitude", 52.5}, {"longitude", 13.4}, {"altitude", 40.0}};
  return nlohmann::json::array({rec}).dump();
}

}  // namespace triage::testing
