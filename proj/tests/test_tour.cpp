#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "fixtures.hpp"
#include "triage/error.hpp"
#include "triage/tour.hpp"

namespace triage::tour {
namespace {

PanoNode node(const std::string& id, Vec3 position, Vec3 rotation = Vec3::Zero()) {
  return {id, id + ".jpg", position, rotation, false};
}

std::vector<std::pair<std::string, std::string>> edge_pairs(const TourGraph& g) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : g.edges) out.emplace_back(e.from_id, e.to_id);
  return out;
}

TEST(Bearing, CardinalDirections) {
  const auto origin = node("o", Vec3::Zero());
  auto b = bearing(origin, node("f", Vec3(0, 0, 1)));
  EXPECT_NEAR(b.yaw_deg, 0.0, 1e-12);
  EXPECT_NEAR(b.pitch_deg, 0.0, 1e-12);
  b = bearing(origin, node("r", Vec3(1, 0, 0)));
  EXPECT_NEAR(b.yaw_deg, 90.0, 1e-12);
  EXPECT_NEAR(b.pitch_deg, 0.0, 1e-12);
  b = bearing(origin, node("u", Vec3(0, -1, 0)));
  EXPECT_EQ(b.yaw_deg, 0.0);
  EXPECT_NEAR(b.pitch_deg, 90.0, 1e-12);
  b = bearing(origin, node("d", Vec3(0, 3, 0)));
  EXPECT_NEAR(b.pitch_deg, -90.0, 1e-12);
}

TEST(Bearing, StraightBehindIsPlus180) {
  const auto b = bearing(node("o", Vec3::Zero()), node("b", Vec3(0, 0, -2)));
  EXPECT_EQ(b.yaw_deg, 180.0);
}

TEST(Bearing, UsesSourceRotation) {
  // Camera turned 90 deg about y: world +x is straight ahead... or behind,
  // depending on sign; check against the explicit rotation.
  const Vec3 rotation(0, std::numbers::pi / 2, 0);
  const auto b = bearing(node("o", Vec3::Zero(), rotation), node("t", Vec3(1, 0, 0)));
  const Vec3 cam = sfm::axis_angle_to_matrix(rotation) * Vec3(1, 0, 0);
  EXPECT_NEAR(b.yaw_deg, std::atan2(cam.x(), cam.z()) * 180.0 / std::numbers::pi, 1e-12);
}

TEST(Bearing, CoincidentIsDegenerate) {
  EXPECT_THROW(bearing(node("a", Vec3(1, 2, 3)), node("b", Vec3(1, 2, 3))), DegenerateEdge);
}

TEST(Bearing, RangesOnRandomPoses) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> a(-3.0, 3.0);
  for (int i = 0; i < 2000; ++i) {
    const auto b = bearing(node("a", Vec3(u(rng), u(rng), u(rng)), Vec3(a(rng), a(rng), a(rng))),
                           node("b", Vec3(u(rng), u(rng), u(rng))));
    EXPECT_GT(b.yaw_deg, -180.0);
    EXPECT_LE(b.yaw_deg, 180.0);
    EXPECT_GE(b.pitch_deg, -90.0);
    EXPECT_LE(b.pitch_deg, 90.0);
  }
}

TEST(Bearing, AntipodalWithIdentityRotations) {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 500; ++i) {
    const auto a = node("a", Vec3(u(rng), u(rng), u(rng)));
    const auto b = node("b", Vec3(u(rng), u(rng), u(rng)));
    const auto ab = bearing(a, b);
    const auto ba = bearing(b, a);
    double expected = ba.yaw_deg + 180.0;
    if (expected > 180.0) expected -= 360.0;
    double diff = std::fmod(std::abs(ab.yaw_deg - expected), 360.0);
    diff = std::min(diff, 360.0 - diff);
    EXPECT_LT(diff, 1e-9);
    EXPECT_NEAR(ab.pitch_deg, -ba.pitch_deg, 1e-9);
  }
}

TEST(Bearing, RigidMotionInvariance) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::uniform_real_distribution<double> a(-2.5, 2.5);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 axis = Vec3(u(rng), u(rng), u(rng)).normalized();
    const sfm::Mat3 q = Eigen::AngleAxisd(a(rng), axis).toRotationMatrix();
    const Vec3 shift(u(rng), u(rng), u(rng));
    std::vector<PanoNode> nodes;
    for (int i = 0; i < 6; ++i) {
      nodes.push_back(node("n" + std::to_string(i), Vec3(u(rng), u(rng), u(rng)),
                           Vec3(a(rng), a(rng), a(rng)) * 0.5));
    }
    std::vector<PanoNode> moved;
    for (const auto& n : nodes) {
      const sfm::Mat3 r = sfm::axis_angle_to_matrix(n.rotation) * q.transpose();
      const Eigen::AngleAxisd aa(r);
      moved.push_back(node(n.id, q * n.position + shift, aa.angle() * aa.axis()));
    }
    const auto g1 = build_graph(nodes, {.max_neighbors = 3});
    const auto g2 = build_graph(moved, {.max_neighbors = 3});
    ASSERT_EQ(edge_pairs(g1), edge_pairs(g2));
    for (std::size_t i = 0; i < g1.edges.size(); ++i) {
      EXPECT_NEAR(g1.edges[i].yaw_deg, g2.edges[i].yaw_deg, 1e-6);
      EXPECT_NEAR(g1.edges[i].pitch_deg, g2.edges[i].pitch_deg, 1e-6);
      EXPECT_NEAR(g1.edges[i].distance, g2.edges[i].distance, 1e-6);
    }
  }
}

TEST(Style, SingleNeighbourIsRedAndLargest) {
  const auto s = style(3.0, 3.0, 3.0);
  EXPECT_EQ(s.color, (Rgb{255, 0, 0}));
  EXPECT_EQ(s.size_px, 30);
}

TEST(Style, FarthestIsBlueAndSmallest) {
  const auto s = style(9.0, 1.0, 9.0);
  EXPECT_EQ(s.color, (Rgb{0, 0, 255}));
  EXPECT_EQ(s.size_px, 10);
}

TEST(Style, Midway) {
  const auto s = style(5.0, 1.0, 9.0);
  EXPECT_EQ(s.color, (Rgb{128, 0, 128}));
  EXPECT_EQ(s.size_px, 20);
}

TEST(Style, OutOfRangeIsError) {
  EXPECT_THROW(style(0.5, 1.0, 9.0), RangeError);
  EXPECT_THROW(style(9.5, 1.0, 9.0), RangeError);
  EXPECT_THROW(style(2.0, 3.0, 1.0), RangeError);
}

TEST(BuildGraph, SingleShotHasNoEdges) {
  const auto model = sfm::parse_reconstruction(testing::collinear_json({0})).model;
  const auto g = build_graph(model);
  EXPECT_EQ(g.nodes.size(), 1u);
  EXPECT_TRUE(g.edges.empty());
}

TEST(BuildGraph, EmptyModelIsError) {
  EXPECT_THROW(build_graph(sfm::Reconstruction{}), EmptyModel);
}

TEST(BuildGraph, CollinearNearestNeighbour) {
  const auto model = sfm::parse_reconstruction(testing::collinear_json({0, 1, 5})).model;
  const auto g = build_graph(model, {.max_neighbors = 1});
  using P = std::pair<std::string, std::string>;
  EXPECT_EQ(edge_pairs(g), (std::vector<P>{{"pano_0.jpg", "pano_1.jpg"},
                                           {"pano_1.jpg", "pano_0.jpg"},
                                           {"pano_2.jpg", "pano_1.jpg"}}));
  EXPECT_NEAR(g.edges[0].yaw_deg, 90.0, 1e-12);
  EXPECT_NEAR(g.edges[1].yaw_deg, -90.0, 1e-12);
  EXPECT_DOUBLE_EQ(g.edges[2].distance, 4.0);
}

TEST(BuildGraph, NearestNeighbourIsAsymmetric) {
  const auto model = sfm::parse_reconstruction(testing::collinear_json({0, 1, 1.5})).model;
  const auto g = build_graph(model, {.max_neighbors = 1});
  using P = std::pair<std::string, std::string>;
  EXPECT_EQ(edge_pairs(g), (std::vector<P>{{"pano_0.jpg", "pano_1.jpg"},
                                           {"pano_1.jpg", "pano_2.jpg"},
                                           {"pano_2.jpg", "pano_1.jpg"}}));
}

TEST(BuildGraph, DistanceCapAndTieBreakById) {
  const auto g = build_graph(
      {node("c", Vec3(0, 0, 0)), node("b", Vec3(-1, 0, 0)), node("a", Vec3(1, 0, 0)),
       node("far", Vec3(0, 0, 50))},
      {.max_neighbors = 1, .max_distance = 10.0});
  // a and b are equidistant from c; a wins on id.
  for (const auto& e : g.edges) {
    if (e.from_id == "c") EXPECT_EQ(e.to_id, "a");
    EXPECT_NE(e.from_id, "far");
    EXPECT_NE(e.to_id, "far");
  }
}

TEST(BuildGraph, CoincidentPositionsAreSkippedWithWarning) {
  const auto g = build_graph({node("a", Vec3(0, 0, 0)), node("b", Vec3(0, 0, 0)),
                              node("c", Vec3(1, 0, 0))});
  for (const auto& e : g.edges) {
    EXPECT_FALSE((e.from_id == "a" && e.to_id == "b") || (e.from_id == "b" && e.to_id == "a"));
  }
  EXPECT_FALSE(g.warnings.empty());
}

TEST(BuildGraph, ScaleLabelsMeters) {
  const auto model = sfm::parse_reconstruction(testing::collinear_json({0, 2})).model;
  const auto g = build_graph(model, {.scale = 2.5});
  EXPECT_EQ(g.units(), "meters");
  EXPECT_DOUBLE_EQ(g.edges[0].distance, 5.0);
  EXPECT_EQ(build_graph(model).units(), "reconstruction");
}

TEST(BuildGraph, PerNodeStyleMonotoneOnRandomGraphs) {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<PanoNode> nodes;
    for (int i = 0; i < 15; ++i) nodes.push_back(node("p" + std::to_string(i), Vec3(u(rng), u(rng), u(rng))));
    const auto g = build_graph(nodes, {.max_neighbors = 5});
    std::map<std::string, std::vector<const Hotspot*>> by_source;
    for (const auto& e : g.edges) {
      EXPECT_NE(e.from_id, e.to_id);
      by_source[e.from_id].push_back(&e);
    }
    EXPECT_EQ(by_source.size(), nodes.size());
    for (const auto& [id, edges] : by_source) {
      EXPECT_EQ(edges.front()->color, (Rgb{255, 0, 0}));
      for (std::size_t i = 1; i < edges.size(); ++i) {
        EXPECT_GE(edges[i]->distance, edges[i - 1]->distance);
        EXPECT_LE(edges[i]->size_px, edges[i - 1]->size_px);
        EXPECT_LE(edges[i]->color[0], edges[i - 1]->color[0]);
        EXPECT_GE(edges[i]->color[2], edges[i - 1]->color[2]);
      }
    }
  }
}

TEST(Emit, SingleNodeDocument) {
  const auto g = build_graph({node("only", Vec3(1, 2, 3))});
  const auto doc = nlohmann::json::parse(emit_tour(g));
  EXPECT_EQ(doc["version"], 1);
  EXPECT_EQ(doc["units"], "reconstruction");
  EXPECT_EQ(doc["nodes"].size(), 1u);
  EXPECT_TRUE(doc["edges"].is_array());
  EXPECT_TRUE(doc["edges"].empty());
  EXPECT_EQ(doc["generated"]["max_neighbors"], 4);
  EXPECT_TRUE(doc["generated"]["max_distance"].is_null());
}

TEST(Emit, KeyOrderIsStable) {
  const std::string text = emit_tour(build_graph({node("a", Vec3(0, 0, 0)), node("b", Vec3(0, 0, 1))}));
  const auto pos = [&](const char* key) { return text.find(key); };
  EXPECT_LT(pos("\"version\""), pos("\"units\""));
  EXPECT_LT(pos("\"units\""), pos("\"nodes\""));
  EXPECT_LT(pos("\"nodes\""), pos("\"edges\""));
  EXPECT_LT(pos("\"edges\""), pos("\"generated\""));
  EXPECT_LT(pos("\"from\""), pos("\"to\""));
  EXPECT_LT(pos("\"yaw_deg\""), pos("\"size_px\""));
}

TEST(Emit, EmitParseEmitFixpoint) {
  const auto model = sfm::parse_reconstruction(testing::random_reconstruction_json(12, 0, 5)).model;
  for (const GraphParams& params :
       {GraphParams{}, GraphParams{.max_neighbors = 2, .max_distance = 60.0, .scale = 0.37}}) {
    const std::string first = emit_tour(build_graph(model, params));
    const std::string second = emit_tour(parse_tour(first));
    EXPECT_EQ(first, second);
  }
}

TEST(Emit, ThreeNodeFixtureMatchesBearings) {
  const auto model = sfm::parse_reconstruction(testing::collinear_json({0, 1, 5})).model;
  const auto g = build_graph(model, {.max_neighbors = 4, .max_distance = 4.5});
  ASSERT_EQ(g.edges.size(), 4u);
  const auto parsed = parse_tour(emit_tour(g));
  ASSERT_EQ(parsed.edges.size(), 4u);
  std::map<std::string, PanoNode> nodes;
  for (const auto& n : tour::nodes_from_reconstruction(model)) nodes[n.id] = n;
  for (const auto& e : parsed.edges) {
    const auto b = bearing(nodes.at(e.from_id), nodes.at(e.to_id));
    EXPECT_NEAR(e.yaw_deg, b.yaw_deg, 1e-6);
    EXPECT_NEAR(e.pitch_deg, b.pitch_deg, 1e-6);
  }
}

TEST(Parse, RejectsMalformedTours) {
  EXPECT_THROW(parse_tour("{"), ParseError);
  EXPECT_THROW(parse_tour(R"({"version": 2})"), SchemaError);
  EXPECT_THROW(parse_tour(R"({"version": 1, "units": "feet", "nodes": [], "edges": []})"),
               SchemaError);
  EXPECT_THROW(parse_tour(R"({"version": 1, "units": "meters", "nodes": [],
      "edges": [{"from": "a", "to": "b", "yaw_deg": 0, "pitch_deg": 0, "distance": 1,
                 "color": [1, 2, 3], "size_px": 4}],
      "generated": {"max_neighbors": 4, "max_distance": null}})"),
               SchemaError);
}

}  // namespace
}  // namespace triage::tour
