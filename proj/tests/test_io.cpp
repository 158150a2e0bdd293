#include <gtest/gtest.h>

#include "greedypose/greedypose.hpp"
#include "support.hpp"

namespace gpose::io {
namespace {

using P = PartClass;

const char* kValid = R"({
  "image": {"width": 640, "height": 480},
  "candidates": [
    {"id": 1, "class": "Head", "x": 100, "y": 50, "unary": 0.9},
    {"id": 2, "class": "Neck", "x": 100, "y": 80, "unary": 0.8}
  ],
  "associations": {"sparse": [{"a": 1, "b": 2, "p": 0.7}]}
})";

std::string error_of(const std::string& text) {
  try {
    parse_detections(text, "in.json");
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

TEST(ValueLines, MapsPointersToLines) {
  const auto lines = value_lines(kValid);
  EXPECT_EQ(lines.at(""), 1);
  EXPECT_EQ(lines.at("/image"), 2);
  EXPECT_EQ(lines.at("/candidates/0"), 4);
  EXPECT_EQ(lines.at("/candidates/1/unary"), 5);
  EXPECT_EQ(lines.at("/associations/sparse/0/p"), 7);
}

TEST(Detections, ParsesValidDocument) {
  const DetectionsDocument d = parse_detections(kValid);
  EXPECT_EQ(d.width, 640.0);
  EXPECT_EQ(d.detections.size(), 2u);
  EXPECT_EQ(d.detections[P::Neck][0].id, 2u);
  const auto assoc = make_association(d);
  EXPECT_EQ(assoc->pairwise(d.detections[P::Head][0], d.detections[P::Neck][0]), 0.7);
  EXPECT_EQ(assoc->pairwise(d.detections[P::Neck][0], d.detections[P::Head][0]), 0.7);
}

TEST(Detections, UnaryOutOfRangeNamesCandidateAndLine) {
  std::string text = kValid;
  text.replace(text.find("0.8"), 3, "1.3");
  const std::string msg = error_of(text);
  EXPECT_NE(msg.find("in.json:5:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("candidate 2"), std::string::npos) << msg;
}

TEST(Detections, UnknownClassIsRejected) {
  std::string text = kValid;
  text.replace(text.find("\"Neck\""), 6, "\"Nose\"");
  const std::string msg = error_of(text);
  EXPECT_NE(msg.find("in.json:5:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("Nose"), std::string::npos) << msg;
}

TEST(Detections, MalformedJsonReportsLine) {
  std::string text = kValid;
  text.replace(text.find("\"x\": 100, \"y\": 80"), 8, "\"x\" 100,");
  const std::string msg = error_of(text);
  EXPECT_NE(msg.find("in.json:5:"), std::string::npos) << msg;
}

TEST(Detections, StructuralErrors) {
  auto with = [](const std::string& from, const std::string& to) {
    std::string t = kValid;
    t.replace(t.find(from), from.size(), to);
    return error_of(t);
  };
  EXPECT_NE(with("\"id\": 2", "\"id\": 1").find("duplicate"), std::string::npos);
  EXPECT_NE(with("\"id\": 2", "\"id\": -2").find("non-negative integer"), std::string::npos);
  EXPECT_NE(with("\"b\": 2", "\"b\": 9").find("unknown candidate 9"), std::string::npos);
  EXPECT_NE(with("\"p\": 0.7", "\"p\": 1.7").find("outside [0,1]"), std::string::npos);
  EXPECT_NE(with("\"unary\": 0.9", "\"unary\": 0.9, \"score\": 1").find("unknown field"), std::string::npos);
  EXPECT_NE(with("\"x\": 100, ", "").find("missing field \"x\""), std::string::npos);
  EXPECT_NE(with("{\"sparse\": [{\"a\": 1, \"b\": 2, \"p\": 0.7}]}", "{}").find("exactly one"),
            std::string::npos);
  EXPECT_NE(with("\"p\": 0.7}]", "\"p\": 0.7}, {\"a\": 2, \"b\": 1, \"p\": 0.6}]").find("conflicting"),
            std::string::npos);
  EXPECT_EQ(with("\"p\": 0.7}]", "\"p\": 0.7}, {\"a\": 2, \"b\": 1, \"p\": 0.7}]"), "");
  EXPECT_NE(with("{\"sparse\": [{\"a\": 1, \"b\": 2, \"p\": 0.7}]}",
                 "{\"geometric\": {\"head_length\": 0, \"pairwise_sigma\": 0.08}}")
                .find("head_length"),
            std::string::npos);
}

TEST(Detections, GeometricModelRoundTrips) {
  std::string text = kValid;
  const std::string from = "{\"sparse\": [{\"a\": 1, \"b\": 2, \"p\": 0.7}]}";
  text.replace(text.find(from), from.size(), "{\"geometric\": {\"head_length\": 26, \"pairwise_sigma\": 0.08}}");
  const DetectionsDocument d = parse_detections(text);
  ASSERT_TRUE(std::holds_alternative<GeometricSpec>(d.association));
  const auto assoc = make_association(d);
  EXPECT_NEAR(dynamic_cast<const GeometricAssociation&>(*assoc).sigma(), 16.0, 1e-12);
  const std::string dumped = to_json(d).dump(2);
  EXPECT_EQ(to_json(parse_detections(dumped)).dump(2), dumped);
}

TEST(Detections, SyntheticSceneRoundTrips) {
  NoiseConfig noise;
  noise.position_sigma = 0.03;
  noise.spurious_per_class = 2;
  const SceneGroundTruth gt = generate_scene(3, noise, 4);
  DetectionsDocument doc;
  doc.width = gt.width;
  doc.height = gt.height;
  doc.detections = render_detections(gt, noise, 4);
  doc.association = GeometricSpec{gt.mean_head_length(), noise.pairwise_sigma};
  doc.seed = 4;
  const DetectionsDocument back = parse_detections(to_json(doc).dump());
  EXPECT_EQ(back.detections, doc.detections);
  EXPECT_EQ(std::get<GeometricSpec>(back.association), std::get<GeometricSpec>(doc.association));
  EXPECT_EQ(back.seed, doc.seed);
}

TEST(Poses, RoundTripIsLossless) {
  NoiseConfig noise;
  noise.position_sigma = 0.03;
  noise.spurious_per_class = 3;
  noise.occlusion_prob = 0.2;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SceneGroundTruth gt = generate_scene(1 + seed % 6, noise, seed);
    const Detections det = render_detections(gt, noise, seed);
    AssignmentConfig cfg;
    cfg.rng_seed = seed * 7919;
    const AssignmentResult r = assemble(det, geometric_association(gt, noise), cfg);
    const std::string text = to_json(r, cfg).dump(2);
    const PosesDocument back = parse_poses(text);
    EXPECT_EQ(back.result, r) << "seed " << seed;
    EXPECT_EQ(back.config, cfg);
    EXPECT_EQ(back.tables, Tables{});
    EXPECT_EQ(to_json(back.result, back.config, back.tables).dump(2), text);
  }
}

TEST(Poses, RejectsUnknownPartClass) {
  const char* text = R"({"clusters": [{"id": 1, "spawned": false,
      "parts": {"Chin": {"candidate_id": 1, "x": 0, "y": 0}}}]})";
  EXPECT_THROW(parse_poses(text), ValidationError);
}

TEST(Config, OverridesAndStrictKeys) {
  AssignmentConfig cfg;
  Tables tables;
  load_config(R"({"spawn_threshold": 0.4, "rng_seed": 12, "enable_spawning": false,
                  "anthropometric": {"Neck": 0.19, "Chin": 0.12},
                  "predecessors": {"RAnkle": ["RKnee"]}})",
              "cfg.json", cfg, tables);
  EXPECT_EQ(cfg.spawn_threshold, 0.4);
  EXPECT_EQ(cfg.rng_seed, 12u);
  EXPECT_FALSE(cfg.enable_spawning);
  EXPECT_EQ(tables.anthropometry[P::Neck], 0.19);
  EXPECT_EQ(tables.anthropometry.chin_alpha, 0.12);
  EXPECT_EQ(tables.predecessors[P::RAnkle], (std::vector<P>{P::RKnee}));

  auto fails = [](const std::string& text, const std::string& needle) {
    AssignmentConfig c;
    Tables t;
    try {
      load_config(text, "cfg.json", c, t);
    } catch (const ValidationError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  EXPECT_TRUE(fails(R"({"spawn_treshold": 0.4})", "unknown configuration field"));
  EXPECT_TRUE(fails("{\n\"hallucination_threshold\": 1.5}", "cfg.json:2:"));
  EXPECT_TRUE(fails(R"({"radius_multiplier": 0})", "radius_multiplier"));
  EXPECT_TRUE(fails(R"({"kmeans_iterations": 2.5})", "integer"));
  EXPECT_TRUE(fails(R"({"predecessors": {"Neck": ["RWrist"]}})", "cannot precede"));
  EXPECT_TRUE(fails(R"({"anthropometric": {"RWrist": 0.3}})", "increase"));
  EXPECT_TRUE(fails("[1, 2]", "JSON object"));
}

TEST(Config, EchoRoundTrips) {
  AssignmentConfig cfg;
  cfg.radius_multiplier = 2.25;
  cfg.enable_proximal_gating = false;
  cfg.rng_seed = 0xFFFFFFFFFFFFFFFFull;
  Tables tables;
  tables.anthropometry.alpha[slot(P::Neck)] = 0.2;
  json j = to_json(cfg);
  j.update(to_json(tables));
  AssignmentConfig c2;
  Tables t2;
  apply_config(j, c2, t2);
  EXPECT_EQ(c2, cfg);
  EXPECT_EQ(t2, tables);
}

TEST(GroundTruth, RoundTrips) {
  NoiseConfig noise;
  noise.occlusion_prob = 0.3;
  const SceneGroundTruth gt = generate_scene(4, noise, 10);
  EXPECT_EQ(parse_ground_truth(to_json(gt, 10).dump()), gt);
}

TEST(Noise, FlatOverrides) {
  NoiseConfig noise;
  SceneConfig scene;
  apply_noise(json::parse(R"({"position_sigma": 0.02, "spurious_per_class": 3,
                              "occludable": ["Head"], "height_min": 150})"),
              noise, scene);
  EXPECT_EQ(noise.position_sigma, 0.02);
  EXPECT_EQ(noise.spurious_per_class, 3);
  EXPECT_TRUE(noise.occludable[0]);
  EXPECT_FALSE(noise.occludable[1]);
  EXPECT_EQ(scene.height_min, 150.0);
  EXPECT_THROW(apply_noise(json::parse(R"({"sigma": 1})"), noise, scene), ValidationError);
  EXPECT_THROW(apply_noise(json::parse(R"({"occlusion_prob": 2})"), noise, scene), ValidationError);
}

TEST(Trace, SerializesEveryStage) {
  NoiseConfig noise;
  const SceneGroundTruth gt = generate_scene(2, noise, 1);
  const AssignmentResult r =
      assemble(render_detections(gt, noise, 1), geometric_association(gt, noise), AssignmentConfig{}, {}, true);
  const json j = to_json(*r.trace);
  EXPECT_EQ(j["stages"].size(), 13u);
  EXPECT_EQ(j["stages"][0]["class"], "Neck");
  EXPECT_TRUE(j["head_length"].is_number());
  EXPECT_TRUE(j["stages"][0]["commits"][0]["gate_radius"].is_null());
  EXPECT_TRUE(j["stages"][5]["commits"][0]["gate_radius"].is_number());
}

TEST(Report, PckhJson) {
  const SceneGroundTruth gt = generate_scene(1, NoiseConfig{}, 1);
  const json j = to_json(pckh({}, gt));
  EXPECT_EQ(j["mean"], 0.0);
  EXPECT_EQ(j["missed_persons"], 1);
  EXPECT_EQ(j["per_class"].size(), 14u);
}

}  // namespace
}  // namespace gpose::io
