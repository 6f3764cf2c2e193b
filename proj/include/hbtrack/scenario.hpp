#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hbtrack/pairing.hpp"

namespace hbtrack::scenario {

struct ScoreModel {
    double min_score = 0.30;  // confidence at zero visibility
    double max_score = 0.95;  // confidence at full visibility
    double noise_std = 0.02;
};

/// Parameters of the synthetic crowded-scene generator. Everything is driven
/// by the single seed; two runs with the same spec produce identical output.
struct ScenarioSpec {
    std::uint64_t seed = 1;
    int num_pedestrians = 20;
    int num_frames = 100;
    double arena_width = 1600.0;
    double arena_height = 900.0;
    double speed_min = 1.0;
    double speed_max = 4.0;
    double body_height_min = 80.0;
    double body_height_max = 160.0;
    double head_ratio = 0.22;  // head height as fraction of body height
    double occlusion_visibility_threshold = 0.5;
    double detection_noise = 1.0;  // positional jitter std, pixels
    int embedding_dim = 16;
    double embedding_noise = 0.05;  // per-component std around the identity anchor
    double body_drop_when_occluded = 0.9;
    double head_drop_when_occluded = 0.15;
    ScoreModel score_model;
};

void validate(const ScenarioSpec& spec);

std::string spec_to_json(const ScenarioSpec& spec);
ScenarioSpec spec_from_json(const std::string& text);

struct GroundTruthEntry {
    int frame = 0;
    int id = 0;
    BBox body;
    BBox head;
    double body_visibility = 1.0;
    double head_visibility = 1.0;
};

struct Scenario {
    std::vector<GroundTruthEntry> truth;                   // frame-major order
    std::vector<std::vector<PairedDetection>> detections;  // index f holds frame f+1
};

/// Pedestrians move with piecewise-constant velocity inside the arena; a
/// fixed per-pedestrian depth order drives occlusion. Bodies below the
/// visibility threshold drop out probabilistically while heads, smaller and
/// higher, mostly survive. Detections are jittered, visibility-scored and
/// carry identity-anchored embeddings (body and head anchors of one identity
/// sit close together, different identities far apart).
Scenario generate(const ScenarioSpec& spec);

/// Splits truth-paired detections back into flat per-part lists.
std::vector<Detection> flatten(const std::vector<PairedDetection>& paired);

}  // namespace hbtrack::scenario
