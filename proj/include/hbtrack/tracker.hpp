#pragma once

#include <optional>
#include <vector>

#include "hbtrack/motion.hpp"
#include "hbtrack/pairing.hpp"

namespace hbtrack {

enum class TrackStatus { Tentative, Confirmed, Removed };

/// One tracked identity: body motion state always, head motion state once a
/// head has been observed, plus an EMA appearance embedding and lifecycle
/// counters.
struct Track {
    int id = 0;
    kalman::MotionState body_state;
    std::optional<kalman::MotionState> head_state;
    std::vector<double> appearance;
    int frames_since_update = 0;
    int hits = 0;
    TrackStatus status = TrackStatus::Tentative;
};

struct TrackerConfig {
    double high_conf = 0.6;           // D_high / D_low split
    double low_conf = 0.1;            // floor for D_low
    double iou_gate = 0.7;            // max admissible IoU distance
    double fuse_lambda = 0.5;         // weight of IoU distance vs embedding distance
    int max_age = 10;                 // unmatched frames before deletion
    double appearance_momentum = 0.9; // EMA factor for the appearance embedding
    bool use_low_conf_stage = false;  // second IoU-only pass over D_low
    bool head_iou_average = false;    // average body and head IoU in the paired stage
    kalman::MotionNoise noise;
};

void validate(const TrackerConfig& config);

enum class Stage { BodyHead, Body, Head };

/// Confirmed-track row emitted for one frame. The box is always a body box;
/// when only the head matched this frame it is the body filter's prediction.
struct TrackOutput {
    int frame = 0;
    int id = 0;
    BBox box;
    double confidence = 1.0;
};

struct AssoResult {
    std::vector<std::pair<int, int>> matches;  // (track index, detection index)
    std::vector<int> remaining_tracks;
    std::vector<int> remaining_detections;     // indices of unmatched high-confidence detections
};

/// One association stage: splits detections by confidence, builds the fused
/// IoU + appearance cost over the given tracks, gates on the IoU term and
/// solves the assignment. Pure; does not mutate the tracks.
AssoResult asso(const std::vector<Track>& tracks, const std::vector<int>& track_indices,
                const std::vector<PairedDetection>& detections,
                const std::vector<int>& detection_indices, Stage stage, const TrackerConfig& config);

/// Sequential per-sequence state machine implementing the three-stage
/// cascade: paired detections first, then leftover bodies, then leftover
/// heads against tracks with head history. New tracks start from unmatched
/// high-confidence paired or body-only detections, never from heads.
class Tracker {
  public:
    explicit Tracker(TrackerConfig config = {});

    /// Advances one frame. Frames must be strictly increasing; all detections
    /// must carry the given frame index.
    std::vector<TrackOutput> step(int frame, const std::vector<PairedDetection>& detections);

    const std::vector<Track>& tracks() const { return tracks_; }
    const TrackerConfig& config() const { return config_; }

  private:
    TrackerConfig config_;
    std::vector<Track> tracks_;  // live tracks only; removed tracks are dropped
    int next_id_ = 1;
    int last_frame_ = 0;

    void apply_match(Track& track, const PairedDetection& det, Stage stage);
};

/// Drops head parts from a detection stream, the body-only ablation input.
std::vector<PairedDetection> strip_heads(const std::vector<PairedDetection>& detections);

}  // namespace hbtrack
