#include "hbtrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hbtrack/assignment.hpp"

namespace hbtrack {
namespace {

constexpr int kConfirmHits = 2;
constexpr double kForbiddenCost = 1e9;
constexpr double kCostGate = 1e8;

double detection_score(const PairedDetection& det) {
    return det.body ? det.body->box.score : det.head->box.score;
}

const std::vector<double>& detection_embedding(const PairedDetection& det, Stage stage) {
    if (stage == Stage::Head) return det.head->embedding;
    return det.body->embedding;
}

void ema_update(std::vector<double>& appearance, const std::vector<double>& embedding, double momentum) {
    if (appearance.size() != embedding.size()) {
        appearance = embedding;
    } else {
        for (std::size_t k = 0; k < appearance.size(); ++k) {
            appearance[k] = momentum * appearance[k] + (1.0 - momentum) * embedding[k];
        }
    }
    double norm = 0.0;
    for (double v : appearance) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
        for (double& v : appearance) v /= norm;
    }
}

// IoU distance of a track/detection pair for the given stage; > 1 means the
// pair lacks the boxes the stage compares.
double stage_iou_distance(const Track& track, const PairedDetection& det, Stage stage,
                          const TrackerConfig& config) {
    switch (stage) {
        case Stage::BodyHead: {
            const double body_dist = 1.0 - iou(kalman::to_box(track.body_state), det.body->box);
            if (config.head_iou_average && track.head_state && det.head) {
                const double head_dist = 1.0 - iou(kalman::to_box(*track.head_state), det.head->box);
                return 0.5 * (body_dist + head_dist);
            }
            return body_dist;
        }
        case Stage::Body:
            return 1.0 - iou(kalman::to_box(track.body_state), det.body->box);
        case Stage::Head:
            return 1.0 - iou(kalman::to_box(*track.head_state), det.head->box);
    }
    return 2.0;
}

std::vector<std::pair<int, int>> match_once(const std::vector<Track>& tracks,
                                            const std::vector<int>& track_indices,
                                            const std::vector<PairedDetection>& detections,
                                            const std::vector<int>& det_indices, Stage stage,
                                            const TrackerConfig& config, bool iou_only) {
    std::vector<std::pair<int, int>> matches;
    if (track_indices.empty() || det_indices.empty()) return matches;

    CostMatrix m;
    m.rows = static_cast<int>(track_indices.size());
    m.cols = static_cast<int>(det_indices.size());
    m.gate = kCostGate;
    m.costs.resize(static_cast<std::size_t>(m.rows) * m.cols);
    for (int r = 0; r < m.rows; ++r) {
        const Track& track = tracks[track_indices[r]];
        for (int c = 0; c < m.cols; ++c) {
            const PairedDetection& det = detections[det_indices[c]];
            const double iou_dist = stage_iou_distance(track, det, stage, config);
            double cost;
            if (iou_dist > config.iou_gate) {
                cost = kForbiddenCost;
            } else if (iou_only) {
                cost = iou_dist;
            } else {
                const double emb_dist = cosine_distance(track.appearance, detection_embedding(det, stage));
                cost = config.fuse_lambda * iou_dist + (1.0 - config.fuse_lambda) * emb_dist;
            }
            m.costs[static_cast<std::size_t>(r) * m.cols + c] = cost;
        }
    }

    for (const auto& [r, c] : solve_assignment(m).matches) {
        matches.emplace_back(track_indices[r], det_indices[c]);
    }
    return matches;
}

}  // namespace

void validate(const TrackerConfig& config) {
    if (!(config.low_conf >= 0.0 && config.low_conf <= config.high_conf && config.high_conf <= 1.0)) {
        throw std::invalid_argument("TrackerConfig: need 0 <= low_conf <= high_conf <= 1");
    }
    if (!(config.fuse_lambda >= 0.0 && config.fuse_lambda <= 1.0)) {
        throw std::invalid_argument("TrackerConfig: fuse_lambda must be in [0, 1]");
    }
    if (config.max_age < 1) throw std::invalid_argument("TrackerConfig: max_age must be >= 1");
    if (!(config.appearance_momentum >= 0.0 && config.appearance_momentum <= 1.0)) {
        throw std::invalid_argument("TrackerConfig: appearance_momentum must be in [0, 1]");
    }
    if (!(config.iou_gate >= 0.0 && config.iou_gate <= 1.0)) {
        throw std::invalid_argument("TrackerConfig: iou_gate must be in [0, 1]");
    }
}

AssoResult asso(const std::vector<Track>& tracks, const std::vector<int>& track_indices,
                const std::vector<PairedDetection>& detections,
                const std::vector<int>& detection_indices, Stage stage, const TrackerConfig& config) {
    std::vector<int> high, low;
    for (int di : detection_indices) {
        const double score = detection_score(detections[di]);
        if (score >= config.high_conf) {
            high.push_back(di);
        } else if (score >= config.low_conf) {
            low.push_back(di);
        }
    }

    AssoResult result;
    result.matches = match_once(tracks, track_indices, detections, high, stage, config, false);

    std::vector<char> track_used(tracks.size(), 0), det_used(detections.size(), 0);
    for (const auto& [t, d] : result.matches) {
        track_used[t] = 1;
        det_used[d] = 1;
    }

    if (config.use_low_conf_stage && !low.empty()) {
        std::vector<int> leftover_tracks;
        for (int ti : track_indices) {
            if (!track_used[ti]) leftover_tracks.push_back(ti);
        }
        const auto second = match_once(tracks, leftover_tracks, detections, low, stage, config, true);
        for (const auto& [t, d] : second) {
            result.matches.emplace_back(t, d);
            track_used[t] = 1;
            det_used[d] = 1;
        }
    }

    for (int ti : track_indices) {
        if (!track_used[ti]) result.remaining_tracks.push_back(ti);
    }
    for (int di : high) {
        if (!det_used[di]) result.remaining_detections.push_back(di);
    }
    return result;
}

Tracker::Tracker(TrackerConfig config) : config_(config) { validate(config_); }

void Tracker::apply_match(Track& track, const PairedDetection& det, Stage stage) {
    switch (stage) {
        case Stage::BodyHead:
            track.body_state = kalman::update(track.body_state, det.body->box, config_.noise);
            if (track.head_state) {
                track.head_state = kalman::update(*track.head_state, det.head->box, config_.noise);
            } else {
                track.head_state = kalman::initiate(det.head->box, config_.noise);
            }
            break;
        case Stage::Body:
            track.body_state = kalman::update(track.body_state, det.body->box, config_.noise);
            break;
        case Stage::Head:
            track.head_state = kalman::update(*track.head_state, det.head->box, config_.noise);
            break;
    }
    ema_update(track.appearance, detection_embedding(det, stage), config_.appearance_momentum);
    track.frames_since_update = 0;
    track.hits += 1;
    if (track.status == TrackStatus::Tentative && track.hits >= kConfirmHits) {
        track.status = TrackStatus::Confirmed;
    }
}

std::vector<TrackOutput> Tracker::step(int frame, const std::vector<PairedDetection>& detections) {
    if (frame <= last_frame_) {
        throw std::invalid_argument("Tracker::step: frame indices must be strictly increasing");
    }
    for (const auto& det : detections) {
        if (!det.body && !det.head) {
            throw std::invalid_argument("Tracker::step: detection with neither body nor head");
        }
        if ((det.body && det.body->frame != frame) || (det.head && det.head->frame != frame)) {
            throw std::invalid_argument("Tracker::step: detection from a different frame");
        }
    }
    last_frame_ = frame;

    for (auto& track : tracks_) {
        track.body_state = kalman::predict(track.body_state, config_.noise);
        if (track.head_state) track.head_state = kalman::predict(*track.head_state, config_.noise);
    }

    std::vector<int> paired, body_only, head_only;
    for (int i = 0; i < static_cast<int>(detections.size()); ++i) {
        const auto& det = detections[i];
        if (det.body && det.head) {
            paired.push_back(i);
        } else if (det.body) {
            body_only.push_back(i);
        } else {
            head_only.push_back(i);
        }
    }

    std::vector<int> all_tracks(tracks_.size());
    for (std::size_t i = 0; i < tracks_.size(); ++i) all_tracks[i] = static_cast<int>(i);

    std::vector<char> matched(tracks_.size(), 0);
    std::vector<double> matched_conf(tracks_.size(), 1.0);
    auto run_stage = [&](const std::vector<int>& track_idx, const std::vector<int>& det_idx,
                         Stage stage) {
        AssoResult r = asso(tracks_, track_idx, detections, det_idx, stage, config_);
        for (const auto& [t, d] : r.matches) {
            apply_match(tracks_[t], detections[d], stage);
            matched[t] = 1;
            matched_conf[t] = detection_score(detections[d]);
        }
        return r;
    };

    const AssoResult first = run_stage(all_tracks, paired, Stage::BodyHead);
    const AssoResult second = run_stage(first.remaining_tracks, body_only, Stage::Body);

    std::vector<int> head_eligible;
    for (int ti : second.remaining_tracks) {
        if (tracks_[ti].head_state) head_eligible.push_back(ti);
    }
    run_stage(head_eligible, head_only, Stage::Head);

    // Lifecycle: tentative tracks die on their first miss, confirmed ones
    // after more than max_age unmatched frames.
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        if (matched[i]) continue;
        Track& track = tracks_[i];
        track.frames_since_update += 1;
        if (track.status == TrackStatus::Tentative || track.frames_since_update > config_.max_age) {
            track.status = TrackStatus::Removed;
        }
    }

    std::vector<TrackOutput> outputs;
    std::vector<Track> alive;
    alive.reserve(tracks_.size());
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        Track& track = tracks_[i];
        if (track.status == TrackStatus::Removed) continue;
        if (matched[i] && track.status == TrackStatus::Confirmed) {
            outputs.push_back({frame, track.id, kalman::to_box(track.body_state), matched_conf[i]});
        }
        alive.push_back(std::move(track));
    }
    tracks_ = std::move(alive);

    // New tracks from leftover paired and body-only detections only.
    auto spawn = [&](const std::vector<int>& det_idx) {
        for (int di : det_idx) {
            const PairedDetection& det = detections[di];
            Track track;
            track.id = next_id_++;
            track.body_state = kalman::initiate(det.body->box, config_.noise);
            if (det.head) track.head_state = kalman::initiate(det.head->box, config_.noise);
            ema_update(track.appearance, det.body->embedding, 0.0);
            track.hits = 1;
            track.status = TrackStatus::Tentative;
            tracks_.push_back(std::move(track));
        }
    };
    spawn(first.remaining_detections);
    spawn(second.remaining_detections);

    return outputs;
}

std::vector<PairedDetection> strip_heads(const std::vector<PairedDetection>& detections) {
    std::vector<PairedDetection> out;
    for (const auto& det : detections) {
        if (det.body) out.push_back({det.body, std::nullopt});
    }
    return out;
}

}  // namespace hbtrack
