#pragma once

#include <optional>
#include <vector>

#include "hbtrack/geometry.hpp"

namespace hbtrack {

enum class Part { Body, Head };

/// A single detector output: box, part label, appearance/association
/// embedding, and the frame it came from.
struct Detection {
    BBox box;
    Part part = Part::Body;
    std::vector<double> embedding;
    int frame = 0;
    int tile_id = -1;    // -1 when not tile-local
    int pair_hint = -1;  // optional detector-emitted pair key
};

/// Body and/or head detection for one person in one frame. At least one part
/// is present; when both are, they come from the same frame.
struct PairedDetection {
    std::optional<Detection> body;
    std::optional<Detection> head;

    int frame() const { return body ? body->frame : head->frame; }
};

/// Cosine distance 1 - cos(a, b) in [0, 2]; a zero-norm input gives 1.
/// Throws std::invalid_argument on dimension mismatch.
double cosine_distance(const std::vector<double>& a, const std::vector<double>& b);

double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b);

/// Hungarian matching on body-head embedding distances, gated at
/// max_distance. Unmatched detections come back as single-part records; every
/// input appears in exactly one output record.
std::vector<PairedDetection> pair_by_embedding(const std::vector<Detection>& bodies,
                                               const std::vector<Detection>& heads,
                                               double max_distance);

/// Position baseline: Hungarian on 1 - IoU(head box, body box); head-body
/// pairs with IoU below min_iou stay unmatched.
std::vector<PairedDetection> pair_by_position(const std::vector<Detection>& bodies,
                                              const std::vector<Detection>& heads, double min_iou);

}  // namespace hbtrack
