#pragma once

#include <string>
#include <vector>

#include "hbtrack/pairing.hpp"

namespace hbtrack::tiling {

struct Window {
    double x = 0.0;
    double y = 0.0;
    double size = 0.0;
};

/// Square sliding windows over a large frame, one set per scale. Windows near
/// the far edges are shifted inward so tile size stays constant; every pixel
/// is covered by at least one window of each usable scale.
struct TilePlan {
    double image_width = 0.0;
    double image_height = 0.0;
    std::vector<double> scales;
    double overlap = 0.0;
    std::vector<Window> windows;
    std::vector<std::string> warnings;  // one entry per skipped scale
};

/// Stride is round(scale * (1 - overlap)); origins run at stride multiples
/// with a final window shifted to abut the image edge. Scales that do not fit
/// inside the image are skipped with a warning record.
TilePlan plan(double image_width, double image_height, const std::vector<double>& scales,
              double overlap);

/// Translates tile-local detections into global frame coordinates using each
/// detection's tile_id as an index into plan.windows. Boxes that exceed their
/// tile bounds are rejected.
std::vector<Detection> lift(const std::vector<Detection>& tile_detections, const TilePlan& plan);

/// Cross-tile, cross-scale dedup: per-part NMS at the given threshold over
/// the gathered global detections.
std::vector<Detection> fuse(const std::vector<Detection>& detections, double nms_threshold = 0.7);

}  // namespace hbtrack::tiling
