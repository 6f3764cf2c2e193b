#include "hbtrack/tiling.hpp"

#include <cmath>
#include <stdexcept>

namespace hbtrack::tiling {
namespace {

// Window origins along one axis: stride multiples while the window fits,
// then one origin shifted to abut the far edge if coverage is incomplete.
std::vector<double> axis_origins(double extent, double size, double stride) {
    std::vector<double> origins;
    for (double o = 0.0; o + size <= extent; o += stride) origins.push_back(o);
    if (origins.empty() || origins.back() + size < extent) {
        origins.push_back(extent - size);
    }
    return origins;
}

}  // namespace

TilePlan plan(double image_width, double image_height, const std::vector<double>& scales,
              double overlap) {
    if (!(image_width > 0.0) || !(image_height > 0.0)) {
        throw std::invalid_argument("tiling::plan: image dimensions must be positive");
    }
    if (!(overlap >= 0.0 && overlap < 1.0)) {
        throw std::invalid_argument("tiling::plan: overlap must be in [0, 1)");
    }

    TilePlan p;
    p.image_width = image_width;
    p.image_height = image_height;
    p.overlap = overlap;

    for (double scale : scales) {
        if (!(scale > 0.0)) throw std::invalid_argument("tiling::plan: scales must be positive");
        if (scale > image_width || scale > image_height) {
            p.warnings.push_back("scale " + std::to_string(scale) +
                                 " does not fit inside the image; skipped");
            continue;
        }
        p.scales.push_back(scale);
        const double stride = std::max(1.0, std::round(scale * (1.0 - overlap)));
        for (double y : axis_origins(image_height, scale, stride)) {
            for (double x : axis_origins(image_width, scale, stride)) {
                p.windows.push_back({x, y, scale});
            }
        }
    }
    return p;
}

std::vector<Detection> lift(const std::vector<Detection>& tile_detections, const TilePlan& plan) {
    std::vector<Detection> out;
    out.reserve(tile_detections.size());
    for (const auto& det : tile_detections) {
        if (det.tile_id < 0 || det.tile_id >= static_cast<int>(plan.windows.size())) {
            throw std::invalid_argument("tiling::lift: detection tile_id out of range");
        }
        const Window& w = plan.windows[det.tile_id];
        const BBox& b = det.box;
        if (b.x < 0.0 || b.y < 0.0 || b.right() > w.size || b.bottom() > w.size) {
            throw std::invalid_argument("tiling::lift: box exceeds its tile bounds");
        }
        Detection lifted = det;
        lifted.box.x += w.x;
        lifted.box.y += w.y;
        lifted.tile_id = -1;
        out.push_back(std::move(lifted));
    }
    return out;
}

std::vector<Detection> fuse(const std::vector<Detection>& detections, double nms_threshold) {
    std::vector<Detection> out;
    for (Part part : {Part::Body, Part::Head}) {
        std::vector<std::size_t> part_idx;
        std::vector<BBox> boxes;
        for (std::size_t i = 0; i < detections.size(); ++i) {
            if (detections[i].part == part) {
                part_idx.push_back(i);
                boxes.push_back(detections[i].box);
            }
        }
        for (std::size_t keep : nms_keep_indices(boxes, nms_threshold)) {
            out.push_back(detections[part_idx[keep]]);
        }
    }
    return out;
}

}  // namespace hbtrack::tiling
