#include "hbtrack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hbtrack {

bool box_is_valid(const BBox& b) {
    return std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.w) && std::isfinite(b.h) &&
           b.w > 0.0 && b.h > 0.0 && b.score >= 0.0 && b.score <= 1.0;
}

double iou(const BBox& a, const BBox& b) {
    const double ix = std::max(a.x, b.x);
    const double iy = std::max(a.y, b.y);
    const double ix2 = std::min(a.right(), b.right());
    const double iy2 = std::min(a.bottom(), b.bottom());

    const double iw = std::max(0.0, ix2 - ix);
    const double ih = std::max(0.0, iy2 - iy);
    const double inter = iw * ih;
    if (inter <= 0.0) return 0.0;

    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

double center_distance(const BBox& a, const BBox& b, double image_width, double image_height) {
    const double diag = std::hypot(image_width, image_height);
    if (!(diag > 0.0)) {
        throw std::invalid_argument("center_distance: image diagonal must be positive");
    }
    return std::hypot(a.cx() - b.cx(), a.cy() - b.cy()) / diag;
}

std::vector<std::size_t> nms_keep_indices(const std::vector<BBox>& boxes, double iou_threshold) {
    std::vector<std::size_t> order(boxes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return boxes[i].score > boxes[j].score;
    });

    std::vector<std::size_t> kept;
    std::vector<char> suppressed(boxes.size(), 0);
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const std::size_t i = order[oi];
        if (suppressed[i]) continue;
        kept.push_back(i);
        for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
            const std::size_t j = order[oj];
            if (!suppressed[j] && iou(boxes[i], boxes[j]) > iou_threshold) {
                suppressed[j] = 1;
            }
        }
    }
    return kept;
}

std::vector<BBox> nms(const std::vector<BBox>& boxes, double iou_threshold) {
    std::vector<BBox> out;
    for (std::size_t i : nms_keep_indices(boxes, iou_threshold)) {
        out.push_back(boxes[i]);
    }
    return out;
}

}  // namespace hbtrack
