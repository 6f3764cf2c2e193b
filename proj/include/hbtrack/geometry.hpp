#pragma once

#include <cstddef>
#include <vector>

namespace hbtrack {

/// Axis-aligned box, top-left corner plus extent, with a detector confidence.
/// Valid boxes have w > 0, h > 0 and score in [0, 1].
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    double score = 1.0;

    double right() const { return x + w; }
    double bottom() const { return y + h; }
    double cx() const { return x + 0.5 * w; }
    double cy() const { return y + 0.5 * h; }
    double area() const { return w * h; }
};

bool box_is_valid(const BBox& b);

/// Intersection over union. Disjoint boxes give 0, identical boxes 1.
double iou(const BBox& a, const BBox& b);

/// Euclidean distance between box centers, normalized by the diagonal of the
/// enclosing image so the value is scale-free. Throws std::invalid_argument
/// if the image diagonal is not positive.
double center_distance(const BBox& a, const BBox& b, double image_width, double image_height);

/// Greedy score-descending non-maximum suppression. A box is suppressed when
/// its IoU with an already kept box exceeds the threshold. Score ties keep
/// the box with the smaller original index. Returns indices into `boxes`,
/// ordered by descending score.
std::vector<std::size_t> nms_keep_indices(const std::vector<BBox>& boxes, double iou_threshold);

/// Same as nms_keep_indices but returns the surviving boxes.
std::vector<BBox> nms(const std::vector<BBox>& boxes, double iou_threshold);

}  // namespace hbtrack
