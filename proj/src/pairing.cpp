#include "hbtrack/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hbtrack/assignment.hpp"

namespace hbtrack {
namespace {

void check_one_frame(const std::vector<Detection>& bodies, const std::vector<Detection>& heads) {
    int frame = 0;
    bool have = false;
    auto visit = [&](const std::vector<Detection>& dets, Part expected) {
        for (const auto& d : dets) {
            if (d.part != expected) throw std::invalid_argument("pairing: detection in wrong part list");
            if (!have) {
                frame = d.frame;
                have = true;
            } else if (d.frame != frame) {
                throw std::invalid_argument("pairing: detections from mixed frames");
            }
        }
    };
    visit(bodies, Part::Body);
    visit(heads, Part::Head);
}

std::vector<PairedDetection> assemble(const std::vector<Detection>& bodies,
                                      const std::vector<Detection>& heads,
                                      const AssignmentResult& assignment) {
    std::vector<PairedDetection> out;
    out.reserve(bodies.size() + heads.size() - assignment.matches.size());
    for (const auto& [bi, hi] : assignment.matches) {
        out.push_back({bodies[bi], heads[hi]});
    }
    for (int bi : assignment.unmatched_rows) {
        out.push_back({bodies[bi], std::nullopt});
    }
    for (int hi : assignment.unmatched_cols) {
        out.push_back({std::nullopt, heads[hi]});
    }
    return out;
}

}  // namespace

double cosine_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine_distance: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    if (na <= 0.0 || nb <= 0.0) return 1.0;
    // clamp away the tiny negatives roundoff produces for near-parallel inputs
    return std::max(0.0, 1.0 - dot / (std::sqrt(na) * std::sqrt(nb)));
}

double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("euclidean_distance: dimension mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

std::vector<PairedDetection> pair_by_embedding(const std::vector<Detection>& bodies,
                                               const std::vector<Detection>& heads,
                                               double max_distance) {
    check_one_frame(bodies, heads);
    CostMatrix m;
    m.rows = static_cast<int>(bodies.size());
    m.cols = static_cast<int>(heads.size());
    m.gate = max_distance;
    m.costs.resize(static_cast<std::size_t>(m.rows) * m.cols);
    for (int b = 0; b < m.rows; ++b) {
        for (int h = 0; h < m.cols; ++h) {
            m.costs[static_cast<std::size_t>(b) * m.cols + h] =
                euclidean_distance(bodies[b].embedding, heads[h].embedding);
        }
    }
    return assemble(bodies, heads, solve_assignment(m));
}

std::vector<PairedDetection> pair_by_position(const std::vector<Detection>& bodies,
                                              const std::vector<Detection>& heads, double min_iou) {
    check_one_frame(bodies, heads);
    CostMatrix m;
    m.rows = static_cast<int>(bodies.size());
    m.cols = static_cast<int>(heads.size());
    m.gate = 1.0 - min_iou;  // cost above the gate means IoU below min_iou
    m.costs.resize(static_cast<std::size_t>(m.rows) * m.cols);
    for (int b = 0; b < m.rows; ++b) {
        for (int h = 0; h < m.cols; ++h) {
            m.costs[static_cast<std::size_t>(b) * m.cols + h] = 1.0 - iou(heads[h].box, bodies[b].box);
        }
    }
    return assemble(bodies, heads, solve_assignment(m));
}

}  // namespace hbtrack
