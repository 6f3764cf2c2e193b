#include "hbtrack/metrics.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "hbtrack/assignment.hpp"

namespace hbtrack::metrics {
namespace {

void check_unique_ids(const TrajectorySet& set, const char* name) {
    for (const auto& [frame, boxes] : set) {
        std::set<int> seen;
        for (const auto& entry : boxes) {
            if (!seen.insert(entry.id).second) {
                throw std::invalid_argument(std::string(name) + ": duplicate id " +
                                            std::to_string(entry.id) + " in frame " +
                                            std::to_string(frame));
            }
        }
    }
}

// Min-cost matching on 1 - IoU, IoU below the threshold inadmissible.
AssignmentResult match_boxes(const std::vector<BBox>& rows, const std::vector<BBox>& cols,
                             double iou_min) {
    CostMatrix m;
    m.rows = static_cast<int>(rows.size());
    m.cols = static_cast<int>(cols.size());
    m.gate = 1.0 - iou_min;
    m.costs.resize(static_cast<std::size_t>(m.rows) * m.cols);
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) {
            m.costs[static_cast<std::size_t>(r) * m.cols + c] = 1.0 - iou(rows[r], cols[c]);
        }
    }
    return solve_assignment(m);
}

}  // namespace

EvalReport evaluate(const TrajectorySet& gt, const TrajectorySet& hyp, double iou_match) {
    if (!(iou_match > 0.0 && iou_match <= 1.0)) {
        throw std::invalid_argument("evaluate: iou_match must be in (0, 1]");
    }
    check_unique_ids(gt, "gt");
    check_unique_ids(hyp, "hyp");

    EvalReport report;
    std::unordered_map<int, int> last_match;  // gt id -> last matched hyp id
    // identity-overlap counts for IDF1: (gt id, hyp id) -> matched frames
    std::map<std::pair<int, int>, int> overlap;
    int hyp_count = 0;

    std::set<int> frames;
    for (const auto& [f, _] : gt) frames.insert(f);
    for (const auto& [f, _] : hyp) frames.insert(f);

    static const std::vector<IdBox> kEmpty;
    for (int frame : frames) {
        auto git = gt.find(frame);
        auto hit = hyp.find(frame);
        const auto& gt_boxes = git != gt.end() ? git->second : kEmpty;
        const auto& hyp_boxes = hit != hyp.end() ? hit->second : kEmpty;
        report.gt_count += static_cast<int>(gt_boxes.size());
        hyp_count += static_cast<int>(hyp_boxes.size());

        std::unordered_map<int, int> hyp_pos;  // hyp id -> index this frame
        for (int i = 0; i < static_cast<int>(hyp_boxes.size()); ++i) hyp_pos[hyp_boxes[i].id] = i;

        std::vector<char> gt_done(gt_boxes.size(), 0), hyp_done(hyp_boxes.size(), 0);
        int matched = 0;

        // Continuity: keep last frame's correspondence when still valid.
        for (int i = 0; i < static_cast<int>(gt_boxes.size()); ++i) {
            auto prev = last_match.find(gt_boxes[i].id);
            if (prev == last_match.end()) continue;
            auto pos = hyp_pos.find(prev->second);
            if (pos == hyp_pos.end() || hyp_done[pos->second]) continue;
            if (iou(gt_boxes[i].box, hyp_boxes[pos->second].box) >= iou_match) {
                gt_done[i] = 1;
                hyp_done[pos->second] = 1;
                ++matched;
                overlap[{gt_boxes[i].id, prev->second}] += 1;
            }
        }

        // Fresh matches for what is left.
        std::vector<BBox> gt_rest, hyp_rest;
        std::vector<int> gt_map, hyp_map;
        for (int i = 0; i < static_cast<int>(gt_boxes.size()); ++i) {
            if (!gt_done[i]) {
                gt_rest.push_back(gt_boxes[i].box);
                gt_map.push_back(i);
            }
        }
        for (int i = 0; i < static_cast<int>(hyp_boxes.size()); ++i) {
            if (!hyp_done[i]) {
                hyp_rest.push_back(hyp_boxes[i].box);
                hyp_map.push_back(i);
            }
        }
        for (const auto& [r, c] : match_boxes(gt_rest, hyp_rest, iou_match).matches) {
            const int gi = gt_map[r];
            const int hi = hyp_map[c];
            const int gt_id = gt_boxes[gi].id;
            const int hyp_id = hyp_boxes[hi].id;
            ++matched;
            overlap[{gt_id, hyp_id}] += 1;
            auto prev = last_match.find(gt_id);
            if (prev != last_match.end() && prev->second != hyp_id) {
                report.id_switches += 1;
            }
            last_match[gt_id] = hyp_id;
        }

        report.misses += static_cast<int>(gt_boxes.size()) - matched;
        report.false_positives += static_cast<int>(hyp_boxes.size()) - matched;
    }

    if (report.gt_count == 0) {
        throw std::invalid_argument("evaluate: ground truth is empty");
    }
    report.mota = 1.0 - static_cast<double>(report.misses + report.false_positives +
                                            report.id_switches) /
                            report.gt_count;

    // IDF1: optimal one-to-one identity mapping maximizing matched frames.
    std::vector<int> gt_ids, hyp_ids;
    {
        std::set<int> g, h;
        for (const auto& [key, _] : overlap) {
            g.insert(key.first);
            h.insert(key.second);
        }
        gt_ids.assign(g.begin(), g.end());
        hyp_ids.assign(h.begin(), h.end());
    }
    int idtp = 0;
    if (!gt_ids.empty() && !hyp_ids.empty()) {
        // Maximize total overlap by minimizing (max_overlap - overlap) with
        // every pair admissible: zero-overlap pairs cost the maximum but add
        // nothing to IDTP, so full-cardinality optima realize the best total.
        int max_overlap = 0;
        for (const auto& [_, count] : overlap) max_overlap = std::max(max_overlap, count);
        CostMatrix m;
        m.rows = static_cast<int>(gt_ids.size());
        m.cols = static_cast<int>(hyp_ids.size());
        m.costs.resize(static_cast<std::size_t>(m.rows) * m.cols);
        for (int r = 0; r < m.rows; ++r) {
            for (int c = 0; c < m.cols; ++c) {
                auto it = overlap.find({gt_ids[r], hyp_ids[c]});
                const int count = it != overlap.end() ? it->second : 0;
                m.costs[static_cast<std::size_t>(r) * m.cols + c] =
                    static_cast<double>(max_overlap - count);
            }
        }
        for (const auto& [r, c] : solve_assignment(m).matches) {
            auto it = overlap.find({gt_ids[r], hyp_ids[c]});
            if (it != overlap.end()) idtp += it->second;
        }
    }
    report.idf1 = report.gt_count + hyp_count > 0
                      ? 2.0 * idtp / static_cast<double>(report.gt_count + hyp_count)
                      : 0.0;
    return report;
}

double pair_mismatch_rate(const std::vector<GtPair>& gt_pairs,
                          const std::vector<PairedDetection>& hyp_pairs) {
    std::map<int, std::vector<const GtPair*>> gt_by_frame;
    for (const auto& p : gt_pairs) gt_by_frame[p.frame].push_back(&p);
    std::map<int, std::vector<std::size_t>> hyp_by_frame;
    for (std::size_t i = 0; i < hyp_pairs.size(); ++i) {
        hyp_by_frame[hyp_pairs[i].frame()].push_back(i);
    }

    long both_detected = 0;
    long mismatched = 0;
    for (const auto& [frame, pairs] : gt_by_frame) {
        auto hit = hyp_by_frame.find(frame);
        if (hit == hyp_by_frame.end()) continue;

        // Gather hypothesis parts with a back-reference to their record.
        std::vector<BBox> hyp_bodies, hyp_heads;
        std::vector<std::size_t> body_record, head_record;
        for (std::size_t idx : hit->second) {
            const auto& rec = hyp_pairs[idx];
            if (rec.body) {
                hyp_bodies.push_back(rec.body->box);
                body_record.push_back(idx);
            }
            if (rec.head) {
                hyp_heads.push_back(rec.head->box);
                head_record.push_back(idx);
            }
        }
        std::vector<BBox> gt_bodies, gt_heads;
        for (const GtPair* p : pairs) {
            gt_bodies.push_back(p->body);
            gt_heads.push_back(p->head);
        }

        const auto body_match = match_boxes(gt_bodies, hyp_bodies, 0.5);
        const auto head_match = match_boxes(gt_heads, hyp_heads, 0.5);
        std::vector<int> body_of_gt(pairs.size(), -1), head_of_gt(pairs.size(), -1);
        for (const auto& [r, c] : body_match.matches) body_of_gt[r] = static_cast<int>(c);
        for (const auto& [r, c] : head_match.matches) head_of_gt[r] = static_cast<int>(c);

        for (std::size_t g = 0; g < pairs.size(); ++g) {
            if (body_of_gt[g] < 0 || head_of_gt[g] < 0) continue;
            ++both_detected;
            if (body_record[body_of_gt[g]] != head_record[head_of_gt[g]]) ++mismatched;
        }
    }
    return both_detected > 0 ? static_cast<double>(mismatched) / both_detected : 0.0;
}

}  // namespace hbtrack::metrics
