#pragma once

#include <map>
#include <optional>
#include <vector>

#include "hbtrack/geometry.hpp"
#include "hbtrack/pairing.hpp"

namespace hbtrack::metrics {

struct IdBox {
    int id = 0;
    BBox box;
};

/// Frame-indexed trajectories; ids must be unique within each frame.
using TrajectorySet = std::map<int, std::vector<IdBox>>;

struct EvalReport {
    double mota = 0.0;
    double idf1 = 0.0;
    int id_switches = 0;
    int false_positives = 0;
    int misses = 0;
    int gt_count = 0;
    std::optional<double> pair_mismatch_rate;
};

/// CLEAR-MOT with continuity-preferring per-frame matching (a pair matched in
/// the previous frame is kept while still above iou_match), plus IDF1 from
/// the optimal global identity mapping. MOTA = 1 - (FN + FP + IDSW) / GT and
/// may be negative.
EvalReport evaluate(const TrajectorySet& gt, const TrajectorySet& hyp, double iou_match = 0.5);

/// Ground-truth body-head pair for one identity in one frame.
struct GtPair {
    int frame = 0;
    int id = 0;
    BBox body;
    BBox head;
};

/// Fraction of ground-truth pairs whose body and head were both detected
/// (aligned by IoU >= 0.5) but ended up in different output records. Returns
/// 0 when no pair had both parts detected.
double pair_mismatch_rate(const std::vector<GtPair>& gt_pairs,
                          const std::vector<PairedDetection>& hyp_pairs);

}  // namespace hbtrack::metrics
