#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hbtrack/aml.hpp"
#include "hbtrack/metrics.hpp"
#include "hbtrack/pairing.hpp"
#include "hbtrack/scenario.hpp"
#include "hbtrack/tiling.hpp"
#include "hbtrack/tracker.hpp"

namespace hbtrack::io {

/// Writes through a temp file in the same directory and renames into place,
/// so a failed run never leaves a truncated file behind.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

/// Detection stream: JSON Lines, one header object declaring the embedding
/// dimension, then one record per detection.
struct DetectionStream {
    int embedding_dim = 0;
    std::map<int, std::vector<Detection>> frames;  // ascending frame order
};

void write_detections(const std::filesystem::path& path, const std::vector<Detection>& detections,
                      int embedding_dim);
DetectionStream read_detections(const std::filesystem::path& path);

/// Paired detections: same header, records with optional body/head objects.
void write_paired(const std::filesystem::path& path,
                  const std::vector<PairedDetection>& records, int embedding_dim);
std::vector<PairedDetection> read_paired(const std::filesystem::path& path);

/// MOTChallenge CSV rows: frame,id,x,y,w,h,conf,-1,-1,-1.
void write_results(const std::filesystem::path& path, const std::vector<TrackOutput>& rows);

enum class MotKind { Results, GroundTruth };

/// Reads result or gt CSV into frame-indexed trajectories. Ground-truth rows
/// with an inactive flag (seventh column 0) are skipped.
metrics::TrajectorySet read_mot_boxes(const std::filesystem::path& path, MotKind kind);

/// Ground truth emitted by the scenario generator: body boxes as MOT gt rows
/// (class 1, visibility in the last column) plus a JSONL pair file carrying
/// body and head boxes per identity per frame.
void write_mot_gt(const std::filesystem::path& path,
                  const std::vector<scenario::GroundTruthEntry>& truth);
void write_gt_pairs(const std::filesystem::path& path,
                    const std::vector<scenario::GroundTruthEntry>& truth);
std::vector<metrics::GtPair> read_gt_pairs(const std::filesystem::path& path);

void write_tile_plan(const std::filesystem::path& path, const tiling::TilePlan& plan);
tiling::TilePlan read_tile_plan(const std::filesystem::path& path);

std::vector<aml::LossBatch> read_loss_batches(const std::filesystem::path& path);
void write_loss_batches(const std::filesystem::path& path,
                        const std::vector<aml::LossBatch>& batches);

std::string report_to_json(const metrics::EvalReport& report);

}  // namespace hbtrack::io
