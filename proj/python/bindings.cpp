#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hbtrack/aml.hpp"
#include "hbtrack/assignment.hpp"
#include "hbtrack/metrics.hpp"
#include "hbtrack/pairing.hpp"
#include "hbtrack/scenario.hpp"
#include "hbtrack/tiling.hpp"
#include "hbtrack/tracker.hpp"

namespace py = pybind11;
using namespace hbtrack;

PYBIND11_MODULE(_hbtrack, m) {
    m.doc() = "head-body multi-object tracking core";

    // geometry
    py::class_<BBox>(m, "BBox")
        .def(py::init<>())
        .def(py::init([](double x, double y, double w, double h, double score) {
                 return BBox{x, y, w, h, score};
             }),
             py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"), py::arg("score") = 1.0)
        .def_readwrite("x", &BBox::x)
        .def_readwrite("y", &BBox::y)
        .def_readwrite("w", &BBox::w)
        .def_readwrite("h", &BBox::h)
        .def_readwrite("score", &BBox::score)
        .def("__repr__", [](const BBox& b) {
            return "BBox(" + std::to_string(b.x) + ", " + std::to_string(b.y) + ", " +
                   std::to_string(b.w) + ", " + std::to_string(b.h) + ")";
        });
    m.def("iou", &iou, py::arg("a"), py::arg("b"));
    m.def("center_distance", &center_distance, py::arg("a"), py::arg("b"), py::arg("image_width"),
          py::arg("image_height"));
    m.def("nms", &nms, py::arg("boxes"), py::arg("iou_threshold"));

    // assignment
    py::class_<AssignmentResult>(m, "AssignmentResult")
        .def_readonly("matches", &AssignmentResult::matches)
        .def_readonly("unmatched_rows", &AssignmentResult::unmatched_rows)
        .def_readonly("unmatched_cols", &AssignmentResult::unmatched_cols)
        .def_readonly("total_cost", &AssignmentResult::total_cost);
    m.def(
        "solve_assignment",
        [](const std::vector<std::vector<double>>& costs, double gate) {
            CostMatrix m;
            m.rows = static_cast<int>(costs.size());
            m.cols = m.rows > 0 ? static_cast<int>(costs[0].size()) : 0;
            for (const auto& row : costs) {
                if (static_cast<int>(row.size()) != m.cols) {
                    throw std::invalid_argument("solve_assignment: ragged cost matrix");
                }
                m.costs.insert(m.costs.end(), row.begin(), row.end());
            }
            m.gate = gate;
            return solve_assignment(m);
        },
        py::arg("costs"), py::arg("gate") = std::numeric_limits<double>::infinity());

    // loss kernel
    py::class_<aml::LossBatch>(m, "LossBatch")
        .def(py::init<>())
        .def_readwrite("body_embeddings", &aml::LossBatch::body_embeddings)
        .def_readwrite("head_embeddings", &aml::LossBatch::head_embeddings)
        .def_readwrite("body_identity", &aml::LossBatch::body_identity)
        .def_readwrite("head_identity", &aml::LossBatch::head_identity)
        .def_readwrite("body_box_distances", &aml::LossBatch::body_box_distances)
        .def_readwrite("head_box_distances", &aml::LossBatch::head_box_distances);
    py::class_<aml::LossWeights>(m, "LossWeights")
        .def(py::init<>())
        .def_readwrite("mu", &aml::LossWeights::mu)
        .def_readwrite("beta", &aml::LossWeights::beta)
        .def_readwrite("delta", &aml::LossWeights::delta)
        .def_readwrite("sigma", &aml::LossWeights::sigma)
        .def_readwrite("tau", &aml::LossWeights::tau)
        .def_readwrite("literal_sums", &aml::LossWeights::literal_sums);
    py::class_<aml::Gradient>(m, "Gradient")
        .def_readonly("body", &aml::Gradient::body)
        .def_readonly("head", &aml::Gradient::head);
    m.def("pull_loss", &aml::pull_loss, py::arg("batch"), py::arg("weights") = aml::LossWeights{});
    m.def("push_loss", &aml::push_loss, py::arg("batch"), py::arg("weights") = aml::LossWeights{});
    m.def("aml_loss", &aml::total_loss, py::arg("batch"), py::arg("weights") = aml::LossWeights{});
    m.def("aml_gradient", &aml::gradient, py::arg("batch"), py::arg("weights") = aml::LossWeights{});
    m.def("loss_batch_to_json", &aml::batch_to_json, py::arg("batch"));
    m.def("loss_batch_from_json", &aml::batch_from_json, py::arg("line"));

    // detections and pairing
    py::enum_<Part>(m, "Part").value("Body", Part::Body).value("Head", Part::Head);
    py::class_<Detection>(m, "Detection")
        .def(py::init<>())
        .def_readwrite("box", &Detection::box)
        .def_readwrite("part", &Detection::part)
        .def_readwrite("embedding", &Detection::embedding)
        .def_readwrite("frame", &Detection::frame)
        .def_readwrite("tile_id", &Detection::tile_id)
        .def_readwrite("pair_hint", &Detection::pair_hint);
    py::class_<PairedDetection>(m, "PairedDetection")
        .def(py::init<>())
        .def_readwrite("body", &PairedDetection::body)
        .def_readwrite("head", &PairedDetection::head)
        .def("frame", &PairedDetection::frame);
    m.def("pair_by_embedding", &pair_by_embedding, py::arg("bodies"), py::arg("heads"),
          py::arg("max_distance") = 2.0);
    m.def("pair_by_position", &pair_by_position, py::arg("bodies"), py::arg("heads"),
          py::arg("min_iou") = 0.1);

    // tracker
    py::class_<TrackerConfig>(m, "TrackerConfig")
        .def(py::init<>())
        .def_readwrite("high_conf", &TrackerConfig::high_conf)
        .def_readwrite("low_conf", &TrackerConfig::low_conf)
        .def_readwrite("iou_gate", &TrackerConfig::iou_gate)
        .def_readwrite("fuse_lambda", &TrackerConfig::fuse_lambda)
        .def_readwrite("max_age", &TrackerConfig::max_age)
        .def_readwrite("appearance_momentum", &TrackerConfig::appearance_momentum)
        .def_readwrite("use_low_conf_stage", &TrackerConfig::use_low_conf_stage)
        .def_readwrite("head_iou_average", &TrackerConfig::head_iou_average);
    py::class_<TrackOutput>(m, "TrackOutput")
        .def_readonly("frame", &TrackOutput::frame)
        .def_readonly("id", &TrackOutput::id)
        .def_readonly("box", &TrackOutput::box)
        .def_readonly("confidence", &TrackOutput::confidence);
    py::class_<Tracker>(m, "Tracker")
        .def(py::init<TrackerConfig>(), py::arg("config") = TrackerConfig{})
        .def("step", &Tracker::step, py::arg("frame"), py::arg("detections"));
    m.def("strip_heads", &strip_heads, py::arg("detections"));

    // tiling
    py::class_<tiling::Window>(m, "Window")
        .def_readonly("x", &tiling::Window::x)
        .def_readonly("y", &tiling::Window::y)
        .def_readonly("size", &tiling::Window::size);
    py::class_<tiling::TilePlan>(m, "TilePlan")
        .def_readonly("image_width", &tiling::TilePlan::image_width)
        .def_readonly("image_height", &tiling::TilePlan::image_height)
        .def_readonly("scales", &tiling::TilePlan::scales)
        .def_readonly("overlap", &tiling::TilePlan::overlap)
        .def_readonly("windows", &tiling::TilePlan::windows)
        .def_readonly("warnings", &tiling::TilePlan::warnings);
    m.def("plan_tiles", &tiling::plan, py::arg("image_width"), py::arg("image_height"),
          py::arg("scales"), py::arg("overlap") = 0.3);
    m.def("lift_detections", &tiling::lift, py::arg("tile_detections"), py::arg("plan"));
    m.def("fuse_detections", &tiling::fuse, py::arg("detections"), py::arg("nms_threshold") = 0.7);

    // metrics
    py::class_<metrics::EvalReport>(m, "EvalReport")
        .def_readonly("mota", &metrics::EvalReport::mota)
        .def_readonly("idf1", &metrics::EvalReport::idf1)
        .def_readonly("id_switches", &metrics::EvalReport::id_switches)
        .def_readonly("false_positives", &metrics::EvalReport::false_positives)
        .def_readonly("misses", &metrics::EvalReport::misses)
        .def_readonly("gt_count", &metrics::EvalReport::gt_count)
        .def_readonly("pair_mismatch_rate", &metrics::EvalReport::pair_mismatch_rate);
    m.def(
        "evaluate",
        [](const std::map<int, std::vector<std::pair<int, BBox>>>& gt,
           const std::map<int, std::vector<std::pair<int, BBox>>>& hyp, double iou_match) {
            auto convert = [](const std::map<int, std::vector<std::pair<int, BBox>>>& in) {
                metrics::TrajectorySet out;
                for (const auto& [frame, boxes] : in) {
                    for (const auto& [id, box] : boxes) out[frame].push_back({id, box});
                }
                return out;
            };
            return metrics::evaluate(convert(gt), convert(hyp), iou_match);
        },
        py::arg("gt"), py::arg("hyp"), py::arg("iou_match") = 0.5);

    // scenario generator
    py::class_<scenario::ScenarioSpec>(m, "ScenarioSpec")
        .def(py::init<>())
        .def_readwrite("seed", &scenario::ScenarioSpec::seed)
        .def_readwrite("num_pedestrians", &scenario::ScenarioSpec::num_pedestrians)
        .def_readwrite("num_frames", &scenario::ScenarioSpec::num_frames)
        .def_readwrite("arena_width", &scenario::ScenarioSpec::arena_width)
        .def_readwrite("arena_height", &scenario::ScenarioSpec::arena_height)
        .def_readwrite("embedding_dim", &scenario::ScenarioSpec::embedding_dim)
        .def_readwrite("detection_noise", &scenario::ScenarioSpec::detection_noise)
        .def_readwrite("occlusion_visibility_threshold",
                       &scenario::ScenarioSpec::occlusion_visibility_threshold)
        .def_readwrite("body_drop_when_occluded", &scenario::ScenarioSpec::body_drop_when_occluded)
        .def_readwrite("head_drop_when_occluded", &scenario::ScenarioSpec::head_drop_when_occluded);
    py::class_<scenario::GroundTruthEntry>(m, "GroundTruthEntry")
        .def_readonly("frame", &scenario::GroundTruthEntry::frame)
        .def_readonly("id", &scenario::GroundTruthEntry::id)
        .def_readonly("body", &scenario::GroundTruthEntry::body)
        .def_readonly("head", &scenario::GroundTruthEntry::head)
        .def_readonly("body_visibility", &scenario::GroundTruthEntry::body_visibility)
        .def_readonly("head_visibility", &scenario::GroundTruthEntry::head_visibility);
    py::class_<scenario::Scenario>(m, "Scenario")
        .def_readonly("truth", &scenario::Scenario::truth)
        .def_readonly("detections", &scenario::Scenario::detections);
    m.def("generate_scenario", &scenario::generate, py::arg("spec"));
}
