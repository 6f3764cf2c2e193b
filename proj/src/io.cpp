#include "hbtrack/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace hbtrack::io {
namespace {

using nlohmann::json;

[[noreturn]] void fail_at(const std::filesystem::path& path, std::size_t line_no,
                          const std::string& what) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return in;
}

json parse_line(const std::filesystem::path& path, std::size_t line_no, const std::string& line) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        fail_at(path, line_no, std::string("malformed JSON: ") + e.what());
    }
}

json detection_to_json(const Detection& d) {
    json j;
    j["frame"] = d.frame;
    j["part"] = d.part == Part::Body ? "body" : "head";
    j["x"] = d.box.x;
    j["y"] = d.box.y;
    j["w"] = d.box.w;
    j["h"] = d.box.h;
    j["score"] = d.box.score;
    j["embedding"] = d.embedding;
    if (d.tile_id >= 0) j["tile_id"] = d.tile_id;
    if (d.pair_hint >= 0) j["pair_hint"] = d.pair_hint;
    return j;
}

Detection detection_from_json(const json& j, int expected_dim, bool require_frame = true) {
    Detection d;
    d.frame = require_frame ? j.at("frame").get<int>() : j.value("frame", 0);
    const std::string part = j.at("part").get<std::string>();
    if (part == "body") {
        d.part = Part::Body;
    } else if (part == "head") {
        d.part = Part::Head;
    } else {
        throw std::runtime_error("part must be \"body\" or \"head\"");
    }
    d.box.x = j.at("x").get<double>();
    d.box.y = j.at("y").get<double>();
    d.box.w = j.at("w").get<double>();
    d.box.h = j.at("h").get<double>();
    d.box.score = j.at("score").get<double>();
    j.at("embedding").get_to(d.embedding);
    d.tile_id = j.value("tile_id", -1);
    d.pair_hint = j.value("pair_hint", -1);
    if (require_frame && d.frame < 1) throw std::runtime_error("frame must be >= 1");
    if (!box_is_valid(d.box)) {
        throw std::runtime_error("invalid box (need w > 0, h > 0, score in [0, 1])");
    }
    if (static_cast<int>(d.embedding.size()) != expected_dim) {
        throw std::runtime_error("embedding length mismatch: expected " +
                                 std::to_string(expected_dim) + ", got " +
                                 std::to_string(d.embedding.size()));
    }
    return d;
}

int read_header_dim(const std::filesystem::path& path, std::istream& in, std::size_t& line_no) {
    std::string line;
    if (!std::getline(in, line)) fail_at(path, 1, "missing header line");
    line_no = 1;
    const json header = parse_line(path, 1, line);
    if (!header.is_object() || !header.contains("embedding_dim")) {
        fail_at(path, 1, "header must declare embedding_dim");
    }
    const int dim = header.at("embedding_dim").get<int>();
    if (dim < 0) fail_at(path, 1, "embedding_dim must be >= 0");
    return dim;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer) {
    auto parent = path.parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    const std::filesystem::path tmp =
        path.string() + ".tmp" + std::to_string(static_cast<long>(::getpid()));
    try {
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
            writer(out);
            out.flush();
            if (!out) throw std::runtime_error("write failed for " + tmp.string());
        }
        std::filesystem::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
}

void write_detections(const std::filesystem::path& path, const std::vector<Detection>& detections,
                      int embedding_dim) {
    write_file_atomic(path, [&](std::ostream& out) {
        out << json{{"embedding_dim", embedding_dim}}.dump() << "\n";
        for (const auto& d : detections) {
            if (static_cast<int>(d.embedding.size()) != embedding_dim) {
                throw std::invalid_argument("write_detections: embedding length mismatch");
            }
            out << detection_to_json(d).dump() << "\n";
        }
    });
}

DetectionStream read_detections(const std::filesystem::path& path) {
    auto in = open_input(path);
    DetectionStream stream;
    std::size_t line_no = 0;
    stream.embedding_dim = read_header_dim(path, in, line_no);

    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json j = parse_line(path, line_no, line);
        try {
            Detection d = detection_from_json(j, stream.embedding_dim);
            stream.frames[d.frame].push_back(std::move(d));
        } catch (const std::exception& e) {
            fail_at(path, line_no, e.what());
        }
    }
    return stream;
}

void write_paired(const std::filesystem::path& path, const std::vector<PairedDetection>& records,
                  int embedding_dim) {
    write_file_atomic(path, [&](std::ostream& out) {
        out << json{{"embedding_dim", embedding_dim}}.dump() << "\n";
        for (const auto& rec : records) {
            if (!rec.body && !rec.head) {
                throw std::invalid_argument("write_paired: record with neither body nor head");
            }
            json j;
            j["frame"] = rec.frame();
            j["body"] = rec.body ? detection_to_json(*rec.body) : json(nullptr);
            j["head"] = rec.head ? detection_to_json(*rec.head) : json(nullptr);
            out << j.dump() << "\n";
        }
    });
}

std::vector<PairedDetection> read_paired(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::size_t line_no = 0;
    const int dim = read_header_dim(path, in, line_no);

    std::vector<PairedDetection> records;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json j = parse_line(path, line_no, line);
        try {
            PairedDetection rec;
            const int frame = j.at("frame").get<int>();
            if (!j.at("body").is_null()) rec.body = detection_from_json(j.at("body"), dim);
            if (!j.at("head").is_null()) rec.head = detection_from_json(j.at("head"), dim);
            if (!rec.body && !rec.head) throw std::runtime_error("record with neither body nor head");
            if ((rec.body && rec.body->frame != frame) || (rec.head && rec.head->frame != frame)) {
                throw std::runtime_error("record frame disagrees with its detections");
            }
            if (rec.body && rec.body->part != Part::Body) throw std::runtime_error("body slot holds a head");
            if (rec.head && rec.head->part != Part::Head) throw std::runtime_error("head slot holds a body");
            records.push_back(std::move(rec));
        } catch (const std::exception& e) {
            fail_at(path, line_no, e.what());
        }
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const PairedDetection& a, const PairedDetection& b) { return a.frame() < b.frame(); });
    return records;
}

void write_results(const std::filesystem::path& path, const std::vector<TrackOutput>& rows) {
    write_file_atomic(path, [&](std::ostream& out) {
        char buf[256];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.2f,%.2f,%.2f,%.2f,%.4f,-1,-1,-1\n", r.frame,
                          r.id, r.box.x, r.box.y, r.box.w, r.box.h, r.confidence);
            out << buf;
        }
    });
}

metrics::TrajectorySet read_mot_boxes(const std::filesystem::path& path, MotKind kind) {
    auto in = open_input(path);
    metrics::TrajectorySet set;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() < 6) fail_at(path, line_no, "expected at least 6 comma-separated fields");
        try {
            const int frame = std::stoi(fields[0]);
            const int id = std::stoi(fields[1]);
            BBox box{std::stod(fields[2]), std::stod(fields[3]), std::stod(fields[4]),
                     std::stod(fields[5]), 1.0};
            if (kind == MotKind::GroundTruth && fields.size() >= 7 && std::stod(fields[6]) == 0.0) {
                continue;  // inactive gt row
            }
            if (frame < 1 || id < 1) throw std::runtime_error("frame and id must be >= 1");
            if (!box_is_valid(box)) throw std::runtime_error("invalid box");
            set[frame].push_back({id, box});
        } catch (const std::exception& e) {
            fail_at(path, line_no, e.what());
        }
    }
    return set;
}

void write_mot_gt(const std::filesystem::path& path,
                  const std::vector<scenario::GroundTruthEntry>& truth) {
    write_file_atomic(path, [&](std::ostream& out) {
        char buf[256];
        for (const auto& t : truth) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.2f,%.2f,%.2f,%.2f,1,1,%.4f\n", t.frame, t.id,
                          t.body.x, t.body.y, t.body.w, t.body.h, t.body_visibility);
            out << buf;
        }
    });
}

void write_gt_pairs(const std::filesystem::path& path,
                    const std::vector<scenario::GroundTruthEntry>& truth) {
    write_file_atomic(path, [&](std::ostream& out) {
        for (const auto& t : truth) {
            json j;
            j["frame"] = t.frame;
            j["id"] = t.id;
            j["body"] = {t.body.x, t.body.y, t.body.w, t.body.h};
            j["head"] = {t.head.x, t.head.y, t.head.w, t.head.h};
            j["body_visibility"] = t.body_visibility;
            j["head_visibility"] = t.head_visibility;
            out << j.dump() << "\n";
        }
    });
}

std::vector<metrics::GtPair> read_gt_pairs(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<metrics::GtPair> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const json j = parse_line(path, line_no, line);
        try {
            metrics::GtPair p;
            p.frame = j.at("frame").get<int>();
            p.id = j.at("id").get<int>();
            auto box_of = [](const json& arr) {
                if (!arr.is_array() || arr.size() != 4) throw std::runtime_error("box must be [x,y,w,h]");
                return BBox{arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>(),
                            arr[3].get<double>(), 1.0};
            };
            p.body = box_of(j.at("body"));
            p.head = box_of(j.at("head"));
            pairs.push_back(p);
        } catch (const std::exception& e) {
            fail_at(path, line_no, e.what());
        }
    }
    return pairs;
}

void write_tile_plan(const std::filesystem::path& path, const tiling::TilePlan& plan) {
    write_file_atomic(path, [&](std::ostream& out) {
        json j;
        j["image_width"] = plan.image_width;
        j["image_height"] = plan.image_height;
        j["overlap"] = plan.overlap;
        j["scales"] = plan.scales;
        j["warnings"] = plan.warnings;
        j["windows"] = json::array();
        for (const auto& w : plan.windows) {
            j["windows"].push_back({{"x", w.x}, {"y", w.y}, {"size", w.size}});
        }
        out << j.dump(2) << "\n";
    });
}

tiling::TilePlan read_tile_plan(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    json j;
    try {
        j = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": malformed JSON: " + e.what());
    }
    tiling::TilePlan plan;
    try {
        plan.image_width = j.at("image_width").get<double>();
        plan.image_height = j.at("image_height").get<double>();
        plan.overlap = j.at("overlap").get<double>();
        j.at("scales").get_to(plan.scales);
        if (j.contains("warnings")) j.at("warnings").get_to(plan.warnings);
        for (const auto& w : j.at("windows")) {
            plan.windows.push_back(
                {w.at("x").get<double>(), w.at("y").get<double>(), w.at("size").get<double>()});
        }
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": bad tile plan: " + e.what());
    }
    return plan;
}

std::vector<aml::LossBatch> read_loss_batches(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<aml::LossBatch> batches;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            batches.push_back(aml::batch_from_json(line));
        } catch (const std::exception& e) {
            fail_at(path, line_no, e.what());
        }
    }
    return batches;
}

void write_loss_batches(const std::filesystem::path& path,
                        const std::vector<aml::LossBatch>& batches) {
    write_file_atomic(path, [&](std::ostream& out) {
        for (const auto& b : batches) out << aml::batch_to_json(b) << "\n";
    });
}

std::string report_to_json(const metrics::EvalReport& report) {
    json j;
    j["mota"] = report.mota;
    j["idf1"] = report.idf1;
    j["id_switches"] = report.id_switches;
    j["false_positives"] = report.false_positives;
    j["misses"] = report.misses;
    j["gt_count"] = report.gt_count;
    if (report.pair_mismatch_rate) j["pair_mismatch_rate"] = *report.pair_mismatch_rate;
    return j.dump(2);
}

}  // namespace hbtrack::io
