#include "hbtrack/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace hbtrack::scenario {
namespace {

constexpr double kBodyAspect = 0.4;         // body width / height
constexpr double kTurnProbability = 0.03;   // chance per frame of a new heading
constexpr double kAnchorLength = 3.0;       // identity anchor norm
constexpr double kHeadAnchorOffset = 0.2;   // body-to-head anchor distance

// Hand-rolled draws on top of mt19937_64 so output bytes do not depend on the
// standard library's distribution implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double gaussian(double std) {
        if (std <= 0.0) return 0.0;
        // Box-Muller; u1 shifted away from zero.
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = uniform();
        return std * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    std::vector<double> unit_vector(int dim) {
        std::vector<double> v(dim);
        double norm = 0.0;
        do {
            norm = 0.0;
            for (double& x : v) {
                x = gaussian(1.0);
                norm += x * x;
            }
        } while (norm <= 1e-12);
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
        return v;
    }

  private:
    std::mt19937_64 engine_;
};

struct Pedestrian {
    double cx = 0.0, cy = 0.0;
    double vx = 0.0, vy = 0.0;
    double height = 0.0, width = 0.0;
    std::vector<double> body_anchor, head_anchor;
};

BBox body_box(const Pedestrian& p) {
    return {p.cx - 0.5 * p.width, p.cy - 0.5 * p.height, p.width, p.height, 1.0};
}

BBox head_box(const Pedestrian& p, double head_ratio) {
    const double hh = head_ratio * p.height;
    const double hw = std::min(hh, 0.9 * p.width);
    return {p.cx - 0.5 * hw, p.cy - 0.5 * p.height, hw, hh, 1.0};
}

// Fraction of `target` covered by the union of `occluders`, by coordinate
// compression over the clipped rectangles.
double covered_fraction(const BBox& target, const std::vector<BBox>& occluders) {
    std::vector<BBox> clipped;
    for (const auto& o : occluders) {
        const double x1 = std::max(target.x, o.x);
        const double y1 = std::max(target.y, o.y);
        const double x2 = std::min(target.right(), o.right());
        const double y2 = std::min(target.bottom(), o.bottom());
        if (x2 > x1 && y2 > y1) clipped.push_back({x1, y1, x2 - x1, y2 - y1, 1.0});
    }
    if (clipped.empty()) return 0.0;

    std::vector<double> xs{target.x, target.right()}, ys{target.y, target.bottom()};
    for (const auto& r : clipped) {
        xs.push_back(r.x);
        xs.push_back(r.right());
        ys.push_back(r.y);
        ys.push_back(r.bottom());
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

    double covered = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
            const double mx = 0.5 * (xs[i] + xs[i + 1]);
            const double my = 0.5 * (ys[j] + ys[j + 1]);
            for (const auto& r : clipped) {
                if (mx >= r.x && mx <= r.right() && my >= r.y && my <= r.bottom()) {
                    covered += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
                    break;
                }
            }
        }
    }
    return std::min(1.0, covered / target.area());
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

void validate(const ScenarioSpec& spec) {
    if (spec.num_pedestrians < 1 || spec.num_frames < 1 || spec.embedding_dim < 1) {
        throw std::invalid_argument("ScenarioSpec: counts must be >= 1");
    }
    if (!(spec.head_ratio > 0.0 && spec.head_ratio < 0.5)) {
        throw std::invalid_argument("ScenarioSpec: head_ratio must be in (0, 0.5)");
    }
    if (!(spec.speed_min >= 0.0 && spec.speed_min <= spec.speed_max)) {
        throw std::invalid_argument("ScenarioSpec: bad speed range");
    }
    if (!(spec.body_height_min > 0.0 && spec.body_height_min <= spec.body_height_max)) {
        throw std::invalid_argument("ScenarioSpec: bad body size range");
    }
    for (double p : {spec.body_drop_when_occluded, spec.head_drop_when_occluded,
                     spec.occlusion_visibility_threshold}) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("ScenarioSpec: probabilities must be in [0, 1]");
        }
    }
    if (spec.detection_noise < 0.0 || spec.embedding_noise < 0.0) {
        throw std::invalid_argument("ScenarioSpec: noise stds must be >= 0");
    }
    if (!(spec.score_model.min_score >= 0.0 && spec.score_model.min_score <= spec.score_model.max_score &&
          spec.score_model.max_score <= 1.0) ||
        spec.score_model.noise_std < 0.0) {
        throw std::invalid_argument("ScenarioSpec: bad score model");
    }
    if (spec.arena_width < kBodyAspect * spec.body_height_max ||
        spec.arena_height < spec.body_height_max) {
        throw std::invalid_argument("ScenarioSpec: arena too small for the requested body sizes");
    }
}

Scenario generate(const ScenarioSpec& spec) {
    validate(spec);
    Rng rng(spec.seed);

    std::vector<Pedestrian> peds(spec.num_pedestrians);
    for (auto& p : peds) {
        p.height = rng.uniform(spec.body_height_min, spec.body_height_max);
        p.width = kBodyAspect * p.height;
        p.cx = rng.uniform(0.5 * p.width, spec.arena_width - 0.5 * p.width);
        p.cy = rng.uniform(0.5 * p.height, spec.arena_height - 0.5 * p.height);
        const double speed = rng.uniform(spec.speed_min, spec.speed_max);
        const double heading = rng.uniform(0.0, 2.0 * M_PI);
        p.vx = speed * std::cos(heading);
        p.vy = speed * std::sin(heading);
        p.body_anchor = rng.unit_vector(spec.embedding_dim);
        for (double& v : p.body_anchor) v *= kAnchorLength;
        auto offset = rng.unit_vector(spec.embedding_dim);
        p.head_anchor = p.body_anchor;
        for (int k = 0; k < spec.embedding_dim; ++k) p.head_anchor[k] += kHeadAnchorOffset * offset[k];
    }

    auto sample_embedding = [&](const std::vector<double>& anchor) {
        std::vector<double> e(anchor);
        for (double& v : e) v += rng.gaussian(spec.embedding_noise);
        return e;
    };

    Scenario out;
    out.detections.resize(spec.num_frames);
    // Depth order is the pedestrian index: lower index is nearer the camera.
    for (int frame = 1; frame <= spec.num_frames; ++frame) {
        for (int i = 0; i < spec.num_pedestrians; ++i) {
            Pedestrian& p = peds[i];
            if (frame > 1) {
                if (rng.uniform() < kTurnProbability) {
                    const double speed = rng.uniform(spec.speed_min, spec.speed_max);
                    const double heading = rng.uniform(0.0, 2.0 * M_PI);
                    p.vx = speed * std::cos(heading);
                    p.vy = speed * std::sin(heading);
                }
                p.cx += p.vx;
                p.cy += p.vy;
                const double min_cx = 0.5 * p.width, max_cx = spec.arena_width - 0.5 * p.width;
                const double min_cy = 0.5 * p.height, max_cy = spec.arena_height - 0.5 * p.height;
                if (p.cx < min_cx) { p.cx = min_cx; p.vx = std::abs(p.vx); }
                if (p.cx > max_cx) { p.cx = max_cx; p.vx = -std::abs(p.vx); }
                if (p.cy < min_cy) { p.cy = min_cy; p.vy = std::abs(p.vy); }
                if (p.cy > max_cy) { p.cy = max_cy; p.vy = -std::abs(p.vy); }
            }
        }

        for (int i = 0; i < spec.num_pedestrians; ++i) {
            const Pedestrian& p = peds[i];
            const BBox body = body_box(p);
            const BBox head = head_box(p, spec.head_ratio);

            std::vector<BBox> occluders;
            for (int q = 0; q < i; ++q) occluders.push_back(body_box(peds[q]));
            const double body_vis = 1.0 - covered_fraction(body, occluders);
            const double head_vis = 1.0 - covered_fraction(head, occluders);

            out.truth.push_back({frame, i + 1, body, head, body_vis, head_vis});

            bool body_detected = true;
            if (body_vis < spec.occlusion_visibility_threshold) {
                body_detected = rng.uniform() >= spec.body_drop_when_occluded;
            }
            bool head_detected = true;
            if (head_vis < spec.occlusion_visibility_threshold) {
                head_detected = rng.uniform() >= spec.head_drop_when_occluded;
            }
            if (!body_detected && !head_detected) continue;

            auto emit = [&](const BBox& gt_box, double vis, Part part,
                            const std::vector<double>& anchor) {
                Detection d;
                d.box = gt_box;
                d.box.x += rng.gaussian(spec.detection_noise);
                d.box.y += rng.gaussian(spec.detection_noise);
                d.box.score = clamp01(spec.score_model.min_score +
                                      (spec.score_model.max_score - spec.score_model.min_score) * vis +
                                      rng.gaussian(spec.score_model.noise_std));
                d.part = part;
                d.embedding = sample_embedding(anchor);
                d.frame = frame;
                d.pair_hint = i + 1;
                return d;
            };

            PairedDetection record;
            if (body_detected) record.body = emit(body, body_vis, Part::Body, p.body_anchor);
            if (head_detected) record.head = emit(head, head_vis, Part::Head, p.head_anchor);
            out.detections[frame - 1].push_back(std::move(record));
        }
    }
    return out;
}

std::vector<Detection> flatten(const std::vector<PairedDetection>& paired) {
    std::vector<Detection> out;
    for (const auto& rec : paired) {
        if (rec.body) out.push_back(*rec.body);
        if (rec.head) out.push_back(*rec.head);
    }
    return out;
}

std::string spec_to_json(const ScenarioSpec& s) {
    nlohmann::json j;
    j["seed"] = s.seed;
    j["num_pedestrians"] = s.num_pedestrians;
    j["num_frames"] = s.num_frames;
    j["arena_width"] = s.arena_width;
    j["arena_height"] = s.arena_height;
    j["speed_min"] = s.speed_min;
    j["speed_max"] = s.speed_max;
    j["body_height_min"] = s.body_height_min;
    j["body_height_max"] = s.body_height_max;
    j["head_ratio"] = s.head_ratio;
    j["occlusion_visibility_threshold"] = s.occlusion_visibility_threshold;
    j["detection_noise"] = s.detection_noise;
    j["embedding_dim"] = s.embedding_dim;
    j["embedding_noise"] = s.embedding_noise;
    j["body_drop_when_occluded"] = s.body_drop_when_occluded;
    j["head_drop_when_occluded"] = s.head_drop_when_occluded;
    j["score_min"] = s.score_model.min_score;
    j["score_max"] = s.score_model.max_score;
    j["score_noise"] = s.score_model.noise_std;
    return j.dump(2);
}

ScenarioSpec spec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("ScenarioSpec: malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("ScenarioSpec: expected a JSON object");

    ScenarioSpec s;
    auto take = [&](const char* key, auto& field) {
        if (j.contains(key)) {
            j.at(key).get_to(field);
            j.erase(key);
        }
    };
    take("seed", s.seed);
    take("num_pedestrians", s.num_pedestrians);
    take("num_frames", s.num_frames);
    take("arena_width", s.arena_width);
    take("arena_height", s.arena_height);
    take("speed_min", s.speed_min);
    take("speed_max", s.speed_max);
    take("body_height_min", s.body_height_min);
    take("body_height_max", s.body_height_max);
    take("head_ratio", s.head_ratio);
    take("occlusion_visibility_threshold", s.occlusion_visibility_threshold);
    take("detection_noise", s.detection_noise);
    take("embedding_dim", s.embedding_dim);
    take("embedding_noise", s.embedding_noise);
    take("body_drop_when_occluded", s.body_drop_when_occluded);
    take("head_drop_when_occluded", s.head_drop_when_occluded);
    take("score_min", s.score_model.min_score);
    take("score_max", s.score_model.max_score);
    take("score_noise", s.score_model.noise_std);
    if (!j.empty()) {
        throw std::invalid_argument("ScenarioSpec: unknown key '" + j.begin().key() + "'");
    }
    validate(s);
    return s;
}

}  // namespace hbtrack::scenario
