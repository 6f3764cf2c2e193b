#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hbtrack/io.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HBTRACK_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& tag) {
    auto dir = fs::temp_directory_path() / ("hbtrack_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("cli: bad usage fails with a nonzero exit") {
    CHECK(run_cli("definitely-not-a-subcommand") != 0);
    CHECK(run_cli("track --paired /nonexistent.jsonl --out /tmp/x.txt") != 0);
    CHECK(run_cli("eval --gt /missing --results /missing --out /tmp/r.json") != 0);
    CHECK(run_cli("pair --detections /missing --out /tmp/p.jsonl --method nonsense") != 0);
}

TEST_CASE("cli: synth -> pair -> track -> eval pipeline on the default spec") {
    const auto dir = fresh_dir("pipeline");
    REQUIRE(run_cli("synth --seed 5 --out-dir " + dir.string()) == 0);
    REQUIRE(fs::exists(dir / "detections.jsonl"));
    REQUIRE(fs::exists(dir / "gt.txt"));
    REQUIRE(fs::exists(dir / "gt_pairs.jsonl"));
    REQUIRE(fs::exists(dir / "spec_used.json"));

    REQUIRE(run_cli("pair --detections " + (dir / "detections.jsonl").string() + " --out " +
                    (dir / "paired.jsonl").string() + " --method embedding") == 0);
    REQUIRE(run_cli("track --paired " + (dir / "paired.jsonl").string() + " --out " +
                    (dir / "results.txt").string()) == 0);
    REQUIRE(fs::exists(dir / "track_config_used.json"));
    REQUIRE(run_cli("eval --gt " + (dir / "gt.txt").string() + " --results " +
                    (dir / "results.txt").string() + " --out " + (dir / "report.json").string() +
                    " --gt-pairs " + (dir / "gt_pairs.jsonl").string() + " --paired " +
                    (dir / "paired.jsonl").string()) == 0);

    std::ifstream in(dir / "report.json");
    nlohmann::json report;
    in >> report;
    CHECK(report.at("mota").get<double>() > 0.0);
    CHECK(report.at("idf1").get<double>() > 0.0);
    CHECK(report.contains("pair_mismatch_rate"));
    fs::remove_all(dir);
}

TEST_CASE("cli: track config precedence is flags over file over defaults") {
    const auto dir = fresh_dir("config");
    REQUIRE(run_cli("synth --seed 11 --out-dir " + dir.string()) == 0);
    REQUIRE(run_cli("pair --detections " + (dir / "detections.jsonl").string() + " --out " +
                    (dir / "paired.jsonl").string() + " --method embedding") == 0);
    {
        std::ofstream cfg(dir / "tracker.json");
        cfg << "{\"max_age\": 3, \"fuse_lambda\": 0.8}\n";
    }
    REQUIRE(run_cli("track --paired " + (dir / "paired.jsonl").string() + " --out " +
                    (dir / "results.txt").string() + " --config " + (dir / "tracker.json").string() +
                    " --max-age 7") == 0);
    std::ifstream in(dir / "track_config_used.json");
    nlohmann::json used;
    in >> used;
    CHECK(used.at("max_age").get<int>() == 7);          // flag wins
    CHECK(used.at("fuse_lambda").get<double>() == 0.8); // file wins over default
    CHECK(used.at("high_conf").get<double>() == 0.6);   // default
    fs::remove_all(dir);

    // unknown config keys are rejected
    const auto dir2 = fresh_dir("badconfig");
    {
        std::ofstream cfg(dir2 / "tracker.json");
        cfg << "{\"maxage\": 3}\n";
    }
    {
        std::ofstream paired(dir2 / "paired.jsonl");
        paired << "{\"embedding_dim\": 1}\n";
    }
    CHECK(run_cli("track --paired " + (dir2 / "paired.jsonl").string() + " --out " +
                  (dir2 / "results.txt").string() + " --config " +
                  (dir2 / "tracker.json").string()) != 0);
    fs::remove_all(dir2);
}

TEST_CASE("cli: tile and fuse round-trip") {
    const auto dir = fresh_dir("tile");
    REQUIRE(run_cli("tile --width 8000 --height 8000 --scales 6400 --overlap 0.3 --out " +
                    (dir / "plan.json").string()) == 0);
    const auto plan = hbtrack::io::read_tile_plan(dir / "plan.json");
    CHECK(plan.windows.size() == 4);

    // two tile-local copies of one object in overlapping tiles
    std::vector<hbtrack::Detection> dets;
    hbtrack::Detection d;
    d.frame = 1;
    d.part = hbtrack::Part::Body;
    d.embedding = {1.0};
    d.box = {1700, 300, 40, 90, 0.9};
    d.tile_id = 0;
    dets.push_back(d);
    d.box = {100, 300, 40, 90, 0.8};  // same global box seen from the window at x=1600
    d.tile_id = 1;
    dets.push_back(d);
    hbtrack::io::write_detections(dir / "tiled.jsonl", dets, 1);

    REQUIRE(run_cli("fuse --detections " + (dir / "tiled.jsonl").string() + " --plan " +
                    (dir / "plan.json").string() + " --out " + (dir / "fused.jsonl").string()) == 0);
    const auto fused = hbtrack::io::read_detections(dir / "fused.jsonl");
    REQUIRE(fused.frames.at(1).size() == 1);
    CHECK(fused.frames.at(1)[0].box.x == 1700.0);
    CHECK(fused.frames.at(1)[0].box.score == 0.9);
    fs::remove_all(dir);
}

TEST_CASE("cli: worker pool size does not change outputs") {
    const auto dir = fresh_dir("workers");
    REQUIRE(run_cli("synth --seed 21 --out-dir " + dir.string()) == 0);

    auto pair_with_workers = [&](const std::string& n, const std::string& out) {
        const std::string cmd = "HBTRACK_WORKERS=" + n + " " + HBTRACK_CLI_PATH + " pair --detections " +
                                (dir / "detections.jsonl").string() + " --out " + (dir / out).string() +
                                " --method embedding > /dev/null 2>&1";
        REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    };
    pair_with_workers("1", "paired_serial.jsonl");
    pair_with_workers("8", "paired_pool.jsonl");

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const auto serial = slurp(dir / "paired_serial.jsonl");
    REQUIRE(!serial.empty());
    CHECK(serial == slurp(dir / "paired_pool.jsonl"));
    fs::remove_all(dir);
}

TEST_CASE("cli: loss-check validates gradients on a generated batch file") {
    const auto dir = fresh_dir("loss");
    {
        std::ofstream out(dir / "batches.jsonl");
        out << "{\"body_embeddings\":[[1.0,0.0]],\"head_embeddings\":[[0.0,0.0]],"
               "\"body_identity\":[1],\"head_identity\":[1],"
               "\"body_box_distances\":[[0.0]],\"head_box_distances\":[[0.0]]}\n";
    }
    REQUIRE(run_cli("loss-check --batches " + (dir / "batches.jsonl").string() + " --out " +
                    (dir / "loss_report.json").string()) == 0);
    std::ifstream in(dir / "loss_report.json");
    nlohmann::json report;
    in >> report;
    CHECK(report.at("all_ok").get<bool>());
    CHECK(report.at("batches")[0].at("pull").get<double>() == doctest::Approx(1.5));
    CHECK(report.at("batches")[0].at("total").get<double>() == doctest::Approx(1.5));
    fs::remove_all(dir);
}

TEST_CASE("cli: render writes valid PPM overlays") {
    const auto dir = fresh_dir("render");
    {
        std::ofstream out(dir / "results.txt");
        out << "1,1,10.00,10.00,40.00,90.00,0.9000,-1,-1,-1\n";
        out << "2,1,14.00,10.00,40.00,90.00,0.9000,-1,-1,-1\n";
    }
    REQUIRE(run_cli("render --results " + (dir / "results.txt").string() +
                    " --width 320 --height 240 --out-dir " + dir.string() + " --every 1") == 0);
    REQUIRE(fs::exists(dir / "frame_000001.ppm"));
    REQUIRE(fs::exists(dir / "frame_000002.ppm"));
    std::ifstream ppm(dir / "frame_000001.ppm", std::ios::binary);
    std::string magic, dims;
    std::getline(ppm, magic);
    std::getline(ppm, dims);
    CHECK(magic == "P6");
    CHECK(dims == "320 240");
    fs::remove_all(dir);
}
