#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

#ifndef BOXFUSE_CLI_PATH
#define BOXFUSE_CLI_PATH "boxfuse"
#endif

int cli(const std::string& args, const fs::path& stderr_to = {}) {
    std::string cmd = std::string(BOXFUSE_CLI_PATH) + " " + args + " >/dev/null";
    cmd += stderr_to.empty() ? " 2>/dev/null" : " 2>" + stderr_to.string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / "boxfuse_cli_test";
        std::error_code ec;
        fs::remove_all(path, ec);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

}  // namespace

TEST_CASE("nms subcommand suppresses the forced two-box fixture") {
    TempDir tmp;
    const fs::path in = tmp.path / "two.jsonl";
    {
        std::ofstream out(in);
        out << R"({"image_id":"img","width":100,"height":100,"boxes":[)"
            << R"({"quad":[0,0,10,0,10,10,0,10],"score":0.9},)"
            << R"({"quad":[2.5,0,12.5,0,12.5,10,2.5,10],"score":0.8}]})"
            << "\n";
    }
    const fs::path out = tmp.path / "kept.jsonl";
    REQUIRE(cli("nms --algo standard --iou 0.5 --in " + in.string() + " --out " +
                out.string()) == 0);
    const std::string text = slurp(out);
    CHECK(text.find("0.900000") != std::string::npos);
    CHECK(text.find("0.800000") == std::string::npos);
    // The effective config lands next to the artifact.
    CHECK(fs::exists(tmp.path / "config.json"));
}

TEST_CASE("fuse with a missing model file exits nonzero with a diagnostic") {
    TempDir tmp;
    const fs::path in = tmp.path / "empty.jsonl";
    std::ofstream(in).close();
    const fs::path err = tmp.path / "stderr.txt";
    const int rc = cli("fuse --model " + (tmp.path / "model.json").string() +
                           " --in " + in.string() + " --out " +
                           (tmp.path / "out.jsonl").string(),
                       err);
    CHECK(rc != 0);
    CHECK(slurp(err).find("model file not found") != std::string::npos);
}

TEST_CASE("sweep emits one CSV row per threshold") {
    TempDir tmp;
    const fs::path data = tmp.path / "data";
    REQUIRE(cli("synth --out " + data.string() +
                " --scenes 4 --instances-min 2 --instances-max 2 --seed 3") == 0);
    const fs::path csv = tmp.path / "sweep.csv";
    REQUIRE(cli("sweep --pred " + (data / "detections.jsonl").string() +
                " --gt " + (data / "ground_truth.jsonl").string() +
                " --min 0.5 --max 0.8 --step 0.05 --out-csv " + csv.string()) ==
            0);
    CHECK(count_lines(csv) == 1 + 7);  // header + 7 thresholds
}

TEST_CASE("unknown bench algorithm exits nonzero listing valid names") {
    TempDir tmp;
    const fs::path data = tmp.path / "data";
    REQUIRE(cli("synth --out " + data.string() +
                " --scenes 1 --instances-min 1 --instances-max 1 --seed 4") == 0);
    const fs::path err = tmp.path / "stderr.txt";
    const int rc = cli("bench --algo warp_drive --in " +
                           (data / "detections.jsonl").string() + " --reps 3",
                       err);
    CHECK(rc != 0);
    CHECK(slurp(err).find("valid names") != std::string::npos);
}

TEST_CASE("config file values apply and CLI flags override them") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "cfg.json";
    {
        std::ofstream out(cfg);
        out << R"({"cluster_threshold": 0.33, "node_count": 16})";
    }
    const fs::path in = tmp.path / "one.jsonl";
    {
        std::ofstream out(in);
        out << R"({"image_id":"img","width":100,"height":100,"boxes":[)"
            << R"({"quad":[0,0,10,0,10,10,0,10],"score":0.9}]})" << "\n";
    }
    REQUIRE(cli("cluster --config " + cfg.string() + " --in " + in.string() +
                " --out " + (tmp.path / "c.jsonl").string() +
                " --node-count 24") == 0);
    const std::string echoed = slurp(tmp.path / "config.json");
    CHECK(echoed.find("\"cluster_threshold\": 0.33") != std::string::npos);
    CHECK(echoed.find("\"node_count\": 24") != std::string::npos);
}
