#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "boxfuse/detection_io.hpp"
#include "boxfuse/run_config.hpp"

using namespace boxfuse;

namespace {

const char* kValidLine =
    R"({"image_id":"img_1","width":640,"height":480,"boxes":[)"
    R"({"quad":[1.000000,2.000000,11.000000,2.000000,11.000000,8.000000,1.000000,8.000000],"score":0.750000},)"
    R"({"quad":[20.500000,30.000000,40.000000,31.000000,39.500000,44.000000,20.000000,43.000000],"score":0.125000,"class_id":3}]})"
    "\n";

}  // namespace

TEST_CASE("parse_detections: empty input and strict validation") {
    std::istringstream empty("");
    CHECK(parse_detections(empty).empty());

    std::istringstream ok(kValidLine);
    const auto records = parse_detections(ok);
    REQUIRE(records.size() == 1);
    CHECK(records[0].image_id == "img_1");
    CHECK(records[0].width == 640);
    REQUIRE(records[0].boxes.size() == 2);
    CHECK(records[0].boxes[0].score == doctest::Approx(0.75));
    CHECK(!records[0].boxes[0].class_id.has_value());
    CHECK(records[0].boxes[1].class_id == 3);
    CHECK(records[0].boxes[1].vertices[2].y == doctest::Approx(44.0));
}

TEST_CASE("serialization is a byte-stable fixed point") {
    std::istringstream in(kValidLine);
    const auto records = parse_detections(in);
    std::ostringstream out;
    write_detections(out, records);
    CHECK(out.str() == kValidLine);

    // parse -> serialize -> parse -> serialize is stable too.
    std::istringstream again(out.str());
    const auto twice = parse_detections(again);
    std::ostringstream out2;
    write_detections(out2, twice);
    CHECK(out2.str() == out.str());
}

TEST_CASE("parse errors carry the line number and field") {
    SUBCASE("seven-element quad") {
        std::istringstream in(
            "\n"
            R"({"image_id":"a","width":10,"height":10,"boxes":[{"quad":[1,2,3,4,5,6,7],"score":0.5}]})"
            "\n");
        try {
            parse_detections(in);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
            CHECK(std::string(e.what()).find("quad") != std::string::npos);
            CHECK(std::string(e.what()).find("8") != std::string::npos);
        }
    }
    SUBCASE("malformed JSON") {
        std::istringstream in("{not json\n");
        CHECK_THROWS_AS(parse_detections(in), ParseError);
    }
    SUBCASE("non-finite score") {
        // Out-of-range literals are caught by the JSON layer; the error
        // still names the offending line.
        std::istringstream in(
            R"({"image_id":"a","width":10,"height":10,"boxes":[{"quad":[0,0,1,0,1,1,0,1],"score":1e999}]})");
        CHECK_THROWS_WITH_AS(parse_detections(in), doctest::Contains("line 1"),
                             ParseError);
    }
    SUBCASE("missing score") {
        std::istringstream in(
            R"({"image_id":"a","width":10,"height":10,"boxes":[{"quad":[0,0,1,0,1,1,0,1]}]})");
        CHECK_THROWS_AS(parse_detections(in), ParseError);
    }
    SUBCASE("bad width") {
        std::istringstream in(R"({"image_id":"a","width":0,"height":10,"boxes":[]})");
        CHECK_THROWS_WITH_AS(parse_detections(in), doctest::Contains("width"),
                             ParseError);
    }
}

TEST_CASE("save_detections writes atomically and loads back") {
    std::istringstream in(kValidLine);
    const auto records = parse_detections(in);
    const auto path =
        std::filesystem::temp_directory_path() / "boxfuse_io_test.jsonl";
    save_detections(path, records);
    const auto loaded = load_detections(path);
    std::filesystem::remove(path);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].boxes.size() == 2);
    CHECK(!std::filesystem::exists(path.string() + ".tmp"));
}

TEST_CASE("run config: defaults, file overrides, validation") {
    RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.node_count == 128);
    CHECK(cfg.adj_threshold == 0.7);
    CHECK(cfg.loss_beta == 0.33);

    const auto path =
        std::filesystem::temp_directory_path() / "boxfuse_cfg_test.json";
    {
        std::ofstream out(path);
        out << R"({"node_count": 64, "loss_mode": "paper_literal", "seed": 12})";
    }
    cfg.apply_json_file(path);
    std::filesystem::remove(path);
    CHECK(cfg.node_count == 64);
    CHECK(cfg.loss_mode == LossMode::kPaperLiteral);
    CHECK(cfg.seed == 12);
    CHECK(cfg.cluster_threshold == 0.5);  // untouched default

    // CLI flags land after the file, overriding it.
    cfg.node_count = 32;
    CHECK_NOTHROW(cfg.validate());

    RunConfig bad;
    bad.cluster_threshold = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(parse_loss_mode("sometimes"), std::invalid_argument);

    // The echo is stable for equal settings.
    RunConfig a, b;
    CHECK(a.to_json_string() == b.to_json_string());
    CHECK(a.to_json_string().find("\"loss_mode\": \"continuous\"") !=
          std::string::npos);
}
