#include "boxfuse/detection_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace boxfuse {

namespace {

double require_finite_number(const nlohmann::json& j, int line,
                             const std::string& field) {
    if (!j.is_number()) {
        throw ParseError(line, "field '" + field + "' must be a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw ParseError(line, "field '" + field + "' must be finite");
    }
    return v;
}

}  // namespace

std::vector<DetectionRecord> parse_detections(std::istream& in) {
    std::vector<DetectionRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;

        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
        }
        if (!doc.is_object()) throw ParseError(line_no, "expected a JSON object");

        DetectionRecord rec;
        if (!doc.contains("image_id") || !doc["image_id"].is_string()) {
            throw ParseError(line_no, "field 'image_id' must be a string");
        }
        rec.image_id = doc["image_id"].get<std::string>();
        if (!doc.contains("width") || !doc["width"].is_number_integer() ||
            doc["width"].get<int>() <= 0) {
            throw ParseError(line_no, "field 'width' must be a positive integer");
        }
        if (!doc.contains("height") || !doc["height"].is_number_integer() ||
            doc["height"].get<int>() <= 0) {
            throw ParseError(line_no, "field 'height' must be a positive integer");
        }
        rec.width = doc["width"].get<int>();
        rec.height = doc["height"].get<int>();
        if (!doc.contains("boxes") || !doc["boxes"].is_array()) {
            throw ParseError(line_no, "field 'boxes' must be an array");
        }
        for (const auto& jb : doc["boxes"]) {
            if (!jb.is_object()) throw ParseError(line_no, "box entries must be objects");
            if (!jb.contains("quad") || !jb["quad"].is_array() ||
                jb["quad"].size() != 8) {
                throw ParseError(line_no,
                                 "field 'quad' must hold exactly 8 numbers");
            }
            QuadBox box;
            for (int i = 0; i < 4; ++i) {
                box.vertices[static_cast<std::size_t>(i)] = Vec2{
                    require_finite_number(jb["quad"][2 * i], line_no, "quad"),
                    require_finite_number(jb["quad"][2 * i + 1], line_no, "quad")};
            }
            box.score = require_finite_number(
                jb.contains("score") ? jb["score"] : nlohmann::json(), line_no,
                "score");
            if (box.score < 0.0) {
                throw ParseError(line_no, "field 'score' must be >= 0");
            }
            if (jb.contains("class_id")) {
                if (!jb["class_id"].is_number_integer()) {
                    throw ParseError(line_no, "field 'class_id' must be an integer");
                }
                box.class_id = jb["class_id"].get<int>();
            }
            rec.boxes.push_back(std::move(box));
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<DetectionRecord> load_detections(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open detections file: " + path.string());
    }
    return parse_detections(in);
}

std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void write_detections(std::ostream& out,
                      std::span<const DetectionRecord> records) {
    for (const DetectionRecord& rec : records) {
        out << "{\"image_id\":" << nlohmann::json(rec.image_id).dump()
            << ",\"width\":" << rec.width << ",\"height\":" << rec.height
            << ",\"boxes\":[";
        for (std::size_t b = 0; b < rec.boxes.size(); ++b) {
            const QuadBox& box = rec.boxes[b];
            if (b) out << ',';
            out << "{\"quad\":[";
            for (int i = 0; i < 4; ++i) {
                if (i) out << ',';
                out << format_float(box.vertices[static_cast<std::size_t>(i)].x)
                    << ',' << format_float(box.vertices[static_cast<std::size_t>(i)].y);
            }
            out << "],\"score\":" << format_float(box.score);
            if (box.class_id) out << ",\"class_id\":" << *box.class_id;
            out << '}';
        }
        out << "]}\n";
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write file: " + path.string());
        }
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

void save_detections(const std::filesystem::path& path,
                     std::span<const DetectionRecord> records) {
    std::ostringstream buf;
    write_detections(buf, records);
    write_text_file(path, buf.str());
}

}  // namespace boxfuse
