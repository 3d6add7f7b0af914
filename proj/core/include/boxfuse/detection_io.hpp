// JSONL detection records: the on-disk format shared by every subcommand.
// One record per line; ground truth uses the identical schema with scores
// fixed at 1. Floats serialize with six decimal places so parse -> serialize
// is a byte-stable fixed point.
#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "boxfuse/geometry.hpp"

namespace boxfuse {

struct DetectionRecord {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::vector<QuadBox> boxes;

    ImageMeta meta() const { return ImageMeta{width, height, image_id}; }
};

class ParseError : public std::runtime_error {
  public:
    ParseError(int line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message),
          line_(line) {}

    int line() const { return line_; }

  private:
    int line_;
};

/// Strict JSONL parsing; failures name the offending line and field.
std::vector<DetectionRecord> parse_detections(std::istream& in);
std::vector<DetectionRecord> load_detections(const std::filesystem::path& path);

/// Canonical serialization: fixed key order, %.6f floats.
void write_detections(std::ostream& out, std::span<const DetectionRecord> records);

/// Atomic write (temp file + rename).
void save_detections(const std::filesystem::path& path,
                     std::span<const DetectionRecord> records);

/// Canonical float formatting used across all emitted artifacts.
std::string format_float(double v);

/// Atomic whole-file text write.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace boxfuse
