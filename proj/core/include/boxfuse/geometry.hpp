// Convex-quadrilateral geometry: areas, clipping, intersection, IoU.
// All coordinates are image pixels (x right, y down), double precision.
#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace boxfuse {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
inline bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Four vertices of an oriented detection box.
using Quad = std::array<Vec2, 4>;

/// One scored detection: four vertices plus confidence. The score is
/// nonnegative and may exceed 1 after score-summing merges.
struct QuadBox {
    Quad vertices{};
    double score = 0.0;
    std::optional<int> class_id;
};

struct ImageMeta {
    int width = 0;
    int height = 0;
    std::string image_id;
};

// Boxes with area below this are treated as noise: IoU 0 against everything.
inline constexpr double kDegenerateAreaEps = 1e-9;
// Intersections below this count as empty (touching-not-overlapping quads).
inline constexpr double kIntersectionAreaEps = 1e-12;

/// Shoelace signed area; positive for counter-clockwise vertex order
/// (in raw coordinate terms, i.e. visually clockwise with y pointing down).
double signed_area(std::span<const Vec2> poly);

/// Absolute shoelace area. Throws std::invalid_argument on fewer than 3 points.
double polygon_area(std::span<const Vec2> poly);

/// Sutherland-Hodgman clipping of `subject` against a convex `clip` polygon.
/// Returns the intersection polygon; empty result is a valid output.
std::vector<Vec2> convex_clip(std::span<const Vec2> subject,
                              std::span<const Vec2> clip);

/// Exact intersection area of two simple polygons via signed triangle
/// decomposition. Handles non-convex (but simple) inputs.
double intersection_area(std::span<const Vec2> a, std::span<const Vec2> b);

/// Canonical vertex order: counter-clockwise (positive signed area),
/// starting at the vertex nearest the quad's bounding-box top-left corner.
/// Self-intersecting ("bowtie") orderings are repaired by the convex hull
/// of the 4 points; already-simple quads keep their geometry.
Quad canonicalize(const Quad& quad);
QuadBox canonicalize(const QuadBox& box);

double quad_area(const Quad& q);
Vec2 quad_center(const Quad& q);

/// Exact polygon IoU in [0, 1]. Symmetric to the bit; degenerate boxes
/// (area < kDegenerateAreaEps) have IoU 0 against everything.
double iou(const Quad& a, const Quad& b);
double iou(const QuadBox& a, const QuadBox& b);

namespace detail {
// Same as iou() but assumes both quads are already canonical.
double iou_canonical(const Quad& a, const Quad& b);
}  // namespace detail

/// Minimum-area enclosing rotated rectangle (rotating calipers). For a true
/// rotated rectangle this is the identity up to canonical vertex order.
Quad min_area_rect(const Quad& q);

struct Aabb {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;
};

Aabb quad_aabb(const Quad& q);
bool aabb_overlap(const Aabb& a, const Aabb& b);
double aabb_iou(const Aabb& a, const Aabb& b);

/// Deterministic total order on vertex arrays, used for score tie-breaks.
bool lex_less(const Quad& a, const Quad& b);

}  // namespace boxfuse
