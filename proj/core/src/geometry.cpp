#include "boxfuse/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace boxfuse {

double signed_area(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        acc += p.x * q.y - q.x * p.y;
    }
    return 0.5 * acc;
}

double polygon_area(std::span<const Vec2> poly) {
    if (poly.size() < 3) {
        throw std::invalid_argument("polygon_area: need at least 3 points, got " +
                                    std::to_string(poly.size()));
    }
    return std::abs(signed_area(poly));
}

std::vector<Vec2> convex_clip(std::span<const Vec2> subject,
                              std::span<const Vec2> clip) {
    std::vector<Vec2> clip_ccw(clip.begin(), clip.end());
    if (clip_ccw.size() >= 3 && signed_area(clip_ccw) < 0.0) {
        std::reverse(clip_ccw.begin(), clip_ccw.end());
    }

    std::vector<Vec2> output(subject.begin(), subject.end());
    std::vector<Vec2> input;
    for (std::size_t e = 0; e < clip_ccw.size() && !output.empty(); ++e) {
        const Vec2 a = clip_ccw[e];
        const Vec2 b = clip_ccw[(e + 1) % clip_ccw.size()];
        const Vec2 edge = b - a;
        input = std::move(output);
        output.clear();
        const std::size_t n = input.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 cur = input[i];
            const Vec2 prev = input[(i + n - 1) % n];
            const double side_cur = cross(edge, cur - a);
            const double side_prev = cross(edge, prev - a);
            const bool in_cur = side_cur >= 0.0;
            const bool in_prev = side_prev >= 0.0;
            if (in_cur != in_prev) {
                const double denom = side_prev - side_cur;
                // denom == 0 cannot happen when the inside flags differ
                const double t = side_prev / denom;
                output.push_back(prev + t * (cur - prev));
            }
            if (in_cur) {
                output.push_back(cur);
            }
        }
    }
    return output;
}

namespace {

constexpr double kSignEps = 1e-9;

int sign_of(double v) { return (v > kSignEps) - (v < -kSignEps); }

double cross3(Vec2 o, Vec2 a, Vec2 b) {
    return (a.x - o.x) * (b.y - o.y) - (b.x - o.x) * (a.y - o.y);
}

// Fixed-capacity polygon used inside the hot triangle-clipping loop.
struct SmallPoly {
    std::array<Vec2, 16> pts;
    int n = 0;
};

double small_area(const SmallPoly& p) {
    double acc = 0.0;
    for (int i = 0; i < p.n; ++i) {
        const Vec2& u = p.pts[i];
        const Vec2& v = p.pts[(i + 1) % p.n];
        acc += u.x * v.y - v.x * u.y;
    }
    return 0.5 * acc;
}

// Keeps the part of `poly` on the left of the directed line a->b.
void cut_left(SmallPoly& poly, Vec2 a, Vec2 b) {
    SmallPoly out;
    for (int i = 0; i < poly.n; ++i) {
        const Vec2 cur = poly.pts[i];
        const Vec2 nxt = poly.pts[(i + 1) % poly.n];
        const int s_cur = sign_of(cross3(a, b, cur));
        const int s_nxt = sign_of(cross3(a, b, nxt));
        if (s_cur >= 0) {
            out.pts[out.n++] = cur;
        }
        if (s_cur * s_nxt < 0) {
            const double c1 = cross3(a, b, cur);
            const double c2 = cross3(a, b, nxt);
            const double t = c1 / (c1 - c2);
            out.pts[out.n++] = cur + t * (nxt - cur);
        }
    }
    poly = out;
}

// Signed intersection area of triangles (o,a,b) and (o,c,d), o = origin.
double triangle_pair_area(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const Vec2 o{0.0, 0.0};
    const int s1 = sign_of(cross(a, b));
    const int s2 = sign_of(cross(c, d));
    if (s1 == 0 || s2 == 0) return 0.0;
    if (s1 < 0) std::swap(a, b);
    if (s2 < 0) std::swap(c, d);

    SmallPoly poly;
    poly.pts[0] = o;
    poly.pts[1] = a;
    poly.pts[2] = b;
    poly.n = 3;
    cut_left(poly, o, c);
    if (poly.n > 2) cut_left(poly, c, d);
    if (poly.n > 2) cut_left(poly, d, o);
    if (poly.n < 3) return 0.0;

    const double r = std::abs(small_area(poly));
    return (s1 * s2 == -1) ? -r : r;
}

}  // namespace

double intersection_area(std::span<const Vec2> a, std::span<const Vec2> b) {
    if (a.size() < 3 || b.size() < 3) return 0.0;

    // Shift both polygons near the origin so the sign guards inside the
    // triangle decomposition work at a consistent scale.
    Vec2 shift{0.0, 0.0};
    for (const Vec2& p : a) shift = shift + p;
    for (const Vec2& p : b) shift = shift + p;
    shift = (1.0 / static_cast<double>(a.size() + b.size())) * shift;

    std::vector<Vec2> pa(a.begin(), a.end());
    std::vector<Vec2> pb(b.begin(), b.end());
    for (Vec2& p : pa) p = p - shift;
    for (Vec2& p : pb) p = p - shift;
    if (signed_area(pa) < 0.0) std::reverse(pa.begin(), pa.end());
    if (signed_area(pb) < 0.0) std::reverse(pb.begin(), pb.end());

    double acc = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const Vec2 a0 = pa[i];
        const Vec2 a1 = pa[(i + 1) % pa.size()];
        for (std::size_t j = 0; j < pb.size(); ++j) {
            acc += triangle_pair_area(a0, a1, pb[j], pb[(j + 1) % pb.size()]);
        }
    }
    return std::max(acc, 0.0);
}

namespace {

// Strict segment crossing (shared endpoints / collinear touches excluded).
bool segments_cross(Vec2 p1, Vec2 p2, Vec2 p3, Vec2 p4) {
    const double d1 = cross3(p3, p4, p1);
    const double d2 = cross3(p3, p4, p2);
    const double d3 = cross3(p1, p2, p3);
    const double d4 = cross3(p1, p2, p4);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
           ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

bool is_bowtie(const Quad& q) {
    return segments_cross(q[0], q[1], q[2], q[3]) ||
           segments_cross(q[1], q[2], q[3], q[0]);
}

bool point_less_yx(Vec2 a, Vec2 b) {
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
}

// Monotone-chain hull of up to 4 points, counter-clockwise.
std::vector<Vec2> hull_of(const Quad& q) {
    std::vector<Vec2> pts(q.begin(), q.end());
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
        if (a.x != b.x) return a.x < b.x;
        return a.y < b.y;
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() <= 2) return pts;

    std::vector<Vec2> hull;
    for (const Vec2& p : pts) {  // lower chain
        while (hull.size() >= 2 &&
               cross3(hull[hull.size() - 2], hull.back(), p) <= 0.0) {
            hull.pop_back();
        }
        hull.push_back(p);
    }
    const std::size_t lower = hull.size() + 1;
    for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {  // upper chain
        while (hull.size() >= lower &&
               cross3(hull[hull.size() - 2], hull.back(), *it) <= 0.0) {
            hull.pop_back();
        }
        hull.push_back(*it);
    }
    hull.pop_back();  // last point duplicates the first
    return hull;      // counter-clockwise by construction
}

std::size_t start_vertex(const Quad& q) {
    const Aabb box = quad_aabb(q);
    const Vec2 corner{box.min_x, box.min_y};
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 4; ++i) {
        const Vec2 d = q[i] - corner;
        const double dist = dot(d, d);
        if (dist < best_d ||
            (dist == best_d && point_less_yx(q[i], q[best]))) {
            best_d = dist;
            best = i;
        }
    }
    return best;
}

}  // namespace

Quad canonicalize(const Quad& quad) {
    Quad q = quad;
    if (is_bowtie(q)) {
        const std::vector<Vec2> hull = hull_of(q);
        for (std::size_t i = 0; i < 4; ++i) {
            q[i] = hull.empty() ? Vec2{} : hull[std::min(i, hull.size() - 1)];
        }
    } else if (signed_area(q) < 0.0) {
        std::reverse(q.begin(), q.end());
    }
    const std::size_t s = start_vertex(q);
    Quad out;
    for (std::size_t i = 0; i < 4; ++i) {
        out[i] = q[(s + i) % 4];
    }
    return out;
}

QuadBox canonicalize(const QuadBox& box) {
    QuadBox out = box;
    out.vertices = canonicalize(box.vertices);
    return out;
}

double quad_area(const Quad& q) { return std::abs(signed_area(q)); }

Vec2 quad_center(const Quad& q) {
    return 0.25 * (q[0] + q[1] + q[2] + q[3]);
}

namespace detail {

double iou_canonical(const Quad& a, const Quad& b) {
    const double area_a = quad_area(a);
    const double area_b = quad_area(b);
    if (area_a < kDegenerateAreaEps || area_b < kDegenerateAreaEps) return 0.0;
    if (a == b) return 1.0;
    if (!aabb_overlap(quad_aabb(a), quad_aabb(b))) return 0.0;

    // Fixed argument order makes iou(a,b) == iou(b,a) bit-exact.
    const Quad* lo = &a;
    const Quad* hi = &b;
    if (lex_less(b, a)) std::swap(lo, hi);

    double inter = intersection_area(*lo, *hi);
    if (inter < kIntersectionAreaEps) return 0.0;
    inter = std::min(inter, std::min(area_a, area_b));
    const double uni = area_a + area_b - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace detail

double iou(const Quad& a, const Quad& b) {
    return detail::iou_canonical(canonicalize(a), canonicalize(b));
}

double iou(const QuadBox& a, const QuadBox& b) {
    return iou(a.vertices, b.vertices);
}

Quad min_area_rect(const Quad& q) {
    const std::vector<Vec2> hull = hull_of(q);
    if (hull.size() == 1) {
        return canonicalize(Quad{hull[0], hull[0], hull[0], hull[0]});
    }
    if (hull.size() == 2) {
        return canonicalize(Quad{hull[0], hull[1], hull[1], hull[0]});
    }

    double best_area = std::numeric_limits<double>::infinity();
    Quad best{};
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Vec2 e = hull[(i + 1) % hull.size()] - hull[i];
        const double len = std::sqrt(dot(e, e));
        if (len < 1e-12) continue;
        const Vec2 u{e.x / len, e.y / len};
        const Vec2 v{-u.y, u.x};
        double u_min = std::numeric_limits<double>::infinity();
        double u_max = -u_min;
        double v_min = u_min;
        double v_max = -u_min;
        for (const Vec2& p : hull) {
            u_min = std::min(u_min, dot(p, u));
            u_max = std::max(u_max, dot(p, u));
            v_min = std::min(v_min, dot(p, v));
            v_max = std::max(v_max, dot(p, v));
        }
        const double area = (u_max - u_min) * (v_max - v_min);
        if (area < best_area) {
            best_area = area;
            best = Quad{u_min * u + v_min * v, u_max * u + v_min * v,
                        u_max * u + v_max * v, u_min * u + v_max * v};
        }
    }
    return canonicalize(best);
}

Aabb quad_aabb(const Quad& q) {
    Aabb b{q[0].x, q[0].y, q[0].x, q[0].y};
    for (std::size_t i = 1; i < 4; ++i) {
        b.min_x = std::min(b.min_x, q[i].x);
        b.min_y = std::min(b.min_y, q[i].y);
        b.max_x = std::max(b.max_x, q[i].x);
        b.max_y = std::max(b.max_y, q[i].y);
    }
    return b;
}

bool aabb_overlap(const Aabb& a, const Aabb& b) {
    return !(a.max_x < b.min_x || b.max_x < a.min_x || a.max_y < b.min_y ||
             b.max_y < a.min_y);
}

double aabb_iou(const Aabb& a, const Aabb& b) {
    const double iw = std::min(a.max_x, b.max_x) - std::max(a.min_x, b.min_x);
    const double ih = std::min(a.max_y, b.max_y) - std::max(a.min_y, b.min_y);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double area_a = (a.max_x - a.min_x) * (a.max_y - a.min_y);
    const double area_b = (b.max_x - b.min_x) * (b.max_y - b.min_y);
    if (area_a < kDegenerateAreaEps || area_b < kDegenerateAreaEps) return 0.0;
    const double uni = area_a + area_b - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

bool lex_less(const Quad& a, const Quad& b) {
    for (std::size_t i = 0; i < 4; ++i) {
        if (a[i].x != b[i].x) return a[i].x < b[i].x;
        if (a[i].y != b[i].y) return a[i].y < b[i].y;
    }
    return false;
}

}  // namespace boxfuse
