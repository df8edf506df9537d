#pragma once

#include "dpgm/graphs/attributed_graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace dpgm {

struct DelaunayResult {
    Adjacency adjacency;
    /// True when the input was degenerate (< 3 points or all collinear) and the
    /// complete graph was returned instead.
    bool fallback = false;
};

namespace detail {

inline long double orient(Point2 a, Point2 b, Point2 c) {
    return (static_cast<long double>(b.x) - a.x) * (static_cast<long double>(c.y) - a.y) -
           (static_cast<long double>(b.y) - a.y) * (static_cast<long double>(c.x) - a.x);
}

// > 0 iff d is strictly inside the circumcircle of the counter-clockwise triangle abc.
inline long double in_circle(Point2 a, Point2 b, Point2 c, Point2 d) {
    const long double adx = static_cast<long double>(a.x) - d.x, ady = static_cast<long double>(a.y) - d.y;
    const long double bdx = static_cast<long double>(b.x) - d.x, bdy = static_cast<long double>(b.y) - d.y;
    const long double cdx = static_cast<long double>(c.x) - d.x, cdy = static_cast<long double>(c.y) - d.y;
    const long double ad = adx * adx + ady * ady;
    const long double bd = bdx * bdx + bdy * bdy;
    const long double cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

inline bool all_collinear(std::span<const Point2> pts) {
    double extent = 0.0;
    for (const auto& p : pts) extent = std::max({extent, std::abs(p.x - pts[0].x), std::abs(p.y - pts[0].y)});
    if (extent == 0.0) return true;
    const long double eps = 1e-12L * extent * extent;
    for (std::size_t i = 1; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            if (std::abs(orient(pts[0], pts[i], pts[j])) > eps) return false;
    return true;
}

} // namespace detail

/// Delaunay triangulation adjacency by incremental Bowyer-Watson insertion.
/// Cocircular configurations keep whichever diagonal the insertion order yields.
inline DelaunayResult delaunay_adjacency(std::span<const Point2> points) {
    const std::size_t n = points.size();
    if (n < 3 || detail::all_collinear(points)) return {Adjacency::complete(n), true};

    double min_x = points[0].x, max_x = points[0].x, min_y = points[0].y, max_y = points[0].y;
    for (const auto& p : points) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double span = std::max({max_x - min_x, max_y - min_y, 1e-12});
    const double cx = 0.5 * (min_x + max_x), cy = 0.5 * (min_y + max_y);
    const double big = 1e4 * span;

    std::vector<Point2> verts(points.begin(), points.end());
    verts.push_back({cx - 2.0 * big, cy - big});
    verts.push_back({cx + 2.0 * big, cy - big});
    verts.push_back({cx, cy + 2.0 * big});

    using Tri = std::array<std::size_t, 3>;
    std::vector<Tri> tris{{n, n + 1, n + 2}};

    for (std::size_t v = 0; v < n; ++v) {
        std::vector<Tri> keep;
        std::vector<std::array<std::size_t, 2>> boundary;
        for (const auto& t : tris) {
            if (detail::in_circle(verts[t[0]], verts[t[1]], verts[t[2]], verts[v]) > 0) {
                for (int k = 0; k < 3; ++k) {
                    std::array<std::size_t, 2> e{t[k], t[(k + 1) % 3]};
                    // an edge shared by two removed triangles appears reversed
                    auto it = std::find(boundary.begin(), boundary.end(), std::array<std::size_t, 2>{e[1], e[0]});
                    if (it != boundary.end())
                        boundary.erase(it);
                    else
                        boundary.push_back(e);
                }
            } else {
                keep.push_back(t);
            }
        }
        for (const auto& e : boundary) keep.push_back({e[0], e[1], v});
        tris = std::move(keep);
    }

    Adjacency adj(n);
    for (const auto& t : tris) {
        for (int k = 0; k < 3; ++k) {
            const auto a = t[k], b = t[(k + 1) % 3];
            if (a < n && b < n) adj.connect(a, b);
        }
    }
    return {std::move(adj), false};
}

} // namespace dpgm
