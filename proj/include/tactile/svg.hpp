#ifndef TACTILE_SVG_HPP
#define TACTILE_SVG_HPP

#include "tactile/control.hpp"
#include "tactile/geometry.hpp"

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

namespace tactile {

/**
 * Minimal SVG emission: shape boundary, trajectory polyline and perceived
 * edge normals (Fig. 7 style). Coordinates are in mm with the y axis flipped
 * so the plot reads like the world frame.
 */
inline void save_trajectory_svg(const TrajectoryLog& log, const Shape2D& shape,
                                const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto grow = [&](const Vec2& p) {
        xmin = std::min(xmin, p.x());
        xmax = std::max(xmax, p.x());
        ymin = std::min(ymin, p.y());
        ymax = std::max(ymax, p.y());
    };
    for (const auto& s : log.steps) grow(s.position);

    // Shape outline by marching the boundary via dense angular sampling of
    // sign changes is overkill here; sample the SDF zero level along rays from
    // the bounding-box center for closed shapes, or reuse sampled points.
    std::vector<Vec2> outline;
    const int rays = 720;
    Vec2 center(0.5 * (xmin + xmax), 0.5 * (ymin + ymax));
    for (int i = 0; i < rays; ++i) {
        double a = 2.0 * kPi * i / rays;
        Vec2 dir(std::cos(a), std::sin(a));
        double lo = 0.0, hi = 200.0;
        if (shape.signed_distance(center) > 0.0) continue;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            (shape.signed_distance(center + mid * dir) < 0.0 ? lo : hi) = mid;
        }
        Vec2 p = center + 0.5 * (lo + hi) * dir;
        outline.push_back(p);
        grow(p);
    }

    double pad = 10.0;
    double w = (xmax - xmin) + 2 * pad, h = (ymax - ymin) + 2 * pad;
    auto X = [&](double x) { return x - xmin + pad; };
    auto Y = [&](double y) { return ymax - y + pad; };

    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << 6 * w << "' height='" << 6 * h
        << "' viewBox='0 0 " << w << " " << h << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";

    if (!outline.empty()) {
        out << "<path d='";
        for (size_t i = 0; i < outline.size(); ++i)
            out << (i ? "L" : "M") << X(outline[i].x()) << " " << Y(outline[i].y()) << " ";
        out << "Z' fill='#f0e6d0' stroke='#806030' stroke-width='0.4'/>\n";
    }

    for (size_t i = 0; i + 1 < log.steps.size(); i += 3) {
        const auto& s = log.steps[i];
        Vec2 n = edge_normal(s.theta_hat_deg) * 4.0;
        out << "<line x1='" << X(s.position.x()) << "' y1='" << Y(s.position.y()) << "' x2='"
            << X(s.position.x() + n.x()) << "' y2='" << Y(s.position.y() + n.y())
            << "' stroke='#cc4444' stroke-width='0.25'/>\n";
    }

    out << "<path d='";
    for (size_t i = 0; i < log.steps.size(); ++i)
        out << (i ? "L" : "M") << X(log.steps[i].position.x()) << " "
            << Y(log.steps[i].position.y()) << " ";
    if (!log.steps.empty() && shape.closed() && log.completed) out << "Z";
    out << "' fill='none' stroke='#2255cc' stroke-width='0.6'/>\n";
    out << "</svg>\n";
}

}  // namespace tactile

#endif  // TACTILE_SVG_HPP
