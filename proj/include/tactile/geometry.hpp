#ifndef TACTILE_GEOMETRY_HPP
#define TACTILE_GEOMETRY_HPP

#include "tactile/common.hpp"

#include <algorithm>
#include <limits>
#include <memory>
#include <vector>

namespace tactile {

/**
 * A 2D shape with a signed distance function: negative inside the material,
 * positive outside, zero on the boundary. Rectangle and circle are exact;
 * sampled shapes (flower, spiral, polyline) are accurate to < 0.05 mm.
 */
class Shape2D {
  public:
    virtual ~Shape2D() = default;

    virtual double signed_distance(const Vec2& p) const = 0;

    /** Outward gradient of the SDF (unit length away from material). */
    virtual Vec2 gradient(const Vec2& p) const {
        const double h = 1e-4;
        double gx = (signed_distance(p + Vec2(h, 0)) - signed_distance(p - Vec2(h, 0))) / (2 * h);
        double gy = (signed_distance(p + Vec2(0, h)) - signed_distance(p - Vec2(0, h))) / (2 * h);
        Vec2 g(gx, gy);
        double n = g.norm();
        if (n < 1e-12) return Vec2(1, 0);
        return g / n;
    }

    /** A point on the boundary, used as the default task start. */
    virtual Vec2 boundary_start() const = 0;

    /** Approximate boundary length (mm); for open shapes, the traversal length. */
    virtual double perimeter() const = 0;

    virtual bool closed() const { return true; }
    virtual std::string name() const = 0;
};

class Rectangle : public Shape2D {
  public:
    Rectangle(double width_mm, double height_mm, Vec2 center = Vec2::Zero())
        : half_(width_mm / 2.0, height_mm / 2.0), center_(center) {
        if (width_mm <= 0 || height_mm <= 0) throw ConfigError("rectangle dimensions must be positive");
    }

    double signed_distance(const Vec2& p) const override {
        Vec2 q = (p - center_).cwiseAbs() - half_;
        Vec2 outside = q.cwiseMax(0.0);
        double inside = std::min(std::max(q.x(), q.y()), 0.0);
        return outside.norm() + inside;
    }

    Vec2 boundary_start() const override { return center_ + Vec2(0.0, half_.y()); }
    double perimeter() const override { return 4.0 * (half_.x() + half_.y()); }
    std::string name() const override { return "rect"; }

  private:
    Vec2 half_;
    Vec2 center_;
};

class Circle : public Shape2D {
  public:
    Circle(double radius_mm, Vec2 center = Vec2::Zero()) : radius_(radius_mm), center_(center) {
        if (radius_mm <= 0) throw ConfigError("circle radius must be positive");
    }

    double signed_distance(const Vec2& p) const override {
        return (p - center_).norm() - radius_;
    }

    Vec2 gradient(const Vec2& p) const override {
        Vec2 d = p - center_;
        double n = d.norm();
        if (n < 1e-9) return Vec2(1, 0);
        return d / n;
    }

    Vec2 boundary_start() const override { return center_ + Vec2(0.0, radius_); }
    double perimeter() const override { return 2.0 * kPi * radius_; }
    std::string name() const override { return "circle"; }

  private:
    double radius_;
    Vec2 center_;
};

/**
 * Shape defined by a densely sampled boundary polyline plus an inside test.
 * Distance queries use the sampled points with local segment refinement,
 * which keeps the boundary error well under the 0.05 mm contract for the
 * sampling densities used here.
 */
class SampledShape : public Shape2D {
  public:
    double signed_distance(const Vec2& p) const override {
        double best = std::numeric_limits<double>::max();
        size_t n = pts_.size();
        size_t m = closed_ ? n : n - 1;
        for (size_t i = 0; i < m; ++i) {
            const Vec2& a = pts_[i];
            const Vec2& b = pts_[(i + 1) % n];
            best = std::min(best, point_segment_distance(p, a, b));
        }
        return inside(p) ? -best : best;
    }

    Vec2 boundary_start() const override { return pts_.front(); }

    double perimeter() const override {
        double len = 0.0;
        size_t n = pts_.size();
        size_t m = closed_ ? n : n - 1;
        for (size_t i = 0; i < m; ++i) len += (pts_[(i + 1) % n] - pts_[i]).norm();
        return len;
    }

    const std::vector<Vec2>& boundary_points() const { return pts_; }

  protected:
    virtual bool inside(const Vec2& p) const = 0;

    static double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
        Vec2 ab = b - a;
        double t = ab.squaredNorm() > 0 ? (p - a).dot(ab) / ab.squaredNorm() : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        return (p - (a + t * ab)).norm();
    }

    /** Even-odd ray-crossing test against the sampled polygon. */
    bool polygon_inside(const Vec2& p) const {
        bool in = false;
        size_t n = pts_.size();
        for (size_t i = 0, j = n - 1; i < n; j = i++) {
            const Vec2& a = pts_[i];
            const Vec2& b = pts_[j];
            if (((a.y() > p.y()) != (b.y() > p.y())) &&
                (p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()))
                in = !in;
        }
        return in;
    }

    std::vector<Vec2> pts_;
    bool closed_ = true;
};

/** Five-petal flower: polar boundary r(a) = R0 + A*sin(5a). */
class Flower : public SampledShape {
  public:
    Flower(double r0_mm, double amp_mm, Vec2 center = Vec2::Zero(), int samples = 4096)
        : r0_(r0_mm), amp_(amp_mm), center_(center) {
        if (r0_mm <= 0 || amp_mm < 0 || amp_mm >= r0_mm) throw ConfigError("invalid flower parameters");
        pts_.reserve(samples);
        for (int i = 0; i < samples; ++i) {
            double a = 2.0 * kPi * i / samples;
            double r = r0_ + amp_ * std::sin(5.0 * a);
            pts_.emplace_back(center_ + r * Vec2(std::cos(a), std::sin(a)));
        }
    }

    std::string name() const override { return "flower"; }

  protected:
    /** Exact for star-shaped polar curves: compare radius to r(angle). */
    bool inside(const Vec2& p) const override {
        Vec2 d = p - center_;
        double a = std::atan2(d.y(), d.x());
        return d.norm() < r0_ + amp_ * std::sin(5.0 * a);
    }

  private:
    double r0_, amp_;
    Vec2 center_;
};

/**
 * Archimedean spiral ribbon r = a + b*angle over the configured turns,
 * thickened to a closed outline by offsetting the centerline by the ribbon
 * half-width on both sides (open contour-following target).
 */
class Spiral : public SampledShape {
  public:
    Spiral(double a_mm = 10.0, double b_mm_per_rad = 3.5, double turns = 2.5,
           double half_width_mm = 5.0, Vec2 center = Vec2::Zero(), int samples = 1200)
        : center_(center) {
        if (a_mm <= 0 || b_mm_per_rad <= 0 || half_width_mm <= 0)
            throw ConfigError("invalid spiral parameters");
        double a_max = 2.0 * kPi * turns;
        std::vector<Vec2> outer, inner;
        outer.reserve(samples);
        inner.reserve(samples);
        for (int i = 0; i <= samples; ++i) {
            double t = a_max * i / samples;
            double r = a_mm + b_mm_per_rad * t;
            Vec2 c = center_ + r * Vec2(std::cos(t), std::sin(t));
            // Centerline tangent and its left normal give the offset direction.
            Vec2 dr = b_mm_per_rad * Vec2(std::cos(t), std::sin(t)) +
                      r * Vec2(-std::sin(t), std::cos(t));
            dr.normalize();
            Vec2 nrm(-dr.y(), dr.x());
            outer.emplace_back(c + half_width_mm * nrm);
            inner.emplace_back(c - half_width_mm * nrm);
        }
        pts_ = outer;
        // Round-ish end cap at the far end, then back along the other side.
        pts_.insert(pts_.end(), inner.rbegin(), inner.rend());
        closed_ = true;
    }

    std::string name() const override { return "spiral"; }
    bool closed() const override { return false; }
    Vec2 boundary_start() const override { return pts_.front(); }

    /** Traversal budget length: one side of the ribbon. */
    double perimeter() const override {
        double len = 0.0;
        for (size_t i = 0; i + 1 < pts_.size() / 2; ++i) len += (pts_[i + 1] - pts_[i]).norm();
        return len;
    }

  protected:
    bool inside(const Vec2& p) const override { return polygon_inside(p); }

  private:
    Vec2 center_;
};

/** User-supplied closed polyline ("natural object" stand-in). */
class Polyline : public SampledShape {
  public:
    explicit Polyline(std::vector<Vec2> vertices) {
        if (vertices.size() < 3) throw ConfigError("polyline needs at least 3 vertices");
        pts_ = std::move(vertices);
    }

    std::string name() const override { return "polyline"; }

  protected:
    bool inside(const Vec2& p) const override { return polygon_inside(p); }
};

/**
 * Straight edge through the origin used for training: the material occupies
 * the half-plane below the edge at orientation theta. Its SDF at the sensor
 * midpoint offset q is lateral + q . n(theta) with n = (-sin, cos).
 */
inline Vec2 edge_normal(double theta_deg) {
    double t = deg2rad(theta_deg);
    return Vec2(-std::sin(t), std::cos(t));
}

/** Edge tangent: 90 degrees clockwise from the outward normal. */
inline Vec2 edge_tangent(double theta_deg) {
    Vec2 n = edge_normal(theta_deg);
    return Vec2(n.y(), -n.x());
}

/** Orientation angle whose edge_normal equals the given outward direction. */
inline double orientation_from_normal(const Vec2& n) {
    return rad2deg(std::atan2(-n.x(), n.y()));
}

}  // namespace tactile

#endif  // TACTILE_GEOMETRY_HPP
