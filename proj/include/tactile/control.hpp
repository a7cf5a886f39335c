#ifndef TACTILE_CONTROL_HPP
#define TACTILE_CONTROL_HPP

#include "tactile/geometry.hpp"
#include "tactile/perception.hpp"
#include "tactile/sensor.hpp"

#include <algorithm>
#include <functional>
#include <vector>

namespace tactile {

struct ControlCommand {
    Vec2 delta_u = Vec2::Zero();  // world-frame displacement (mm)
};

/** Standard counterclockwise 2D rotation matrix. */
inline Eigen::Matrix2d rotation2d(double theta_deg) {
    double t = deg2rad(theta_deg);
    Eigen::Matrix2d R;
    R << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    return R;
}

/**
 * Contour-following policy (Eq. 3): an exploratory step e along the perceived
 * edge direction plus a proportional lateral correction K*(l_d - l_hat),
 * rotated into the world frame by the perceived orientation.
 */
inline ControlCommand control_step(double theta_hat_deg, double lateral_hat_mm, double l_d,
                                   double e = 3.0, double K = 0.35) {
    if (theta_hat_deg <= -180.0 || theta_hat_deg > 180.0)
        throw InputError("control_step: orientation not in (-180, 180]");
    Vec2 local(e, K * (l_d - lateral_hat_mm));
    ControlCommand cmd;
    cmd.delta_u = rotation2d(theta_hat_deg) * local;
    return cmd;
}

/** One record per executed step of a contour-following run. */
struct TrajectoryStep {
    Vec2 position = Vec2::Zero();  // sensor midpoint, world frame (mm)
    double theta_hat_deg = 0.0;
    double lateral_hat_mm = 0.0;
    double rho = 0.0;
    double true_sdf_mm = 0.0;
    double true_theta_deg = 0.0;  // local edge orientation at the midpoint
};

struct TrajectoryLog {
    std::vector<TrajectoryStep> steps;
    bool completed = false;  // false if the run aborted on contact loss
};

/** Pose estimate used by the task loop; the oracle variant bypasses the GPs. */
using Perceiver = std::function<void(const Vec2& position, const SensorPose& true_pose,
                                     const ShearState& shear, std::uint64_t noise_seed,
                                     double& theta_hat, double& lateral_hat, double& rho)>;

inline Perceiver model_perceiver(const PerceptionModel& model, const ExperimentConfig& cfg) {
    PinLayout layout = PinLayout::hexagonal(cfg.pitch, cfg.px_per_mm);
    return [&model, cfg, layout](const Vec2&, const SensorPose& pose, const ShearState& shear,
                                 std::uint64_t seed, double& th, double& lat, double& rho) {
        PinFrame frame = simulate_frame(layout, pose, shear, seed, cfg);
        PosePrediction p = perceive(model, frame);
        th = p.theta_hat_deg;
        lat = p.lateral_hat_mm;
        rho = model.features_of(frame).rho;
    };
}

/** Perfect perception: true local edge orientation and signed distance. */
inline Perceiver oracle_perceiver() {
    return [](const Vec2&, const SensorPose& pose, const ShearState&, std::uint64_t, double& th,
              double& lat, double& rho) {
        th = pose.orientation_deg;
        lat = pose.lateral_mm;
        rho = 1e9;  // oracle never loses contact
    };
}

/**
 * Closed-loop contour following. The sensor orientation is fixed in the world
 * frame; at each step the local shape boundary is linearized into the pose
 * (edge orientation from the SDF gradient, lateral offset = signed distance),
 * a frame is sensed under the accumulated shear, the policy commands a step,
 * and the shear state is updated with the executed in-plane displacement.
 *
 * Traversal direction follows the sign convention of edge_tangent (clockwise
 * around closed material for positive e); set cfg.ccw to flip it.
 */
inline TrajectoryLog follow_contour(const Perceiver& perceiver, const Shape2D& shape,
                                    const Vec2& start, int n_steps,
                                    const ExperimentConfig& cfg) {
    if (std::abs(shape.signed_distance(start)) > 2.0)
        throw InputError("follow_contour: start point not within 2 mm of the boundary");
    if (n_steps < 1) throw InputError("follow_contour: need at least one step");

    TrajectoryLog log;
    log.steps.reserve(n_steps);
    Vec2 u = start;
    ShearState shear;
    int lost = 0;
    const double dir_sign = cfg.ccw ? -1.0 : 1.0;
    const double rho_floor = cfg.rho_floor;

    for (int k = 0; k < n_steps; ++k) {
        double sdf = shape.signed_distance(u);
        Vec2 g = shape.gradient(u);
        SensorPose pose{wrap_deg(orientation_from_normal(g)), sdf, cfg.task_depth};

        double th = 0, lat = 0, rho = 0;
        perceiver(u, pose, shear, Rng::derive(cfg.seed ^ 0xF0110ULL, k), th, lat, rho);
        lat = std::clamp(lat, -6.0, 9.9);  // training lateral range cap

        TrajectoryStep rec{u, th, lat, rho, sdf, pose.orientation_deg};
        log.steps.push_back(rec);

        if (rho < rho_floor) {
            if (++lost >= 5) return log;  // contact lost; partial log, not completed
        } else {
            lost = 0;
        }

        ControlCommand cmd = control_step(th, lat, cfg.l_desired, dir_sign * cfg.e_step, cfg.gain_k);

        // A closed traversal ends at the closest approach to the start once the
        // midpoint has returned to within two step lengths of it.
        double dist = (u - start).norm();
        if (shape.closed() && k >= 10 && dist <= 2.0 * cfg.e_step &&
            (u + cmd.delta_u - start).norm() >= dist)
            break;

        u += cmd.delta_u;
        SensorPose next_pose{wrap_deg(orientation_from_normal(shape.gradient(u))),
                             shape.signed_distance(u), cfg.task_depth};
        shear = step_shear(shear, cmd.delta_u, pose_in_contact(next_pose, cfg), cfg);
    }
    log.completed = true;
    return log;
}

/** Summary statistics of a contour-following run. */
struct TrajectoryMetrics {
    double orientation_rms_deg = 0.0;  // theta_hat vs true local edge orientation
    double max_boundary_dev_mm = 0.0;  // |sdf - steady-state offset|
    double rms_boundary_dev_mm = 0.0;
    double loop_closure_mm = 0.0;  // ||last - first|| (closed shapes)
    double steady_offset_mm = 0.0;
};

inline TrajectoryMetrics trajectory_metrics(const TrajectoryLog& log, const Shape2D& shape) {
    if (log.steps.empty()) throw InputError("trajectory_metrics: empty log");
    TrajectoryMetrics m;

    std::vector<double> theta_err;
    for (const auto& s : log.steps) theta_err.push_back(s.theta_hat_deg - s.true_theta_deg);
    m.orientation_rms_deg = circular_rms_deg(theta_err);

    // Steady-state boundary offset: median signed distance over the converged
    // portion of the run (the first few steps are the approach transient).
    size_t lo = std::min<size_t>(5, log.steps.size() - 1);
    std::vector<double> sdfs;
    for (size_t i = lo; i < log.steps.size(); ++i) sdfs.push_back(log.steps[i].true_sdf_mm);
    std::sort(sdfs.begin(), sdfs.end());
    size_t n = sdfs.size();
    m.steady_offset_mm = (n % 2) ? sdfs[n / 2] : 0.5 * (sdfs[n / 2 - 1] + sdfs[n / 2]);

    double sq = 0.0;
    for (const auto& s : log.steps) {
        double dev = std::abs(s.true_sdf_mm - m.steady_offset_mm);
        m.max_boundary_dev_mm = std::max(m.max_boundary_dev_mm, dev);
        sq += dev * dev;
    }
    m.rms_boundary_dev_mm = std::sqrt(sq / static_cast<double>(log.steps.size()));

    if (shape.closed())
        m.loop_closure_mm = (log.steps.back().position - log.steps.front().position).norm();
    return m;
}

inline void save_trajectory_csv(const TrajectoryLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out.precision(17);
    out << "step,x_mm,y_mm,theta_hat_deg,lateral_hat_mm,rho,true_sdf_mm\n";
    for (size_t i = 0; i < log.steps.size(); ++i) {
        const auto& s = log.steps[i];
        out << i << "," << s.position.x() << "," << s.position.y() << "," << s.theta_hat_deg << ","
            << s.lateral_hat_mm << "," << s.rho << "," << s.true_sdf_mm << "\n";
    }
}

}  // namespace tactile

#endif  // TACTILE_CONTROL_HPP
