#ifndef TACTILE_SENSOR_HPP
#define TACTILE_SENSOR_HPP

#include "tactile/common.hpp"
#include "tactile/config.hpp"
#include "tactile/geometry.hpp"

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace tactile {

inline constexpr int kNumPins = 127;
inline constexpr int kFrameDims = 2 * kNumPins;

/** Rest positions of the 127 pins: hexagonal arrangement, ring radius 6. */
struct PinLayout {
    std::vector<Vec2> rest_mm;  // pin centers relative to the sensor midpoint
    double px_per_mm = 5.0;

    static PinLayout hexagonal(double pitch_mm, double px_per_mm) {
        PinLayout layout;
        layout.px_per_mm = px_per_mm;
        const double s32 = std::sqrt(3.0) / 2.0;
        for (int q = -6; q <= 6; ++q) {
            int r_lo = std::max(-6, -q - 6);
            int r_hi = std::min(6, -q + 6);
            for (int r = r_lo; r <= r_hi; ++r)
                layout.rest_mm.emplace_back(pitch_mm * (q + 0.5 * r), pitch_mm * (s32 * r));
        }
        return layout;
    }

    VecX rest_frame() const {
        VecX f(kFrameDims);
        for (int i = 0; i < kNumPins; ++i) {
            f(2 * i) = rest_mm[i].x() * px_per_mm;
            f(2 * i + 1) = rest_mm[i].y() * px_per_mm;
        }
        return f;
    }
};

/** One sensor reading: 254 interleaved (x, y) pin pixel positions. */
using PinFrame = VecX;

/** Pose of the sensor relative to a local straight edge. */
struct SensorPose {
    double orientation_deg = 0.0;  // edge orientation, (-180, 180]
    double lateral_mm = 0.0;       // midpoint offset from the edge, positive = off the object
    double depth_mm = 0.0;         // indentation depth, [0, 10]

    void validate() const {
        if (depth_mm < 0.0 || depth_mm > 10.0) throw InputError("SensorPose: depth out of [0, 10] mm");
        if (orientation_deg <= -180.0 || orientation_deg > 180.0)
            throw InputError("SensorPose: orientation not normalized into (-180, 180]");
    }
};

/** Accumulated tangential drag of the sensor skin (history state). */
struct ShearState {
    Vec2 drag_mm = Vec2::Zero();
    bool in_contact = false;
};

inline bool pose_in_contact(const SensorPose& pose, const ExperimentConfig& cfg) {
    return pose.depth_mm > 0.0 && pose.lateral_mm < cfg.contact_gate;
}

/**
 * Synthetic compliant pin-field model. Displacement of pin q (px):
 *
 *   alpha * depth * c(q) * unit(q - centroid)                    (contact spread)
 * + c(q) * (beta + gamma * cov^2 * ripple(q)) * clamp(drag)      (shear drag)
 * + Gaussian noise, std eta                                      (sensor noise)
 *
 * where c(q) = 1 / (1 + exp(sdf(q) / w)) is the soft coverage of pin q by the
 * material, centroid is the coverage-weighted pin centroid, ripple(q) =
 * sin(2*pi * (q . drag_dir) / ripple_wavelength) models stick-slip skin
 * buckling transverse to the drag direction, and cov = min(1, 2 * sum c / N)
 * scales the ripple with contact coverage (slip needs substantial contact).
 *
 * The ripple term is what makes raw pin readings shear-fragile while the
 * low-order PCA subspace of tap data barely sees it — the premise behind the
 * paper's Table I baseline/pipeline gap on the synthetic sensor.
 */
inline PinFrame simulate_frame(const PinLayout& layout, const SensorPose& pose,
                               const ShearState& shear, std::uint64_t noise_seed,
                               const ExperimentConfig& cfg) {
    pose.validate();
    PinFrame frame = layout.rest_frame();

    if (pose_in_contact(pose, cfg)) {
        const Vec2 n = edge_normal(pose.orientation_deg);
        const int N = static_cast<int>(layout.rest_mm.size());

        std::vector<double> c(N);
        double c_sum = 0.0;
        Vec2 centroid_num = Vec2::Zero();
        for (int i = 0; i < N; ++i) {
            double sdf = pose.lateral_mm + layout.rest_mm[i].dot(n);
            c[i] = 1.0 / (1.0 + std::exp(sdf / cfg.w));
            c_sum += c[i];
            centroid_num += c[i] * layout.rest_mm[i];
        }
        const Vec2 centroid = centroid_num / c_sum;

        Vec2 drag = shear.drag_mm;
        double dn = drag.norm();
        if (dn > cfg.s_max) {
            drag *= cfg.s_max / dn;
            dn = cfg.s_max;
        }
        Vec2 drag_dir = Vec2::Zero();
        double cov2 = 0.0;
        if (dn > 1e-12) {
            drag_dir = drag / dn;
            double cov = std::min(1.0, 2.0 * c_sum / N);
            cov2 = cov * cov;
        }

        for (int i = 0; i < N; ++i) {
            Vec2 d = layout.rest_mm[i] - centroid;
            double dnorm = d.norm();
            Vec2 spread_dir = dnorm > 1e-12 ? Vec2(d / dnorm) : Vec2::Zero();
            Vec2 disp = cfg.alpha * pose.depth_mm * c[i] * spread_dir;
            if (dn > 1e-12) {
                double ripple = std::sin(2.0 * kPi * layout.rest_mm[i].dot(drag_dir) /
                                         cfg.ripple_wavelength);
                disp += c[i] * (cfg.beta + cfg.gamma * cov2 * ripple) * drag;
            }
            frame(2 * i) += disp.x();
            frame(2 * i + 1) += disp.y();
        }
    }

    if (cfg.eta > 0.0) {
        Rng rng(noise_seed);
        for (int k = 0; k < kFrameDims; ++k) frame(k) += cfg.eta * rng.next_gaussian();
    }
    return frame;
}

/** Drag recurrence: decay + accumulate while in contact, reset on break. */
inline ShearState step_shear(const ShearState& shear, const Vec2& tangential_step_mm,
                             bool in_contact, const ExperimentConfig& cfg) {
    ShearState next;
    next.in_contact = in_contact;
    if (!in_contact) return next;
    next.drag_mm = cfg.lambda * shear.drag_mm + tangential_step_mm;
    double n = next.drag_mm.norm();
    if (n > cfg.s_max) next.drag_mm *= cfg.s_max / n;
    return next;
}

struct DatasetMeta {
    std::uint64_t seed = 0;
    std::vector<double> orientations, laterals, depths, directions;
    std::string kind;  // "train" or "multidir"
};

struct LabeledDataset {
    std::vector<PinFrame> frames;
    std::vector<SensorPose> labels;
    std::vector<std::optional<double>> slide_dir_deg;  // empty for taps
    DatasetMeta meta;

    size_t size() const { return frames.size(); }
};

/**
 * Tap collection (SS III-A.2): discrete contacts with zero shear over the
 * orientation x lateral x depth grid; 18 x 8 x 2 = 288 frames by default.
 */
inline LabeledDataset collect_training_set(const ExperimentConfig& cfg) {
    cfg.validate();
    PinLayout layout = PinLayout::hexagonal(cfg.pitch, cfg.px_per_mm);
    LabeledDataset ds;
    ds.meta = {cfg.seed, cfg.orientations, cfg.laterals, cfg.depths, {}, "train"};
    std::uint64_t frame_id = 0;
    ShearState no_shear;
    for (double th : cfg.orientations)
        for (double l : cfg.laterals)
            for (double d : cfg.depths) {
                SensorPose pose{wrap_deg(th), l, d};
                ds.frames.push_back(simulate_frame(layout, pose, no_shear,
                                                   Rng::derive(cfg.seed, frame_id), cfg));
                ds.labels.push_back(pose);
                ds.slide_dir_deg.push_back(std::nullopt);
                ++frame_id;
            }
    size_t expected = cfg.orientations.size() * cfg.laterals.size() * cfg.depths.size();
    if (ds.size() != expected) throw ConfigError("training grid count mismatch");
    return ds;
}

/**
 * Multi-directional sliding collection (SS III-C): for each orientation and
 * sliding direction the sensor slides through the lateral grid while drag
 * accumulates; 18 x 8 x 8 = 1152 frames by default.
 *
 * Direction convention: 0 deg slides onto the object (lateral decreasing),
 * 90/270 deg slide along the edge at constant lateral (deepest position, all
 * frames in contact), 180 deg slides off the object. Runs for directions in
 * (90, 270) start on the object; all others start at the first grid value.
 */
inline LabeledDataset collect_multidirectional_set(const ExperimentConfig& cfg) {
    cfg.validate();
    PinLayout layout = PinLayout::hexagonal(cfg.pitch, cfg.px_per_mm);
    LabeledDataset ds;
    ds.meta = {cfg.seed, cfg.orientations, cfg.laterals, {cfg.slide_depth}, cfg.directions,
               "multidir"};
    // Offset the noise stream from the tap collection.
    std::uint64_t frame_id = 1u << 20;

    std::vector<double> descending = cfg.laterals;  // off-edge -> on-edge as configured
    std::vector<double> ascending(descending.rbegin(), descending.rend());
    const double deepest = ascending.front();

    for (double th : cfg.orientations) {
        Vec2 tangent = edge_tangent(wrap_deg(th));
        Vec2 inward = -edge_normal(wrap_deg(th));
        for (double dir : cfg.directions) {
            Vec2 motion = std::cos(deg2rad(dir)) * inward + std::sin(deg2rad(dir)) * tangent;
            bool along_edge = std::abs(std::cos(deg2rad(dir))) < 1e-9;
            bool leaving = std::cos(deg2rad(dir)) < -1e-9;

            std::vector<double> lats;
            std::vector<double> step_mm;
            if (along_edge) {
                lats.assign(descending.size(), deepest);
                step_mm.assign(descending.size(), 0.0);
                double ds_mm = std::abs(ascending[0] - ascending[1]);  // on-object grid step
                for (size_t k = 1; k < step_mm.size(); ++k) step_mm[k] = ds_mm;
            } else {
                lats = leaving ? ascending : descending;
                step_mm.assign(lats.size(), 0.0);
                for (size_t k = 1; k < lats.size(); ++k) step_mm[k] = std::abs(lats[k] - lats[k - 1]);
            }

            ShearState shear;
            for (size_t k = 0; k < lats.size(); ++k) {
                SensorPose pose{wrap_deg(th), lats[k], cfg.slide_depth};
                if (k > 0)
                    shear = step_shear(shear, step_mm[k] * motion, pose_in_contact(pose, cfg), cfg);
                ds.frames.push_back(simulate_frame(layout, pose, shear,
                                                   Rng::derive(cfg.seed, frame_id), cfg));
                ds.labels.push_back(pose);
                ds.slide_dir_deg.push_back(dir);
                ++frame_id;
            }
        }
    }
    size_t expected = cfg.orientations.size() * cfg.directions.size() * cfg.laterals.size();
    if (ds.size() != expected) throw ConfigError("multi-directional grid count mismatch");
    return ds;
}

// ---------------------------------------------------------------------------
// Dataset CSV IO
// ---------------------------------------------------------------------------

inline void save_dataset_csv(const LabeledDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out.precision(17);
    out << "frame_id,orientation_deg,lateral_mm,depth_mm,slide_dir_deg";
    for (int k = 0; k < kFrameDims; ++k) out << ",s_" << k;
    out << "\n";
    for (size_t i = 0; i < ds.size(); ++i) {
        out << i << "," << ds.labels[i].orientation_deg << "," << ds.labels[i].lateral_mm << ","
            << ds.labels[i].depth_mm << ",";
        if (ds.slide_dir_deg[i]) out << *ds.slide_dir_deg[i];
        for (int k = 0; k < kFrameDims; ++k) out << "," << ds.frames[i](k);
        out << "\n";
    }
}

inline LabeledDataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset file: " + path);
    LabeledDataset ds;
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty dataset file: " + path);
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string cell;
        auto next_cell = [&]() {
            if (!std::getline(is, cell, ','))
                throw InputError(path + ": truncated row at line " + std::to_string(lineno));
            return cell;
        };
        next_cell();  // frame_id (positional, ignored)
        SensorPose pose;
        pose.orientation_deg = std::stod(next_cell());
        pose.lateral_mm = std::stod(next_cell());
        pose.depth_mm = std::stod(next_cell());
        next_cell();
        if (cell.empty())
            ds.slide_dir_deg.push_back(std::nullopt);
        else
            ds.slide_dir_deg.push_back(std::stod(cell));
        PinFrame f(kFrameDims);
        for (int k = 0; k < kFrameDims; ++k) {
            try {
                f(k) = std::stod(next_cell());
            } catch (const std::invalid_argument&) {
                throw InputError(path + ": bad numeric cell at line " + std::to_string(lineno));
            }
        }
        ds.frames.push_back(std::move(f));
        ds.labels.push_back(pose);
    }
    return ds;
}

}  // namespace tactile

#endif  // TACTILE_SENSOR_HPP
