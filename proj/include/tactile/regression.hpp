#ifndef TACTILE_REGRESSION_HPP
#define TACTILE_REGRESSION_HPP

#include "tactile/features.hpp"
#include "tactile/gp.hpp"

#include <vector>

namespace tactile {

/** z-score constants for the rho and phi GP inputs (theta_pc23 enters as sin/cos). */
struct Standardization {
    double rho_mean = 0.0, rho_std = 1.0;
    double phi_mean = 0.0, phi_std = 1.0;

    VecX apply(const SphericalFeature& f) const {
        VecX x(4);
        x(0) = (f.rho - rho_mean) / rho_std;
        x(1) = std::sin(deg2rad(f.theta_pc23_deg));
        x(2) = std::cos(deg2rad(f.theta_pc23_deg));
        x(3) = (f.phi_deg - phi_mean) / phi_std;
        return x;
    }

    static Standardization fit(const std::vector<SphericalFeature>& feats) {
        if (feats.empty()) throw InputError("Standardization: empty feature set");
        Standardization s;
        double mr = 0, mp = 0;
        for (const auto& f : feats) {
            mr += f.rho;
            mp += f.phi_deg;
        }
        mr /= feats.size();
        mp /= feats.size();
        double vr = 0, vp = 0;
        for (const auto& f : feats) {
            vr += (f.rho - mr) * (f.rho - mr);
            vp += (f.phi_deg - mp) * (f.phi_deg - mp);
        }
        s.rho_mean = mr;
        s.phi_mean = mp;
        s.rho_std = std::max(std::sqrt(vr / feats.size()), 1e-12);
        s.phi_std = std::max(std::sqrt(vp / feats.size()), 1e-12);
        return s;
    }
};

/** The three pose GPs of the pipeline (or of the raw baseline). */
struct PoseGPs {
    GPModel gp_sin, gp_cos, gp_lat;
};

struct PosePrediction {
    double theta_hat_deg = 0.0;
    double lateral_hat_mm = 0.0;
    double f_sin = 0.0, f_cos = 0.0;
    double var_sin = 0.0, var_cos = 0.0, var_lat = 0.0;
};

inline double sample_variance(const VecX& y) {
    double m = y.mean();
    return (y.array() - m).square().sum() / std::max<int>(1, static_cast<int>(y.size()) - 1);
}

/**
 * Fits GP_sin / GP_cos on the orientation-pruned features and GP_lat on the
 * lateral-pruned features. Inputs are (rho, sin theta_pc23, cos theta_pc23,
 * phi) with rho and phi standardized; ARD lengthscales.
 */
inline PoseGPs fit_pose_gps(const std::vector<SphericalFeature>& features,
                            const std::vector<SensorPose>& poses,
                            const std::vector<bool>& keep_orientation,
                            const std::vector<bool>& keep_lateral,
                            const Standardization& standardization,
                            std::uint64_t seed = 0x5EED) {
    if (features.size() != poses.size()) throw InputError("fit_pose_gps: length mismatch");

    auto build = [&](const std::vector<bool>& keep) {
        int n = static_cast<int>(std::count(keep.begin(), keep.end(), true));
        MatX X(n, 4);
        std::vector<int> idx;
        idx.reserve(n);
        int r = 0;
        for (size_t i = 0; i < features.size(); ++i) {
            if (!keep[i]) continue;
            X.row(r++) = standardization.apply(features[i]).transpose();
            idx.push_back(static_cast<int>(i));
        }
        return std::make_pair(X, idx);
    };

    auto [Xo, io] = build(keep_orientation);
    auto [Xl, il] = build(keep_lateral);
    if (Xo.rows() < 2 || Xl.rows() < 2) throw InputError("fit_pose_gps: pruned set too small");

    VecX ys(Xo.rows()), yc(Xo.rows()), yl(Xl.rows());
    for (int i = 0; i < Xo.rows(); ++i) {
        auto [s, c] = encode_angle(poses[io[i]].orientation_deg);
        ys(i) = s;
        yc(i) = c;
    }
    for (int i = 0; i < Xl.rows(); ++i) yl(i) = poses[il[i]].lateral_mm;

    auto init_for = [](const VecX& y) {
        KernelParams init;
        init.signal_variance = std::max(sample_variance(y), 1e-3);
        init.lengthscales = VecX::Ones(4);
        init.noise_variance = 1e-2 * init.signal_variance;
        return init;
    };

    PoseGPs gps;
    gps.gp_sin = fit_gp(Xo, ys, init_for(ys), false, 5, seed ^ 0x51);
    gps.gp_cos = fit_gp(Xo, yc, init_for(yc), false, 5, seed ^ 0xC0);
    gps.gp_lat = fit_gp(Xl, yl, init_for(yl), false, 5, seed ^ 0x1A);
    return gps;
}

/**
 * Raw-pin baseline: identical machinery on the 254-dim frames with a single
 * shared lengthscale ("only one hyperparameter for all the pin positions").
 */
inline PoseGPs fit_baseline(const std::vector<PinFrame>& frames,
                            const std::vector<SensorPose>& poses,
                            const std::vector<bool>& keep_orientation,
                            const std::vector<bool>& keep_lateral,
                            std::uint64_t seed = 0xBA5E) {
    if (frames.size() != poses.size()) throw InputError("fit_baseline: length mismatch");

    auto build = [&](const std::vector<bool>& keep) {
        int n = static_cast<int>(std::count(keep.begin(), keep.end(), true));
        MatX X(n, kFrameDims);
        std::vector<int> idx;
        int r = 0;
        for (size_t i = 0; i < frames.size(); ++i) {
            if (!keep[i]) continue;
            X.row(r++) = frames[i].transpose();
            idx.push_back(static_cast<int>(i));
        }
        return std::make_pair(X, idx);
    };

    auto [Xo, io] = build(keep_orientation);
    auto [Xl, il] = build(keep_lateral);
    if (Xo.rows() < 2 || Xl.rows() < 2) throw InputError("fit_baseline: pruned set too small");

    VecX ys(Xo.rows()), yc(Xo.rows()), yl(Xl.rows());
    for (int i = 0; i < Xo.rows(); ++i) {
        auto [s, c] = encode_angle(poses[io[i]].orientation_deg);
        ys(i) = s;
        yc(i) = c;
    }
    for (int i = 0; i < Xl.rows(); ++i) yl(i) = poses[il[i]].lateral_mm;

    // Median pairwise distance is a robust shared-lengthscale initialization.
    std::vector<double> dists;
    for (int i = 0; i < std::min<int>(60, Xo.rows()); ++i)
        for (int j = 0; j < i; ++j) dists.push_back((Xo.row(i) - Xo.row(j)).norm());
    std::sort(dists.begin(), dists.end());
    double ell0 = dists.empty() ? 10.0 : std::max(1e-2, dists[dists.size() / 2]);

    auto init_for = [&](const VecX& y) {
        KernelParams init;
        init.signal_variance = std::max(sample_variance(y), 1e-3);
        init.lengthscales = VecX::Constant(1, std::min(ell0, 1e3));
        init.noise_variance = 1e-2 * init.signal_variance;
        return init;
    };

    PoseGPs gps;
    gps.gp_sin = fit_gp(Xo, ys, init_for(ys), true, 5, seed ^ 0x51);
    gps.gp_cos = fit_gp(Xo, yc, init_for(yc), true, 5, seed ^ 0xC0);
    gps.gp_lat = fit_gp(Xl, yl, init_for(yl), true, 5, seed ^ 0x1A);
    return gps;
}

/** Decodes the three GP outputs at an input row into a pose prediction. */
inline PosePrediction predict_pose(const PoseGPs& gps, const VecX& x) {
    PosePrediction p;
    auto [ms, vs] = predict_gp(gps.gp_sin, x);
    auto [mc, vc] = predict_gp(gps.gp_cos, x);
    auto [ml, vl] = predict_gp(gps.gp_lat, x);
    p.f_sin = ms;
    p.f_cos = mc;
    p.var_sin = vs;
    p.var_cos = vc;
    p.var_lat = vl;
    p.theta_hat_deg = decode_angle(ms, mc);
    p.lateral_hat_mm = ml;
    return p;
}

}  // namespace tactile

#endif  // TACTILE_REGRESSION_HPP
