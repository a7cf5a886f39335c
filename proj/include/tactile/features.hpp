#ifndef TACTILE_FEATURES_HPP
#define TACTILE_FEATURES_HPP

#include "tactile/common.hpp"
#include "tactile/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

namespace tactile {

/** Training-data mean plus the leading principal eigenvectors. */
struct ProjectionBasis {
    VecX mean;                              // 254-vector
    MatX eigenvectors;                      // 254 x k, orthonormal columns
    std::vector<double> explained_variance_ratio;  // k entries, non-increasing

    int components() const { return static_cast<int>(eigenvectors.cols()); }
};

using ProjectedPoint = Vec3;

/** Modified spherical coordinates of a projected, origin-corrected frame. */
struct SphericalFeature {
    double rho = 0.0;             // >= 0
    double theta_pc23_deg = 0.0;  // (-180, 180]
    double phi_deg = 0.0;         // [0, 180]
};

/**
 * PCA by eigendecomposition of the sample covariance (1/(N-1) estimator).
 * Deterministic sign convention: the largest-magnitude entry of each
 * eigenvector is made positive.
 */
inline ProjectionBasis fit_pca(const LabeledDataset& ds, int components = 3) {
    const int N = static_cast<int>(ds.size());
    if (N < 4) throw InputError("fit_pca: need at least 4 frames");
    if (components < 1 || components > kFrameDims) throw InputError("fit_pca: bad component count");
    for (const auto& f : ds.frames)
        if (f.size() != kFrameDims) throw InputError("fit_pca: frame length must be 254");

    MatX D(N, kFrameDims);
    for (int i = 0; i < N; ++i) D.row(i) = ds.frames[i].transpose();
    VecX mean = D.colwise().mean();
    D.rowwise() -= mean.transpose();

    MatX cov = (D.transpose() * D) / static_cast<double>(N - 1);
    double total_var = cov.trace();
    if (!(total_var > 0.0)) throw NumericalError("fit_pca: zero total variance");

    Eigen::SelfAdjointEigenSolver<MatX> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericalError("fit_pca: eigendecomposition failed");

    ProjectionBasis basis;
    basis.mean = mean;
    basis.eigenvectors.resize(kFrameDims, components);
    basis.explained_variance_ratio.resize(components);
    for (int c = 0; c < components; ++c) {
        int src = kFrameDims - 1 - c;  // eigenvalues come back ascending
        VecX v = eig.eigenvectors().col(src);
        int imax = 0;
        for (int k = 1; k < kFrameDims; ++k)
            if (std::abs(v(k)) > std::abs(v(imax))) imax = k;
        if (v(imax) < 0.0) v = -v;
        basis.eigenvectors.col(c) = v;
        basis.explained_variance_ratio[c] = std::max(0.0, eig.eigenvalues()(src)) / total_var;
    }
    return basis;
}

inline ProjectedPoint project(const ProjectionBasis& basis, const PinFrame& frame) {
    if (frame.size() != basis.mean.size()) throw InputError("project: frame length mismatch");
    VecX p = basis.eigenvectors.transpose() * (frame - basis.mean);
    ProjectedPoint out = Vec3::Zero();
    for (int i = 0; i < std::min<int>(3, p.size()); ++i) out(i) = p(i);
    return out;
}

/** Generic k-component projection for the visualization exports. */
inline VecX project_k(const ProjectionBasis& basis, const PinFrame& frame) {
    if (frame.size() != basis.mean.size()) throw InputError("project: frame length mismatch");
    return basis.eigenvectors.transpose() * (frame - basis.mean);
}

/**
 * Origin of the modified spherical coordinates: the projection of the first
 * no-contact frame, plus per-orientation-sector shifts in the PC2-PC3 plane
 * that align phi across the training depths (evaluated at the l = 0 mid-range
 * lateral clusters, as the paper's "same lateral positions ... have the same
 * phi" construction).
 */
struct OriginModel {
    Vec3 base_origin = Vec3::Zero();
    std::vector<double> sector_centers_deg;  // theta_pc23 of each sector, (-180, 180]
    std::vector<Vec2> depth_shifts;          // PC2-PC3 shift per sector

    int sector_of(double theta_pc23_deg) const {
        if (sector_centers_deg.empty()) return -1;
        int best = 0;
        double best_d = 1e300;
        for (size_t s = 0; s < sector_centers_deg.size(); ++s) {
            double d = std::abs(wrap_deg(theta_pc23_deg - sector_centers_deg[s]));
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(s);
            }
        }
        return best;
    }
};

inline SphericalFeature to_spherical(const ProjectedPoint& p, const OriginModel& origin) {
    Vec3 q = p - origin.base_origin;
    if (!origin.depth_shifts.empty()) {
        double th = rad2deg(std::atan2(q(2), q(1)));
        int s = origin.sector_of(th);
        if (s >= 0) {
            q(1) -= origin.depth_shifts[s].x();
            q(2) -= origin.depth_shifts[s].y();
        }
    }
    SphericalFeature f;
    f.rho = q.norm();
    if (f.rho < 1e-300) return f;  // zero vector maps to (0, 0, 0) by convention
    double r23 = std::hypot(q(1), q(2));
    f.theta_pc23_deg = rad2deg(std::atan2(q(2), q(1)));
    if (f.theta_pc23_deg <= -180.0) f.theta_pc23_deg = 180.0;
    f.phi_deg = rad2deg(std::atan2(r23, q(0)));
    return f;
}

/** Inverse of to_spherical (used by the round-trip property tests). */
inline ProjectedPoint from_spherical(const SphericalFeature& f, const OriginModel& origin) {
    double th = deg2rad(f.theta_pc23_deg);
    double ph = deg2rad(f.phi_deg);
    Vec3 q(f.rho * std::cos(ph), f.rho * std::sin(ph) * std::cos(th),
           f.rho * std::sin(ph) * std::sin(th));
    if (!origin.depth_shifts.empty()) {
        // Identify the sector from the shifted vector's angle, mirroring to_spherical.
        int s = origin.sector_of(rad2deg(std::atan2(q(2) , q(1))));
        if (s >= 0) {
            q(1) += origin.depth_shifts[s].x();
            q(2) += origin.depth_shifts[s].y();
        }
    }
    return q + origin.base_origin;
}

inline OriginModel fit_origin_model(const ProjectionBasis& basis, const LabeledDataset& ds) {
    OriginModel model;
    int first_nc = -1;
    for (size_t i = 0; i < ds.size(); ++i) {
        if (ds.labels[i].lateral_mm >= 9.0 || ds.labels[i].depth_mm <= 0.0) {
            first_nc = static_cast<int>(i);
            break;
        }
    }
    if (first_nc < 0) throw InputError("fit_origin_model: dataset has no no-contact pose");
    model.base_origin = project(basis, ds.frames[first_nc]);

    std::vector<double> depths;
    for (const auto& label : ds.labels)
        if (std::find(depths.begin(), depths.end(), label.depth_mm) == depths.end())
            depths.push_back(label.depth_mm);
    std::sort(depths.begin(), depths.end());
    if (depths.size() < 2) return model;  // single depth: all shifts zero

    std::vector<double> orients;
    for (const auto& label : ds.labels)
        if (std::find(orients.begin(), orients.end(), label.orientation_deg) == orients.end())
            orients.push_back(label.orientation_deg);
    std::sort(orients.begin(), orients.end());

    const double d_lo = depths.front(), d_hi = depths.back();
    for (double th : orients) {
        // Cluster means at the mid-range lateral (l = 0) for each depth.
        Vec3 m_lo = Vec3::Zero(), m_hi = Vec3::Zero();
        int n_lo = 0, n_hi = 0;
        for (size_t i = 0; i < ds.size(); ++i) {
            const auto& lab = ds.labels[i];
            if (lab.orientation_deg != th || std::abs(lab.lateral_mm) > 1e-9) continue;
            Vec3 q = project(basis, ds.frames[i]) - model.base_origin;
            if (lab.depth_mm == d_lo) {
                m_lo += q;
                ++n_lo;
            } else if (lab.depth_mm == d_hi) {
                m_hi += q;
                ++n_hi;
            }
        }
        if (n_lo == 0 || n_hi == 0)
            throw InputError("fit_origin_model: missing l = 0 cluster for an orientation");
        m_lo /= n_lo;
        m_hi /= n_hi;

        Vec2 v_lo(m_lo(1), m_lo(2)), v_hi(m_hi(1), m_hi(2));
        Vec2 u = v_lo.normalized() + v_hi.normalized();
        if (u.norm() < 1e-12) u = v_lo.normalized();
        u.normalize();

        // Solve for the shift t*u that makes the two clusters' phi agree.
        auto phi_gap = [&](double t) {
            Vec2 s = t * u;
            double p_lo = std::atan2((v_lo - s).norm(), m_lo(0));
            double p_hi = std::atan2((v_hi - s).norm(), m_hi(0));
            return p_lo - p_hi;
        };
        double span = std::max(v_lo.norm(), v_hi.norm());
        double t_best = 0.0, f_best = std::abs(phi_gap(0.0));
        double a = -2.0 * span, fa = phi_gap(a);
        bool bracketed = false;
        const int kScan = 800;
        for (int i = 1; i <= kScan; ++i) {
            double b = -2.0 * span + 4.0 * span * i / kScan;
            double fb = phi_gap(b);
            if (std::abs(fb) < f_best) {
                f_best = std::abs(fb);
                t_best = b;
            }
            if (!bracketed && fa * fb <= 0.0) {
                // Bisect to machine precision inside the first bracket.
                double lo = a, hi = b, flo = fa;
                for (int it = 0; it < 100; ++it) {
                    double mid = 0.5 * (lo + hi);
                    double fm = phi_gap(mid);
                    if (flo * fm <= 0.0)
                        hi = mid;
                    else {
                        lo = mid;
                        flo = fm;
                    }
                }
                t_best = 0.5 * (lo + hi);
                f_best = std::abs(phi_gap(t_best));
                bracketed = true;
            }
            a = b;
            fa = fb;
        }

        double center = rad2deg(std::atan2(v_lo.y() + v_hi.y(), v_lo.x() + v_hi.x()));
        model.sector_centers_deg.push_back(center);
        model.depth_shifts.push_back(t_best * u);
    }
    return model;
}

/** Sensitivity of the projected feature to a label (Eq. 2). */
struct SensitivityRecord {
    int point_index = -1;
    double S = 0.0;  // feature change per unit label change
};

/**
 * Difference-quotient sensitivities along one label axis. `slice_keys` groups
 * points that share all other labels; within each slice points must come with
 * strictly monotone label values (they are sorted here by label).
 */
inline std::vector<SensitivityRecord> compute_sensitivities(
    const std::vector<ProjectedPoint>& features, const std::vector<double>& labels,
    const std::vector<long>& slice_keys) {
    if (features.size() != labels.size() || features.size() != slice_keys.size())
        throw InputError("compute_sensitivities: length mismatch");

    std::map<long, std::vector<int>> slices;
    for (size_t i = 0; i < features.size(); ++i) slices[slice_keys[i]].push_back(static_cast<int>(i));

    std::vector<SensitivityRecord> out(features.size());
    for (auto& [key, idx] : slices) {
        if (idx.size() < 2) throw InputError("compute_sensitivities: slice with fewer than 2 points");
        std::sort(idx.begin(), idx.end(),
                  [&](int a, int b) { return labels[a] < labels[b]; });
        std::vector<double> quot(idx.size() - 1);
        for (size_t k = 0; k + 1 < idx.size(); ++k) {
            double dw = labels[idx[k + 1]] - labels[idx[k]];
            if (std::abs(dw) < 1e-12)
                throw InputError("compute_sensitivities: repeated label within a slice");
            quot[k] = (features[idx[k + 1]] - features[idx[k]]).norm() / std::abs(dw);
        }
        for (size_t k = 0; k < idx.size(); ++k) {
            double s;
            if (k == 0)
                s = quot.front();
            else if (k == idx.size() - 1)
                s = quot.back();
            else
                s = 0.5 * (quot[k - 1] + quot[k]);
            out[idx[k]] = {idx[k], s};
        }
    }
    return out;
}

/** Type-7 (linear interpolation) quantile of a sorted sample. */
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw InputError("quantile of empty sample");
    double h = p * (static_cast<double>(sorted.size()) - 1.0);
    size_t lo = static_cast<size_t>(std::floor(h));
    size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

enum class LabelKind { orientation, lateral };

/**
 * Tukey pruning on S^-1: a point is an outlier if S^-1 > Q3 + 1.5*IQR
 * (S = 0 means S^-1 = +inf and is always an outlier candidate). For the
 * lateral label the number of removals is capped so that at least 90% of the
 * points survive, dropping the largest S^-1 first.
 *
 * Returns the keep mask.
 */
inline std::vector<bool> prune(const std::vector<SensitivityRecord>& sens, LabelKind kind) {
    if (sens.empty()) throw InputError("prune: empty input");
    const size_t n = sens.size();
    std::vector<double> inv(n);
    std::vector<double> finite;
    finite.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        inv[i] = sens[i].S > 0.0 ? 1.0 / sens[i].S : std::numeric_limits<double>::infinity();
        if (std::isfinite(inv[i])) finite.push_back(inv[i]);
    }
    if (finite.empty()) throw InputError("prune: all sensitivities are zero");
    std::sort(finite.begin(), finite.end());
    double q1 = quantile_sorted(finite, 0.25);
    double q3 = quantile_sorted(finite, 0.75);
    double fence = q3 + 1.5 * (q3 - q1);

    std::vector<bool> keep(n, true);
    std::vector<size_t> removed;
    for (size_t i = 0; i < n; ++i)
        if (!std::isfinite(inv[i]) || inv[i] > fence) {
            keep[i] = false;
            removed.push_back(i);
        }

    if (kind == LabelKind::lateral) {
        size_t max_remove = static_cast<size_t>(std::floor(0.10 * static_cast<double>(n)));
        if (removed.size() > max_remove) {
            std::stable_sort(removed.begin(), removed.end(),
                             [&](size_t a, size_t b) { return inv[a] > inv[b]; });
            for (size_t r = 0; r < removed.size(); ++r) keep[removed[r]] = r < max_remove ? false : true;
        }
    }
    return keep;
}

}  // namespace tactile

#endif  // TACTILE_FEATURES_HPP
