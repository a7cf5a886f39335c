#ifndef TACTILE_GP_HPP
#define TACTILE_GP_HPP

#include "tactile/common.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace tactile {

/** Matérn 5/2 hyperparameters; one lengthscale per dimension (ARD) or shared. */
struct KernelParams {
    double signal_variance = 1.0;
    VecX lengthscales;  // size d (ARD) or size 1 (shared across all dimensions)
    double noise_variance = 1e-2;

    void validate() const {
        if (!(signal_variance > 0.0)) throw InputError("KernelParams: signal variance must be > 0");
        if (lengthscales.size() < 1) throw InputError("KernelParams: missing lengthscales");
        for (int i = 0; i < lengthscales.size(); ++i)
            if (!(lengthscales(i) > 0.0)) throw InputError("KernelParams: lengthscales must be > 0");
        if (noise_variance < 0.0) throw InputError("KernelParams: noise variance must be >= 0");
    }
};

/** Matérn 5/2 covariance as a function of scaled distance r. */
inline double matern52(double r, double signal_variance = 1.0) {
    if (r < 0.0) throw InputError("matern52: negative distance");
    double s = std::sqrt(5.0) * r;
    return signal_variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

namespace detail {

/** Squared per-dimension differences are cached once per fit. */
struct PairData {
    std::vector<MatX> d2;  // one N x N matrix per (effective) dimension group
    int n = 0;
    bool shared = false;

    static PairData build(const MatX& X, bool shared_lengthscale) {
        PairData pd;
        pd.n = static_cast<int>(X.rows());
        pd.shared = shared_lengthscale;
        if (shared_lengthscale) {
            MatX s(pd.n, pd.n);
            for (int i = 0; i < pd.n; ++i)
                for (int j = 0; j <= i; ++j) {
                    double v = (X.row(i) - X.row(j)).squaredNorm();
                    s(i, j) = s(j, i) = v;
                }
            pd.d2.push_back(std::move(s));
        } else {
            for (int k = 0; k < X.cols(); ++k) {
                MatX s(pd.n, pd.n);
                for (int i = 0; i < pd.n; ++i)
                    for (int j = 0; j <= i; ++j) {
                        double v = X(i, k) - X(j, k);
                        s(i, j) = s(j, i) = v * v;
                    }
                pd.d2.push_back(std::move(s));
            }
        }
        return pd;
    }

    /** Scaled squared distance matrix r^2 for the given lengthscales. */
    MatX r2(const VecX& ell) const {
        MatX out = MatX::Zero(n, n);
        for (size_t k = 0; k < d2.size(); ++k) {
            double l2 = shared ? ell(0) * ell(0) : ell(static_cast<int>(k)) * ell(static_cast<int>(k));
            out += d2[k] / l2;
        }
        return out;
    }
};

}  // namespace detail

/** A fitted Gaussian process with constant (profiled) mean. */
struct GPModel {
    KernelParams params;
    double mean_constant = 0.0;
    MatX train_inputs;   // N x d
    VecX train_targets;  // N
    VecX solved_alpha;   // (K + sn2 I)^-1 (y - mean)
    MatX factor;         // lower Cholesky factor of K + sn2 I (jitter included)
    double jitter = 0.0;
    double log_marginal_likelihood = 0.0;
    bool shared_lengthscale = false;

    int dim() const { return static_cast<int>(train_inputs.cols()); }

    /** Covariance vector between x and all training inputs. */
    VecX kvec(const VecX& x) const {
        const int n = static_cast<int>(train_inputs.rows());
        VecX k(n);
        for (int i = 0; i < n; ++i) {
            double r2 = 0.0;
            for (int d = 0; d < train_inputs.cols(); ++d) {
                double l = shared_lengthscale ? params.lengthscales(0) : params.lengthscales(d);
                double dx = (x(d) - train_inputs(i, d)) / l;
                r2 += dx * dx;
            }
            k(i) = matern52(std::sqrt(r2), params.signal_variance);
        }
        return k;
    }
};

/** Predictive mean and (latent) variance at a single input. */
inline std::pair<double, double> predict_gp(const GPModel& model, const VecX& x) {
    if (x.size() != model.dim()) throw InputError("predict_gp: input dimension mismatch");
    if (!x.allFinite()) throw InputError("predict_gp: non-finite input");
    VecX k = model.kvec(x);
    double mean = model.mean_constant + k.dot(model.solved_alpha);
    VecX v = model.factor.triangularView<Eigen::Lower>().solve(k);
    double var = model.params.signal_variance - v.squaredNorm();
    return {mean, std::max(0.0, var)};
}

namespace detail {

struct LmlResult {
    double lml = -std::numeric_limits<double>::infinity();
    VecX grad;         // d(LML)/d(log hyperparameter)
    MatX L;            // Cholesky factor used
    VecX alpha;        // solve of the centered targets
    double mean = 0.0; // profiled constant mean
    double jitter = 0.0;
    bool ok = false;
};

/**
 * Log marginal likelihood with the constant mean profiled out in closed form,
 * plus analytic gradients w.r.t. log(sf2), log(ell_k), log(sn2). Profiling is
 * gradient-transparent (envelope theorem): at the optimal mean the partial
 * derivative w.r.t. the mean vanishes.
 */
inline LmlResult lml_with_grad(const PairData& pd, const VecX& y, const VecX& logp,
                               bool want_grad) {
    LmlResult res;
    const int n = pd.n;
    const int m = static_cast<int>(pd.d2.size());
    double sf2 = std::exp(logp(0));
    VecX ell = logp.segment(1, m).array().exp();
    double sn2 = std::exp(logp(m + 1));

    MatX R2 = pd.r2(ell);
    MatX R = R2.cwiseMax(0.0).cwiseSqrt();
    const double s5 = std::sqrt(5.0);
    MatX E = (-s5 * R).array().exp().matrix();
    MatX Kf(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double r = R(i, j);
            Kf(i, j) = sf2 * (1.0 + s5 * r + 5.0 * r * r / 3.0) * E(i, j);
        }

    double jitter = 1e-8;
    Eigen::LLT<MatX> llt;
    while (true) {
        MatX Ky = Kf;
        Ky.diagonal().array() += sn2 + jitter;
        llt.compute(Ky);
        if (llt.info() == Eigen::Success) break;
        jitter *= 10.0;
        if (jitter > 1e-4) return res;  // not positive definite; caller handles
    }
    res.jitter = jitter;
    res.L = llt.matrixL();

    VecX ones = VecX::Ones(n);
    VecX Kinv_y = llt.solve(y);
    VecX Kinv_1 = llt.solve(ones);
    double denom = ones.dot(Kinv_1);
    res.mean = denom > 0.0 ? ones.dot(Kinv_y) / denom : 0.0;
    VecX r_res = y - res.mean * ones;
    res.alpha = llt.solve(r_res);

    double logdet = 0.0;
    for (int i = 0; i < n; ++i) logdet += std::log(res.L(i, i));
    res.lml = -0.5 * r_res.dot(res.alpha) - logdet - 0.5 * n * std::log(2.0 * kPi);
    res.ok = true;
    if (!want_grad) return res;

    // G = alpha alpha^T - K^-1; dLML/dphi = 0.5 tr(G dK/dphi)
    MatX Kinv = llt.solve(MatX::Identity(n, n));
    MatX G = res.alpha * res.alpha.transpose() - Kinv;

    res.grad = VecX::Zero(m + 2);
    res.grad(0) = 0.5 * G.cwiseProduct(Kf).sum();  // d/dlog sf2: dK = Kf
    // dK/dr * dr/dlog ell_k = sf2*(5/3)(1+sqrt5 r)e^{-sqrt5 r} * d2_k / ell_k^2
    MatX B(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            B(i, j) = sf2 * (5.0 / 3.0) * (1.0 + s5 * R(i, j)) * E(i, j);
    for (int k = 0; k < m; ++k) {
        MatX dK = B.cwiseProduct(pd.d2[k]) / (ell(k) * ell(k));
        res.grad(k + 1) = 0.5 * G.cwiseProduct(dK).sum();
    }
    res.grad(m + 1) = 0.5 * sn2 * G.trace();  // dK/dlog sn2 = sn2 I
    return res;
}

/**
 * Bounded maximization of the LML in log-hyperparameter space: projected
 * quasi-Newton (L-BFGS two-loop) with Armijo backtracking; falls back to the
 * projected gradient direction whenever curvature information is unusable.
 */
inline VecX maximize_lml(const PairData& pd, const VecX& y, VecX logp, const VecX& lo,
                         const VecX& hi, int max_iter = 120) {
    auto clip = [&](VecX p) {
        for (int i = 0; i < p.size(); ++i) p(i) = std::clamp(p(i), lo(i), hi(i));
        return p;
    };
    logp = clip(logp);
    LmlResult cur = lml_with_grad(pd, y, logp, true);
    if (!cur.ok) return logp;

    std::deque<std::pair<VecX, VecX>> hist;  // (s, y) pairs for L-BFGS
    VecX g_prev = cur.grad, p_prev = logp;

    for (int it = 0; it < max_iter; ++it) {
        // Two-loop recursion on the ascent problem (gradient of -LML is -grad).
        VecX q = cur.grad;
        std::vector<double> a(hist.size());
        for (int i = static_cast<int>(hist.size()) - 1; i >= 0; --i) {
            const auto& [s, yv] = hist[i];
            double rho = 1.0 / yv.dot(s);
            a[i] = rho * s.dot(q);
            q -= a[i] * yv;
        }
        if (!hist.empty()) {
            const auto& [s, yv] = hist.back();
            q *= s.dot(yv) / yv.dot(yv);
        }
        for (size_t i = 0; i < hist.size(); ++i) {
            const auto& [s, yv] = hist[i];
            double rho = 1.0 / yv.dot(s);
            double b = rho * yv.dot(q);
            q += (a[i] - b) * s;
        }
        VecX dir = q;  // ascent direction
        if (!dir.allFinite() || dir.dot(cur.grad) <= 0.0) dir = cur.grad;

        double step = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 25; ++ls) {
            VecX cand = clip(logp + step * dir);
            LmlResult r = lml_with_grad(pd, y, cand, true);
            if (r.ok && r.lml > cur.lml + 1e-4 * cur.grad.dot(cand - logp)) {
                VecX s = cand - logp;
                VecX yv = g_prev - r.grad;  // = -(grad_new - grad_old) for -LML
                if (s.dot(yv) > 1e-12) {
                    hist.emplace_back(s, yv);
                    if (hist.size() > 10) hist.pop_front();
                }
                logp = cand;
                cur = r;
                g_prev = r.grad;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
        if (cur.grad.lpNorm<Eigen::Infinity>() < 1e-6) break;
        double moved = (logp - p_prev).lpNorm<Eigen::Infinity>();
        p_prev = logp;
        if (moved < 1e-10) break;
    }
    return logp;
}

}  // namespace detail

/**
 * Fits a constant-mean Matérn 5/2 GP by maximizing the log marginal
 * likelihood with a bounded gradient optimizer, 5 restarts from perturbed
 * initializations. Hyperparameter bounds: [1e-3, 1e3] for signal variance and
 * lengthscales, [1e-8, 1e3] for the noise variance.
 */
inline GPModel fit_gp(const MatX& X, const VecX& y, const KernelParams& init,
                      bool shared_lengthscale = false, int restarts = 5,
                      std::uint64_t seed = 0x5EED) {
    if (X.rows() != y.size()) throw InputError("fit_gp: X and y row mismatch");
    if (X.rows() < 2) throw InputError("fit_gp: need at least 2 points");
    if (!X.allFinite() || !y.allFinite()) throw InputError("fit_gp: non-finite inputs");
    init.validate();
    const int d = static_cast<int>(X.cols());
    const int m = shared_lengthscale ? 1 : d;
    if (init.lengthscales.size() != m)
        throw InputError("fit_gp: init lengthscale count mismatch");

    detail::PairData pd = detail::PairData::build(X, shared_lengthscale);

    VecX logp0(m + 2);
    logp0(0) = std::log(init.signal_variance);
    for (int k = 0; k < m; ++k) logp0(k + 1) = std::log(init.lengthscales(k));
    logp0(m + 1) = std::log(std::max(init.noise_variance, 1e-8));
    VecX lo(m + 2), hi(m + 2);
    for (int k = 0; k < m + 2; ++k) {
        lo(k) = std::log(1e-3);
        hi(k) = std::log(1e3);
    }
    lo(m + 1) = std::log(1e-8);  // noise floor

    Rng rng(seed);
    VecX best_logp = logp0;
    double best_lml = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        VecX start = logp0;
        if (r > 0)
            for (int k = 0; k < start.size(); ++k) start(k) += rng.next_gaussian();
        VecX opt = detail::maximize_lml(pd, y, start, lo, hi);
        detail::LmlResult res = detail::lml_with_grad(pd, y, opt, false);
        if (res.ok && res.lml > best_lml) {
            best_lml = res.lml;
            best_logp = opt;
        }
    }
    if (!std::isfinite(best_lml))
        throw NumericalError("fit_gp: covariance not positive definite at any restart");

    detail::LmlResult fin = detail::lml_with_grad(pd, y, best_logp, false);
    GPModel model;
    model.shared_lengthscale = shared_lengthscale;
    model.params.signal_variance = std::exp(best_logp(0));
    model.params.lengthscales = best_logp.segment(1, m).array().exp();
    model.params.noise_variance = std::exp(best_logp(m + 1));
    model.mean_constant = fin.mean;
    model.train_inputs = X;
    model.train_targets = y;
    model.solved_alpha = fin.alpha;
    model.factor = fin.L;
    model.jitter = fin.jitter;
    model.log_marginal_likelihood = fin.lml;
    return model;
}

/** Leave-one-out predictive means from the fitted system (closed form). */
inline VecX loo_means(const GPModel& model) {
    const int n = static_cast<int>(model.train_inputs.rows());
    MatX Kinv = model.factor.triangularView<Eigen::Lower>().solve(MatX::Identity(n, n));
    Kinv = model.factor.triangularView<Eigen::Lower>().transpose().solve(Kinv);
    VecX mu(n);
    for (int i = 0; i < n; ++i)
        mu(i) = model.train_targets(i) - model.solved_alpha(i) / Kinv(i, i);
    return mu;
}

// ---------------------------------------------------------------------------
// Circular angle encoding
// ---------------------------------------------------------------------------

inline std::pair<double, double> encode_angle(double theta_deg) {
    return {std::sin(deg2rad(theta_deg)), std::cos(deg2rad(theta_deg))};
}

inline double decode_angle(double f_sin, double f_cos) {
    if (f_sin == 0.0 && f_cos == 0.0) throw InputError("decode_angle: undefined angle (0, 0)");
    double th = rad2deg(std::atan2(f_sin, f_cos));
    if (th <= -180.0) th = 180.0;
    return th;
}

// ---------------------------------------------------------------------------
// Flat text export / import (predictions reproduce within 1e-10 after reload)
// ---------------------------------------------------------------------------

inline void save_gp(std::ostream& out, const GPModel& m) {
    out.precision(17);
    out << "gp " << m.train_inputs.rows() << " " << m.train_inputs.cols() << " "
        << (m.shared_lengthscale ? 1 : 0) << "\n";
    out << m.params.signal_variance << " " << m.params.noise_variance << " " << m.mean_constant
        << " " << m.jitter << " " << m.log_marginal_likelihood << "\n";
    for (int i = 0; i < m.params.lengthscales.size(); ++i)
        out << (i ? " " : "") << m.params.lengthscales(i);
    out << "\n";
    for (int i = 0; i < m.train_inputs.rows(); ++i) {
        for (int j = 0; j < m.train_inputs.cols(); ++j) out << (j ? " " : "") << m.train_inputs(i, j);
        out << "\n";
    }
    for (int i = 0; i < m.train_targets.size(); ++i) out << (i ? " " : "") << m.train_targets(i);
    out << "\n";
}

inline GPModel load_gp(std::istream& in) {
    std::string tag;
    int n, d, shared;
    if (!(in >> tag >> n >> d >> shared) || tag != "gp") throw InputError("load_gp: bad header");
    GPModel m;
    m.shared_lengthscale = shared != 0;
    in >> m.params.signal_variance >> m.params.noise_variance >> m.mean_constant >> m.jitter >>
        m.log_marginal_likelihood;
    int nl = m.shared_lengthscale ? 1 : d;
    m.params.lengthscales.resize(nl);
    for (int i = 0; i < nl; ++i) in >> m.params.lengthscales(i);
    m.train_inputs.resize(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) in >> m.train_inputs(i, j);
    m.train_targets.resize(n);
    for (int i = 0; i < n; ++i) in >> m.train_targets(i);
    if (!in) throw InputError("load_gp: truncated model file");

    // Rebuild the factorization from the stored hyperparameters.
    detail::PairData pd = detail::PairData::build(m.train_inputs, m.shared_lengthscale);
    VecX logp(nl + 2);
    logp(0) = std::log(m.params.signal_variance);
    for (int i = 0; i < nl; ++i) logp(i + 1) = std::log(m.params.lengthscales(i));
    logp(nl + 1) = std::log(m.params.noise_variance);
    detail::LmlResult res = detail::lml_with_grad(pd, m.train_targets, logp, false);
    if (!res.ok) throw NumericalError("load_gp: stored system not positive definite");
    m.factor = res.L;
    m.jitter = res.jitter;
    // Keep the stored mean (identical to the profiled one up to roundoff).
    VecX ones = VecX::Ones(n);
    VecX r_res = m.train_targets - m.mean_constant * ones;
    VecX tmp = m.factor.triangularView<Eigen::Lower>().solve(r_res);
    m.solved_alpha = m.factor.triangularView<Eigen::Lower>().transpose().solve(tmp);
    return m;
}

}  // namespace tactile

#endif  // TACTILE_GP_HPP
