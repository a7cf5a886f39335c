// Acceptance harness: evaluates each documented criterion at the default
// configuration and prints one PASS/FAIL line per criterion. Exit status is
// nonzero if any criterion fails.

#include "tactile/control.hpp"
#include "tactile/perception.hpp"

#include <cstdio>
#include <functional>
#include <iostream>
#include <string>

using namespace tactile;

namespace {

int g_failures = 0;

void criterion(int idx, const std::string& desc, const std::function<bool()>& body) {
    bool ok = false;
    std::string note;
    try {
        ok = body();
    } catch (const std::exception& e) {
        note = std::string(" (exception: ") + e.what() + ")";
    }
    std::printf("%s criterion %d: %s%s\n", ok ? "PASS" : "FAIL", idx, desc.c_str(),
                note.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::vector<bool> brute_force_keep(const std::vector<double>& inv) {
    std::vector<double> finite;
    for (double v : inv)
        if (std::isfinite(v)) finite.push_back(v);
    std::sort(finite.begin(), finite.end());
    auto quant = [&](double p) {
        double h = p * (finite.size() - 1.0);
        size_t lo = static_cast<size_t>(std::floor(h));
        size_t hi = std::min(lo + 1, finite.size() - 1);
        return finite[lo] + (h - lo) * (finite[hi] - finite[lo]);
    };
    double fence = quant(0.75) + 1.5 * (quant(0.75) - quant(0.25));
    std::vector<bool> keep(inv.size());
    for (size_t i = 0; i < inv.size(); ++i) keep[i] = std::isfinite(inv[i]) && inv[i] <= fence;
    return keep;
}

std::vector<SensitivityRecord> records_from_inv(const std::vector<double>& inv) {
    std::vector<SensitivityRecord> recs(inv.size());
    for (size_t i = 0; i < inv.size(); ++i)
        recs[i] = {static_cast<int>(i), inv[i] > 0.0 ? 1.0 / inv[i] : 0.0};
    return recs;
}

}  // namespace

int main() {
    ExperimentConfig cfg;

    std::printf("collecting datasets and fitting the perception model...\n");
    std::fflush(stdout);
    LabeledDataset train = collect_training_set(cfg);
    LabeledDataset multi = collect_multidirectional_set(cfg);
    PerceptionModel model = fit_perception(train, true);
    auto [pipe, base] = evaluate_offline(model, multi, cfg.contact_gate);

    criterion(1, "dataset geometry (288 tap frames, 1152 multi-directional)", [&] {
        return train.size() == 288 && multi.size() == 1152;
    });

    criterion(2, "first-3 cumulative explained variance >= 0.75", [&] {
        double cum = 0.0;
        for (double r : model.basis.explained_variance_ratio) cum += r;
        std::printf("  cumulative EVR = %.5f\n", cum);
        return cum >= 0.75;
    });

    criterion(3, "theta_pc23 circular std across sliding directions <= 1/3 of the"
                 " spread across orientations", [&] {
        std::vector<double> across_dirs, across_orients;
        for (size_t i = 0; i < multi.size(); ++i) {
            const auto& lab = multi.labels[i];
            if (lab.orientation_deg == 0.0 && lab.lateral_mm == -6.0)
                across_dirs.push_back(model.features_of(multi.frames[i]).theta_pc23_deg);
        }
        for (size_t i = 0; i < train.size(); ++i) {
            const auto& lab = train.labels[i];
            if (lab.lateral_mm == -6.0 && lab.depth_mm == 4.0)
                across_orients.push_back(model.features_of(train.frames[i]).theta_pc23_deg);
        }
        double sd = circular_std_deg(across_dirs);
        double so = circular_std_deg(across_orients);
        std::printf("  std across dirs %.3f deg, across orientations %.3f deg\n", sd, so);
        return across_dirs.size() >= 8 && across_orients.size() == 18 && sd <= so / 3.0;
    });

    criterion(4, "pipeline RMS at 90/270 <= 0.5 x baseline and <= 15 deg", [&] {
        double p = pipe.on_cells.at(90).rms_deg;
        double b = base.on_cells.at(90).rms_deg;
        std::printf("  pipeline %.3f deg vs baseline %.3f deg\n", p, b);
        return p <= 0.5 * b && p <= 15.0;
    });

    criterion(5, "mean Off-cell RMS <= mean On-cell RMS (pipeline)", [&] {
        double off = mean_cell_rms(pipe.off_cells);
        double on = mean_cell_rms(pipe.on_cells);
        std::printf("  off %.3f deg, on %.3f deg\n", off, on);
        return off <= on;
    });

    criterion(6, "overall lateral RMS <= 3 mm", [&] {
        std::printf("  lateral RMS %.3f mm\n", pipe.lateral_rms_mm);
        return pipe.lateral_rms_mm <= 3.0;
    });

    criterion(7, "contour following on four closed shapes and the open spiral", [&] {
        struct Case {
            std::string name;
            std::unique_ptr<Shape2D> shape;
        };
        std::vector<Case> cases;
        cases.push_back({"rectangle 60x40", std::make_unique<Rectangle>(60.0, 40.0)});
        cases.push_back({"circle r=30", std::make_unique<Circle>(30.0)});
        cases.push_back({"circle r=15", std::make_unique<Circle>(15.0)});
        cases.push_back({"flower r0=30 amp=6", std::make_unique<Flower>(30.0, 6.0)});
        bool ok = true;
        Perceiver per = model_perceiver(model, cfg);
        for (auto& c : cases) {
            int budget =
                static_cast<int>(std::lround(1.6 * c.shape->perimeter() / cfg.e_step));
            TrajectoryLog log =
                follow_contour(per, *c.shape, c.shape->boundary_start(), budget, cfg);
            bool shape_ok = log.completed;
            TrajectoryMetrics m{};
            if (shape_ok) {
                m = trajectory_metrics(log, *c.shape);
                shape_ok = m.max_boundary_dev_mm <= 5.0 && m.loop_closure_mm <= 6.0 &&
                           m.orientation_rms_deg <= 20.0;
            }
            std::printf("  %-20s %s: rms %.2f deg, max dev %.2f mm, closure %.2f mm\n",
                        c.name.c_str(), shape_ok ? "ok" : "FAIL", m.orientation_rms_deg,
                        m.max_boundary_dev_mm, m.loop_closure_mm);
            ok = ok && shape_ok;
        }
        Spiral spiral(cfg.spiral_a, cfg.spiral_b, cfg.spiral_turns, cfg.spiral_half_width);
        int budget = static_cast<int>(std::lround(spiral.perimeter() / cfg.e_step));
        TrajectoryLog slog =
            follow_contour(per, spiral, spiral.boundary_start(), budget, cfg);
        std::printf("  spiral               %s: %zu steps, no contact loss\n",
                    slog.completed ? "ok" : "FAIL", slog.steps.size());
        return ok && slog.completed;
    });

    criterion(8, "oracle controller closes the circle within 3 mm", [&] {
        Circle circle(cfg.circle_radius);
        int budget = static_cast<int>(std::lround(1.6 * circle.perimeter() / cfg.e_step));
        TrajectoryLog log = follow_contour(oracle_perceiver(), circle,
                                           circle.boundary_start(), budget, cfg);
        if (!log.completed) return false;
        TrajectoryMetrics m = trajectory_metrics(log, circle);
        double travelled = static_cast<double>(log.steps.size()) * cfg.e_step;
        std::printf("  closure %.3f mm after %.0f mm of travel\n", m.loop_closure_mm,
                    travelled);
        return m.loop_closure_mm <= 3.0 &&
               travelled >= circle.perimeter() - 3.0 * cfg.e_step;
    });

    criterion(9, "numerical property suites", [&] {
        bool ok = true;
        Rng rng(97);

        // Kernel Gram matrices are positive semi-definite.
        for (int trial = 0; trial < 50 && ok; ++trial) {
            int n = 5 + static_cast<int>(rng.next_u64() % 26);
            int d = 1 + static_cast<int>(rng.next_u64() % 4);
            MatX X(n, d);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j) X(i, j) = 3.0 * rng.next_gaussian();
            double ell = std::exp(rng.next_gaussian());
            double sf2 = std::exp(rng.next_gaussian());
            MatX K(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    K(i, j) = matern52((X.row(i) - X.row(j)).norm() / ell, sf2);
            K.diagonal().array() += 1e-8;
            Eigen::SelfAdjointEigenSolver<MatX> eig(K);
            ok = eig.eigenvalues().minCoeff() >= -1e-8;
        }
        if (!ok) std::printf("  kernel PSD check failed\n");

        // Analytic LML gradients vs central finite differences.
        bool grads_ok = true;
        for (int trial = 0; trial < 8 && grads_ok; ++trial) {
            int n = 6 + static_cast<int>(rng.next_u64() % 10);
            int d = 1 + static_cast<int>(rng.next_u64() % 3);
            MatX X(n, d);
            VecX y(n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < d; ++j) X(i, j) = rng.next_gaussian();
                y(i) = std::sin(X(i, 0)) + 0.1 * rng.next_gaussian();
            }
            bool shared = trial % 2 == 0;
            detail::PairData pd = detail::PairData::build(X, shared);
            int m = shared ? 1 : d;
            VecX logp(m + 2);
            for (int k = 0; k < m + 1; ++k) logp(k) = 0.3 * rng.next_gaussian();
            logp(m + 1) = -2.0 + 0.3 * rng.next_gaussian();
            detail::LmlResult res = detail::lml_with_grad(pd, y, logp, true);
            if (!res.ok) {
                grads_ok = false;
                break;
            }
            const double h = 1e-5;
            for (int k = 0; k < m + 2; ++k) {
                VecX lp = logp, lm = logp;
                lp(k) += h;
                lm(k) -= h;
                double fd = (detail::lml_with_grad(pd, y, lp, false).lml -
                             detail::lml_with_grad(pd, y, lm, false).lml) /
                            (2.0 * h);
                double scale = std::max({std::abs(fd), std::abs(res.grad(k)), 1e-6});
                if (std::abs(res.grad(k) - fd) / scale >= 1e-4) grads_ok = false;
            }
        }
        if (!grads_ok) std::printf("  LML gradient check failed\n");
        ok = ok && grads_ok;

        // Angle decode round trip.
        bool angles_ok = true;
        for (int k = 0; k < 1000; ++k) {
            double th = wrap_deg(360.0 * rng.next_uniform() - 180.0);
            if (th <= -180.0) th = 180.0;
            auto [s, c] = encode_angle(th);
            if (std::abs(wrap_deg(decode_angle(s, c) - th)) >= 1e-9) angles_ok = false;
        }
        if (!angles_ok) std::printf("  angle round-trip check failed\n");
        ok = ok && angles_ok;

        // Tukey pruning vs a brute-force fence oracle.
        bool tukey_ok = true;
        for (int trial = 0; trial < 100 && tukey_ok; ++trial) {
            int n = 8 + static_cast<int>(rng.next_u64() % 40);
            std::vector<double> inv(n);
            for (int i = 0; i < n; ++i) {
                double v = std::exp(2.0 * rng.next_gaussian());
                if (rng.next_uniform() < 0.05) v *= 100.0;
                inv[i] = v;
            }
            if (prune(records_from_inv(inv), LabelKind::orientation) !=
                brute_force_keep(inv))
                tukey_ok = false;
        }
        if (!tukey_ok) std::printf("  Tukey fence oracle check failed\n");
        ok = ok && tukey_ok;

        // Lateral pruning retains at least 90% of every input.
        bool lat_ok = true;
        for (int trial = 0; trial < 30 && lat_ok; ++trial) {
            int n = 10 + static_cast<int>(rng.next_u64() % 100);
            std::vector<double> inv(n);
            for (int i = 0; i < n; ++i)
                inv[i] = (i % 2 == 0) ? 1.0 : 1e6 * (1.0 + rng.next_uniform());
            auto keep = prune(records_from_inv(inv), LabelKind::lateral);
            int kept = static_cast<int>(std::count(keep.begin(), keep.end(), true));
            if (kept < static_cast<int>(std::ceil(0.9 * n))) lat_ok = false;
        }
        if (!lat_ok) std::printf("  lateral retention check failed\n");
        return ok && lat_ok;
    });

    if (g_failures == 0)
        std::printf("all acceptance criteria passed\n");
    else
        std::printf("%d acceptance criteria FAILED\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
