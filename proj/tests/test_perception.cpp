#include <catch2/catch_amalgamated.hpp>

#include "tactile/perception.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace tactile;

namespace {
struct Fixture {
    ExperimentConfig cfg;
    LabeledDataset train;
    LabeledDataset multi;
    PerceptionModel model;

    Fixture()
        : train(collect_training_set(cfg)),
          multi(collect_multidirectional_set(cfg)),
          model(fit_perception(train, true)) {}
};

const Fixture& fixture() {
    static Fixture f;
    return f;
}

std::string export_string(const PerceptionModel& m) {
    std::string path = "test_perception_model_tmp.txt";
    save_perception_model(m, path);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::remove(path.c_str());
    return ss.str();
}
}  // namespace

TEST_CASE("fitting twice yields identical exported models") {
    const auto& f = fixture();
    PerceptionModel again = fit_perception(f.train, true);
    CHECK(export_string(f.model) == export_string(again));
}

TEST_CASE("model export round trip preserves predictions") {
    const auto& f = fixture();
    std::string path = "test_perception_roundtrip.txt";
    save_perception_model(f.model, path);
    PerceptionModel back = load_perception_model(path);
    std::remove(path.c_str());
    for (size_t i = 0; i < f.multi.size(); i += 97) {
        PosePrediction a = perceive(f.model, f.multi.frames[i]);
        PosePrediction b = perceive(back, f.multi.frames[i]);
        CHECK(std::abs(a.theta_hat_deg - b.theta_hat_deg) < 1e-9);
        CHECK(std::abs(a.lateral_hat_mm - b.lateral_hat_mm) < 1e-9);
    }
    CHECK_THROWS_AS(load_perception_model("missing_model.txt"), ConfigError);
}

TEST_CASE("fit on all-no-contact frames fails") {
    ExperimentConfig cfg;
    cfg.eta = 0.0;
    cfg.laterals = {9.9};
    LabeledDataset ds = collect_training_set(cfg);  // all frames identical rest
    CHECK_THROWS_AS(fit_perception(ds, false), NumericalError);
}

TEST_CASE("no-contact duplicates are pruned from the orientation set") {
    const auto& f = fixture();
    // The orientation GP's training rows: none may come from the 9.9 mm
    // no-contact poses (their S is ~0, so S^-1 crosses any Tukey fence).
    const MatX& Xo = f.model.gps.gp_sin.train_inputs;
    // Build the standardized inputs of every no-contact training point.
    int matches = 0;
    for (size_t i = 0; i < f.train.size(); ++i) {
        if (f.train.labels[i].lateral_mm != 9.9) continue;
        VecX x = f.model.standardization.apply(f.model.features_of(f.train.frames[i]));
        for (int r = 0; r < Xo.rows(); ++r)
            if ((Xo.row(r).transpose() - x).norm() < 1e-12) ++matches;
    }
    CHECK(matches == 0);
    // And the pruned set is genuinely smaller than the full grid.
    CHECK(Xo.rows() < static_cast<int>(f.train.size()));
    CHECK(Xo.rows() > 0);
}

TEST_CASE("perceive at training frames recovers the pose") {
    const auto& f = fixture();
    std::vector<double> errs;
    for (size_t i = 0; i < f.train.size(); ++i) {
        const auto& lab = f.train.labels[i];
        if (lab.lateral_mm > 0.0) continue;  // on-object taps
        PosePrediction p = perceive(f.model, f.train.frames[i]);
        errs.push_back(p.theta_hat_deg - lab.orientation_deg);
        if (lab.orientation_deg == 40.0 && lab.lateral_mm == -2.0 && lab.depth_mm == 2.0)
            CHECK(std::abs(wrap_deg(p.theta_hat_deg - 40.0)) <= 10.0);
    }
    CHECK(circular_rms_deg(errs) <= 10.0);
}

TEST_CASE("rest frame gives a finite prior-reversion prediction") {
    const auto& f = fixture();
    PinLayout layout = PinLayout::hexagonal(f.cfg.pitch, f.cfg.px_per_mm);
    PinFrame rest = layout.rest_frame();
    SphericalFeature feat = f.model.features_of(rest);
    CHECK(feat.rho < 0.2 * f.model.median_contact_rho);
    PosePrediction p = perceive(f.model, rest);
    CHECK(std::isfinite(p.theta_hat_deg));
    CHECK(std::isfinite(p.lateral_hat_mm));
}

TEST_CASE("shear invariance: same pose, opposite sliding directions") {
    const auto& f = fixture();
    // Pair frames at identical poses collected while sliding 90 vs 270.
    for (double th : {0.0, 80.0, -120.0}) {
        PinFrame f90, f270;
        bool got90 = false, got270 = false;
        for (size_t i = 0; i < f.multi.size(); ++i) {
            const auto& lab = f.multi.labels[i];
            if (lab.orientation_deg != th || lab.lateral_mm != -6.0) continue;
            if (!f.multi.slide_dir_deg[i]) continue;
            // Take the last frame of each run (fully developed drag).
            if (*f.multi.slide_dir_deg[i] == 90.0) {
                f90 = f.multi.frames[i];
                got90 = true;
            } else if (*f.multi.slide_dir_deg[i] == 270.0) {
                f270 = f.multi.frames[i];
                got270 = true;
            }
        }
        REQUIRE((got90 && got270));
        double t1 = perceive(f.model, f90).theta_hat_deg;
        double t2 = perceive(f.model, f270).theta_hat_deg;
        CHECK(std::abs(wrap_deg(t1 - t2)) <= 15.0);
    }
}

TEST_CASE("evaluation report structure") {
    const auto& f = fixture();
    auto [pipe, base] = evaluate_offline(f.model, f.multi, f.cfg.contact_gate);

    // Directions 90 and 270 merge into one cell keyed 90, with no Off cell.
    CHECK(pipe.on_cells.count(90) == 1);
    CHECK(pipe.off_cells.count(90) == 0);
    CHECK(pipe.on_cells.count(270) == 0);
    CHECK(pipe.off_cells.count(270) == 0);

    // 6 directions with Off cells (0, 45, 135, 180, 225, 315), 7 On cells.
    CHECK(pipe.on_cells.size() == 7);
    CHECK(pipe.off_cells.size() == 6);

    // Counts: 7 on-object laterals x 2 runs x 18 orientations for 90/270.
    CHECK(pipe.on_cells.at(90).count == 288);
    int total = 0;
    for (const auto& [d, c] : pipe.on_cells) total += c.count;
    for (const auto& [d, c] : pipe.off_cells) total += c.count;
    // Everything except the no-contact 9.9 rows of the 6 crossing directions.
    CHECK(total == pipe.total_count - 6 * 18);

    CHECK(pipe.lateral_rms_mm >= 0.0);
    CHECK(base.on_cells.size() == 7);
    CHECK_FALSE(pipe.metadata.empty());
}

TEST_CASE("evaluation arithmetic on synthetic predictions") {
    // A small handmade dataset: one direction, cell of 4, one 10-degree miss.
    LabeledDataset ds;
    for (int i = 0; i < 4; ++i) {
        ds.frames.push_back(VecX::Zero(kFrameDims));
        ds.labels.push_back(SensorPose{0.0, -2.0, 4.0});
        ds.slide_dir_deg.push_back(0.0);
    }
    std::vector<PosePrediction> preds(4);
    for (int i = 0; i < 4; ++i) {
        preds[i].theta_hat_deg = 0.0;
        preds[i].lateral_hat_mm = -2.0;
    }
    preds[2].theta_hat_deg = 10.0;

    EvaluationReport rep = evaluate_predictions(preds, ds, 9.0);
    CHECK(rep.on_cells.at(0).rms_deg == Catch::Approx(5.0));  // sqrt(100/4)
    CHECK(rep.on_cells.at(0).count == 4);
    CHECK(rep.lateral_rms_mm == Catch::Approx(0.0).margin(1e-12));

    // A perfect predictor scores zero everywhere.
    preds[2].theta_hat_deg = 0.0;
    rep = evaluate_predictions(preds, ds, 9.0);
    CHECK(rep.on_cells.at(0).rms_deg == Catch::Approx(0.0).margin(1e-12));

    CHECK_THROWS_AS(evaluate_predictions({}, ds, 9.0), InputError);
}

TEST_CASE("offline criteria on the default seed") {
    const auto& f = fixture();
    auto [pipe, base] = evaluate_offline(f.model, f.multi, f.cfg.contact_gate);

    // Pipeline shear ordering at the merged 90/270 cell.
    double pipe90 = pipe.on_cells.at(90).rms_deg;
    double base90 = base.on_cells.at(90).rms_deg;
    CHECK(pipe90 <= 0.5 * base90);
    CHECK(pipe90 <= 15.0);
    CHECK(base90 >= 2.0 * pipe90);

    // Off <= On on average; lateral accuracy.
    CHECK(mean_cell_rms(pipe.off_cells) <= mean_cell_rms(pipe.on_cells));
    CHECK(pipe.lateral_rms_mm <= 3.0);
}
