#include <catch2/catch_amalgamated.hpp>

#include "tactile/sensor.hpp"

#include <cstdio>

using namespace tactile;

namespace {
ExperimentConfig noiseless() {
    ExperimentConfig cfg;
    cfg.eta = 0.0;
    return cfg;
}
}  // namespace

TEST_CASE("hexagonal layout has exactly 127 pins") {
    PinLayout layout = PinLayout::hexagonal(3.0, 5.0);
    REQUIRE(static_cast<int>(layout.rest_mm.size()) == kNumPins);
    // Point symmetry of the hex disc: for every pin q there is a pin -q.
    for (const Vec2& p : layout.rest_mm) {
        bool found = false;
        for (const Vec2& q : layout.rest_mm)
            if ((p + q).norm() < 1e-9) found = true;
        CHECK(found);
    }
    // Outer ring radius: 6 * pitch.
    double rmax = 0.0;
    for (const Vec2& p : layout.rest_mm) rmax = std::max(rmax, p.norm());
    CHECK(rmax == Catch::Approx(18.0));
}

TEST_CASE("no-contact identity: zero depth, drag and noise gives rest frame") {
    ExperimentConfig cfg = noiseless();
    PinLayout layout = PinLayout::hexagonal(cfg.pitch, cfg.px_per_mm);
    PinFrame f = simulate_frame(layout, SensorPose{0.0, 0.0, 0.0}, ShearState{}, 1, cfg);
    CHECK((f - layout.rest_frame()).norm() == 0.0);
    // Lateral 9.9 mm is beyond the contact gate: also rest positions.
    PinFrame g = simulate_frame(layout, SensorPose{40.0, 9.9, 4.0}, ShearState{}, 1, cfg);
    CHECK((g - layout.rest_frame()).norm() == 0.0);
}

TEST_CASE("golden pin displacements at (theta=0, l=0, d=4), no drag/noise") {
    // Values frozen from an independent direct evaluation of the displacement
    // formula (rest*px_per_mm + alpha*d*c(q)*unit(q - centroid)).
    ExperimentConfig cfg = noiseless();
    PinLayout layout = PinLayout::hexagonal(cfg.pitch, cfg.px_per_mm);
    PinFrame f = simulate_frame(layout, SensorPose{0.0, 0.0, 4.0}, ShearState{}, 1, cfg);
    CHECK(f(2 * 0) == Catch::Approx(-94.24049838470265).epsilon(1e-12));
    CHECK(f(2 * 0 + 1) == Catch::Approx(1.1739563234354955).epsilon(1e-12));
    CHECK(f(2 * 63) == Catch::Approx(0.0).margin(1e-12));
    CHECK(f(2 * 63 + 1) == Catch::Approx(4.4).epsilon(1e-12));
    CHECK(f(2 * 100) == Catch::Approx(55.3068197995699).epsilon(1e-12));
    CHECK(f(2 * 100 + 1) == Catch::Approx(15.016976409436365).epsilon(1e-12));
}

TEST_CASE("contact-spread displacement matches the stated formula per pin") {
    ExperimentConfig cfg = noiseless();
    PinLayout layout = PinLayout::hexagonal(cfg.pitch, cfg.px_per_mm);
    SensorPose pose{30.0, -2.0, 2.0};
    PinFrame f = simulate_frame(layout, pose, ShearState{}, 1, cfg);

    // Independent evaluation of the documented model.
    Vec2 n = edge_normal(pose.orientation_deg);
    const int N = kNumPins;
    std::vector<double> c(N);
    double cs = 0.0;
    Vec2 cen = Vec2::Zero();
    for (int i = 0; i < N; ++i) {
        double sdf = pose.lateral_mm + layout.rest_mm[i].dot(n);
        c[i] = 1.0 / (1.0 + std::exp(sdf / cfg.w));
        cs += c[i];
        cen += c[i] * layout.rest_mm[i];
    }
    cen /= cs;
    for (int i = 0; i < N; ++i) {
        Vec2 d = layout.rest_mm[i] - cen;
        Vec2 u = d.norm() > 1e-12 ? Vec2(d / d.norm()) : Vec2::Zero();
        Vec2 expect = cfg.px_per_mm * layout.rest_mm[i] +
                      cfg.alpha * pose.depth_mm * c[i] * u;
        CHECK(f(2 * i) == Catch::Approx(expect.x()).margin(1e-10));
        CHECK(f(2 * i + 1) == Catch::Approx(expect.y()).margin(1e-10));
    }
}

TEST_CASE("model symmetry: opposite edge orientation reflects the field") {
    // The pin grid is point-symmetric, so the displacement field at
    // (theta + 180, l) is the point reflection of the field at (theta, l).
    ExperimentConfig cfg = noiseless();
    PinLayout layout = PinLayout::hexagonal(cfg.pitch, cfg.px_per_mm);
    PinFrame a = simulate_frame(layout, SensorPose{0.0, -2.0, 4.0}, ShearState{}, 1, cfg);
    PinFrame b = simulate_frame(layout, SensorPose{180.0, -2.0, 4.0}, ShearState{}, 1, cfg);
    VecX rest = layout.rest_frame();
    for (int i = 0; i < kNumPins; ++i) {
        // Find the pin at -q.
        int j = -1;
        for (int k = 0; k < kNumPins; ++k)
            if ((layout.rest_mm[k] + layout.rest_mm[i]).norm() < 1e-9) j = k;
        REQUIRE(j >= 0);
        Vec2 da(a(2 * i) - rest(2 * i), a(2 * i + 1) - rest(2 * i + 1));
        Vec2 db(b(2 * j) - rest(2 * j), b(2 * j + 1) - rest(2 * j + 1));
        CHECK((da + db).norm() == Catch::Approx(0.0).margin(1e-9));
    }
}

TEST_CASE("step_shear follows the stated recurrence") {
    ExperimentConfig cfg;  // lambda = 0.7
    ShearState s;
    s.drag_mm = Vec2(1.0, 0.0);
    s.in_contact = true;
    ShearState next = step_shear(s, Vec2(1.0, 0.0), true, cfg);
    CHECK(next.drag_mm.x() == Catch::Approx(1.7));
    CHECK(next.drag_mm.y() == Catch::Approx(0.0).margin(1e-12));

    // Contact break resets.
    ShearState broken = step_shear(next, Vec2(5.0, 0.0), false, cfg);
    CHECK(broken.drag_mm.norm() == 0.0);
    CHECK_FALSE(broken.in_contact);
}

TEST_CASE("step_shear fixed point 10/3 with s_max = 10") {
    ExperimentConfig cfg;
    cfg.s_max = 10.0;
    ShearState s;
    // lambda^120 ~ 1e-19: fully converged at double precision.
    for (int i = 0; i < 120; ++i) s = step_shear(s, Vec2(1.0, 0.0), true, cfg);
    CHECK(s.drag_mm.x() == Catch::Approx(10.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("drag norm is capped at s_max") {
    ExperimentConfig cfg;  // s_max = 6
    ShearState s;
    for (int i = 0; i < 30; ++i) {
        s = step_shear(s, Vec2(3.0, 0.0), true, cfg);
        CHECK(s.drag_mm.norm() <= cfg.s_max + 1e-12);
    }
    CHECK(s.drag_mm.norm() == Catch::Approx(cfg.s_max));
}

TEST_CASE("training set: 288 frames over the stated grids") {
    ExperimentConfig cfg;
    LabeledDataset ds = collect_training_set(cfg);
    REQUIRE(ds.size() == 288);
    REQUIRE(ds.labels.size() == 288);
    CHECK(ds.meta.kind == "train");

    // Orientation grid {-160, ..., 180}, lateral grid with 9.9 first.
    CHECK(cfg.orientations.size() == 18);
    CHECK(cfg.orientations.front() == -160.0);
    CHECK(cfg.orientations.back() == 180.0);
    CHECK(cfg.laterals == std::vector<double>{9.9, 6.0, 4.0, 2.0, 0.0, -2.0, -4.0, -6.0});
    CHECK(cfg.depths == std::vector<double>{2.0, 4.0});

    // Taps carry no sliding direction.
    for (const auto& d : ds.slide_dir_deg) CHECK_FALSE(d.has_value());
}

TEST_CASE("9.9 mm tap frames equal rest positions in a zero-noise run") {
    ExperimentConfig cfg = noiseless();
    PinLayout layout = PinLayout::hexagonal(cfg.pitch, cfg.px_per_mm);
    LabeledDataset ds = collect_training_set(cfg);
    VecX rest = layout.rest_frame();
    int checked = 0;
    for (size_t i = 0; i < ds.size(); ++i)
        if (ds.labels[i].lateral_mm == 9.9) {
            CHECK((ds.frames[i] - rest).norm() == 0.0);
            ++checked;
        }
    CHECK(checked == 36);  // 18 orientations x 2 depths
}

TEST_CASE("multi-directional set: 1152 frames, direction grid, contact at 90") {
    ExperimentConfig cfg;
    LabeledDataset ds = collect_multidirectional_set(cfg);
    REQUIRE(ds.size() == 1152);
    CHECK(cfg.directions ==
          std::vector<double>{0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0});

    // Direction 90 slides along the edge at the deepest lateral: every frame
    // of those runs is in contact.
    for (size_t i = 0; i < ds.size(); ++i) {
        if (!ds.slide_dir_deg[i] || *ds.slide_dir_deg[i] != 90.0) continue;
        CHECK(pose_in_contact(ds.labels[i], cfg));
        CHECK(ds.labels[i].lateral_mm == -6.0);
    }
}

TEST_CASE("determinism: identical config and seed give bit-identical datasets") {
    ExperimentConfig cfg;
    LabeledDataset a = collect_training_set(cfg);
    LabeledDataset b = collect_training_set(cfg);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK((a.frames[i] - b.frames[i]).norm() == 0.0);

    LabeledDataset ma = collect_multidirectional_set(cfg);
    LabeledDataset mb = collect_multidirectional_set(cfg);
    for (size_t i = 0; i < ma.size(); ++i) CHECK((ma.frames[i] - mb.frames[i]).norm() == 0.0);
}

TEST_CASE("path dependence: sliding 90 vs 270 yields different frames") {
    ExperimentConfig cfg = noiseless();
    PinLayout layout = PinLayout::hexagonal(cfg.pitch, cfg.px_per_mm);
    SensorPose pose{0.0, 0.0, 2.0};
    ShearState s90, s270;
    for (int k = 0; k < 4; ++k) {
        s90 = step_shear(s90, 2.0 * edge_tangent(0.0), true, cfg);
        s270 = step_shear(s270, -2.0 * edge_tangent(0.0), true, cfg);
    }
    PinFrame f90 = simulate_frame(layout, pose, s90, 1, cfg);
    PinFrame f270 = simulate_frame(layout, pose, s270, 1, cfg);
    // The ripple term is odd in the drag direction and cancels in the
    // difference of the two frames; what remains is the base shear coupling,
    // which must still be far above numerical noise in this zero-eta config.
    CHECK((f90 - f270).norm() > 10.0);
}

TEST_CASE("tap/slide consistency: zero drag reproduces the tap frame") {
    ExperimentConfig cfg = noiseless();
    PinLayout layout = PinLayout::hexagonal(cfg.pitch, cfg.px_per_mm);
    SensorPose pose{40.0, -4.0, 4.0};
    PinFrame tap = simulate_frame(layout, pose, ShearState{}, 9, cfg);
    ShearState zero_drag;  // a slide visit with drag forced to zero
    zero_drag.in_contact = true;
    PinFrame slide = simulate_frame(layout, pose, zero_drag, 9, cfg);
    CHECK((tap - slide).norm() == 0.0);
}

TEST_CASE("dataset CSV round trip") {
    ExperimentConfig cfg;
    cfg.orientations = {0.0, 90.0, 180.0, -90.0};
    LabeledDataset ds = collect_training_set(cfg);
    std::string path = "test_sensor_roundtrip.csv";
    save_dataset_csv(ds, path);
    LabeledDataset back = load_dataset_csv(path);
    REQUIRE(back.size() == ds.size());
    for (size_t i = 0; i < ds.size(); ++i) {
        CHECK((ds.frames[i] - back.frames[i]).norm() == 0.0);
        CHECK(ds.labels[i].orientation_deg == back.labels[i].orientation_deg);
        CHECK(ds.labels[i].lateral_mm == back.labels[i].lateral_mm);
        CHECK(ds.labels[i].depth_mm == back.labels[i].depth_mm);
    }
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_dataset_csv("does_not_exist.csv"), ConfigError);
}

TEST_CASE("pose validation") {
    CHECK_THROWS_AS((SensorPose{0.0, 0.0, 11.0}).validate(), InputError);
    CHECK_THROWS_AS((SensorPose{-181.0, 0.0, 2.0}).validate(), InputError);
    CHECK_NOTHROW((SensorPose{180.0, 9.9, 0.0}).validate());
}
