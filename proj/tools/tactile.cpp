// tactile: dataset generation, training, evaluation, contour following and
// PC-scatter export for the synthetic shear-invariant tactile pipeline.

#include "tactile/config.hpp"
#include "tactile/control.hpp"
#include "tactile/perception.hpp"
#include "tactile/sensor.hpp"
#include "tactile/svg.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

namespace {

using namespace tactile;

void write_metadata(const std::string& out_path, const ExperimentConfig& cfg,
                    const std::string& extra = "") {
    std::ofstream meta(out_path + ".meta");
    if (!meta) return;
    auto now = std::chrono::system_clock::now();
    meta << "config_hash = " << std::hex << cfg.hash() << std::dec << "\n";
    meta << "seed = " << cfg.seed << "\n";
    meta << "timestamp_unix = "
         << std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count()
         << "\n";
    auto grid = [&meta](const char* key, const std::vector<double>& v) {
        meta << key << " =";
        for (double x : v) meta << " " << x;
        meta << "\n";
    };
    grid("orientations", cfg.orientations);
    grid("laterals", cfg.laterals);
    grid("depths", cfg.depths);
    grid("directions", cfg.directions);
    if (!extra.empty()) meta << extra;
}

std::unique_ptr<Shape2D> make_shape(const std::string& kind, const ExperimentConfig& cfg,
                                    const std::string& polyline_file) {
    if (kind == "rect") return std::make_unique<Rectangle>(cfg.rect_width, cfg.rect_height);
    if (kind == "circle") return std::make_unique<Circle>(cfg.circle_radius);
    if (kind == "flower") return std::make_unique<Flower>(cfg.flower_r0, cfg.flower_amp);
    if (kind == "spiral")
        return std::make_unique<Spiral>(cfg.spiral_a, cfg.spiral_b, cfg.spiral_turns,
                                        cfg.spiral_half_width);
    if (kind == "polyline") {
        if (polyline_file.empty())
            throw ConfigError("shape 'polyline' requires --polyline-file <csv of x,y rows>");
        std::ifstream in(polyline_file);
        if (!in) throw ConfigError("cannot open polyline file: " + polyline_file);
        std::vector<Vec2> pts;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream is(line);
            std::string a, b;
            if (!std::getline(is, a, ',') || !std::getline(is, b, ','))
                throw ConfigError("polyline file: expected 'x,y' per line");
            pts.emplace_back(std::stod(a), std::stod(b));
        }
        return std::make_unique<Polyline>(std::move(pts));
    }
    throw ConfigError("unknown shape '" + kind + "'");
}

void write_eval_reports(const EvaluationReport& pipe, const EvaluationReport& base,
                        bool with_baseline, const std::string& out_prefix) {
    std::vector<int> dirs;
    std::set<int> all;
    for (const auto& [d, c] : pipe.on_cells) all.insert(d);
    for (const auto& [d, c] : pipe.off_cells) all.insert(d);
    dirs.assign(all.begin(), all.end());

    std::ofstream wide(out_prefix + "_table.csv");
    if (!wide) throw ConfigError("cannot open for writing: " + out_prefix + "_table.csv");
    wide.precision(17);
    wide << "model";
    for (int d : dirs) {
        std::string label = d == 90 ? "90_270" : std::to_string(d);
        wide << ",dir" << label << "_on_rms_deg,dir" << label << "_off_rms_deg";
    }
    wide << ",lateral_rms_mm\n";
    auto row = [&wide, &dirs](const std::string& name, const EvaluationReport& r) {
        wide << name;
        for (int d : dirs) {
            wide << ",";
            if (auto it = r.on_cells.find(d); it != r.on_cells.end()) wide << it->second.rms_deg;
            wide << ",";
            if (auto it = r.off_cells.find(d); it != r.off_cells.end()) wide << it->second.rms_deg;
        }
        wide << "," << r.lateral_rms_mm << "\n";
    };
    row("pca_pipeline", pipe);
    if (with_baseline) row("raw_baseline", base);

    std::ofstream lng(out_prefix + "_long.csv");
    if (!lng) throw ConfigError("cannot open for writing: " + out_prefix + "_long.csv");
    lng.precision(17);
    lng << "model,direction_deg,group,rms_deg,count\n";
    auto long_rows = [&lng](const std::string& name, const EvaluationReport& r) {
        for (const auto& [d, c] : r.on_cells)
            lng << name << "," << d << ",on," << c.rms_deg << "," << c.count << "\n";
        for (const auto& [d, c] : r.off_cells)
            lng << name << "," << d << ",off," << c.rms_deg << "," << c.count << "\n";
    };
    long_rows("pca_pipeline", pipe);
    if (with_baseline) long_rows("raw_baseline", base);
}

int run(int argc, char** argv) {
    CLI::App app{"Synthetic shear-invariant tactile perception pipeline"};
    app.require_subcommand(1);

    std::string config_file, out = "out", shape_kind = "circle", polyline_file;
    std::uint64_t seed_flag = 0;
    bool seed_set = false, baseline_flag = false;
    int steps_flag = 0;

    app.add_option("--config", config_file, "flat key = value config file");
    auto* seed_opt = app.add_option("--seed", seed_flag, "override the config seed");

    auto load_cfg = [&]() {
        ExperimentConfig cfg =
            config_file.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_file);
        if (seed_set) cfg.seed = seed_flag;
        cfg.validate();
        return cfg;
    };

    // gen
    auto* gen = app.add_subcommand("gen", "generate a dataset CSV");
    std::string gen_kind;
    gen->add_option("kind", gen_kind, "train | multidir")->required();
    gen->add_option("--out", out, "output CSV path");

    // train
    auto* train = app.add_subcommand("train", "fit the perception model (and raw baseline)");
    std::string train_csv;
    train->add_option("train_csv", train_csv, "tap training dataset CSV")->required();
    train->add_option("--out", out, "output model path");

    // eval
    auto* eval = app.add_subcommand("eval", "offline Table-I style evaluation");
    std::string model_file, multi_csv;
    eval->add_option("model", model_file, "perception model file")->required();
    eval->add_option("multi_csv", multi_csv, "multi-directional dataset CSV")->required();
    eval->add_option("--out", out, "output prefix");
    eval->add_flag("--baseline", baseline_flag, "include the raw-pin baseline rows");

    // follow
    auto* follow = app.add_subcommand("follow", "closed-loop contour following");
    follow->add_option("model", model_file, "perception model file")->required();
    follow->add_option("--shape", shape_kind, "rect | circle | flower | spiral | polyline");
    follow->add_option("--polyline-file", polyline_file, "vertices CSV for --shape polyline");
    follow->add_option("--steps", steps_flag, "step budget (default: perimeter / e)");
    follow->add_option("--out", out, "output prefix");
    double radius_flag = 0.0;
    auto* radius_opt = follow->add_option("--radius", radius_flag, "circle radius (mm)");

    // project
    auto* project_cmd = app.add_subcommand("project", "PC scatter export (components 1-5)");
    std::string dataset_csv, components_str = "1,2,3", project_train_csv;
    project_cmd->add_option("model", model_file, "perception model file")->required();
    project_cmd->add_option("dataset_csv", dataset_csv, "dataset to project")->required();
    project_cmd->add_option("--components", components_str, "comma list, e.g. 4,5");
    project_cmd->add_option("--train", project_train_csv,
                            "tap training CSV (required for components > 3)");
    project_cmd->add_option("--out", out, "output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors are exit code 1; --help is 0
    }
    seed_set = seed_opt->count() > 0;

    if (gen->parsed()) {
        ExperimentConfig cfg = load_cfg();
        LabeledDataset ds;
        if (gen_kind == "train")
            ds = collect_training_set(cfg);
        else if (gen_kind == "multidir")
            ds = collect_multidirectional_set(cfg);
        else
            throw ConfigError("gen kind must be 'train' or 'multidir'");
        save_dataset_csv(ds, out);
        write_metadata(out, cfg, "kind = " + gen_kind + "\n");
        std::cout << "wrote " << ds.size() << " frames to " << out << "\n";
    } else if (train->parsed()) {
        ExperimentConfig cfg = load_cfg();
        LabeledDataset ds = load_dataset_csv(train_csv);
        PerceptionModel model = fit_perception(ds, true, cfg.seed);
        save_perception_model(model, out);
        write_metadata(out, cfg);
        double cum = 0.0;
        for (double r : model.basis.explained_variance_ratio) cum += r;
        std::cout << "model written to " << out << " (first-3 cumulative EVR " << cum << ")\n";
    } else if (eval->parsed()) {
        ExperimentConfig cfg = load_cfg();
        PerceptionModel model = load_perception_model(model_file);
        if (baseline_flag && !model.baseline)
            throw ConfigError("--baseline requested but the model has no baseline GPs");
        LabeledDataset multi = load_dataset_csv(multi_csv);
        auto [pipe, base] = evaluate_offline(model, multi, cfg.contact_gate);
        write_eval_reports(pipe, base, baseline_flag, out);
        write_metadata(out + "_table.csv", cfg, pipe.metadata + "\n");
        std::cout << "pipeline lateral rms " << pipe.lateral_rms_mm << " mm\n";
        for (const auto& [d, c] : pipe.on_cells)
            std::cout << "dir " << d << " on rms " << c.rms_deg << " deg (n=" << c.count << ")\n";
    } else if (follow->parsed()) {
        ExperimentConfig cfg = load_cfg();
        if (radius_opt->count() > 0) cfg.circle_radius = radius_flag;
        PerceptionModel model = load_perception_model(model_file);
        auto shape = make_shape(shape_kind, cfg, polyline_file);
        // Closed shapes stop on loop closure; the default budget leaves slack.
        double budget = shape->closed() ? 1.6 : 1.0;
        int n_steps = steps_flag > 0
                          ? steps_flag
                          : static_cast<int>(std::lround(budget * shape->perimeter() / cfg.e_step));
        TrajectoryLog log = follow_contour(model_perceiver(model, cfg), *shape,
                                           shape->boundary_start(), n_steps, cfg);
        save_trajectory_csv(log, out + "_trajectory.csv");
        save_trajectory_svg(log, *shape, out + "_trajectory.svg");
        write_metadata(out + "_trajectory.csv", cfg, "shape = " + shape_kind + "\n");
        if (!log.completed)
            throw TaskError("contact lost after " + std::to_string(log.steps.size()) + " steps");
        TrajectoryMetrics m = trajectory_metrics(log, *shape);
        std::cout << "steps " << log.steps.size() << ", orientation rms " << m.orientation_rms_deg
                  << " deg, max boundary dev " << m.max_boundary_dev_mm << " mm, closure "
                  << m.loop_closure_mm << " mm\n";
    } else if (project_cmd->parsed()) {
        ExperimentConfig cfg = load_cfg();
        PerceptionModel model = load_perception_model(model_file);
        std::vector<int> comps;
        std::istringstream cs(components_str);
        std::string tok;
        while (std::getline(cs, tok, ',')) {
            int c = std::stoi(tok);
            if (c < 1 || c > 5) throw ConfigError("components must be in 1..5");
            comps.push_back(c);
        }
        int max_comp = *std::max_element(comps.begin(), comps.end());
        ProjectionBasis basis = model.basis;
        if (max_comp > basis.components()) {
            if (project_train_csv.empty())
                throw ConfigError("components > 3 need --train to fit a 5-component basis");
            basis = fit_pca(load_dataset_csv(project_train_csv), 5);
        }
        LabeledDataset ds = load_dataset_csv(dataset_csv);
        std::ofstream os(out);
        if (!os) throw ConfigError("cannot open for writing: " + out);
        os.precision(17);
        os << "frame_id,orientation_deg,lateral_mm,depth_mm,slide_dir_deg";
        for (int c : comps) os << ",pc" << c;
        os << "\n";
        for (size_t i = 0; i < ds.size(); ++i) {
            VecX p = project_k(basis, ds.frames[i]);
            os << i << "," << ds.labels[i].orientation_deg << "," << ds.labels[i].lateral_mm << ","
               << ds.labels[i].depth_mm << ",";
            if (ds.slide_dir_deg[i]) os << *ds.slide_dir_deg[i];
            for (int c : comps) os << "," << p(c - 1);
            os << "\n";
        }
        write_metadata(out, cfg, "components = " + components_str + "\n");
        std::cout << "wrote projections for " << ds.size() << " frames to " << out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const tactile::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const tactile::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const tactile::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const tactile::TaskError& e) {
        std::cerr << "task failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
