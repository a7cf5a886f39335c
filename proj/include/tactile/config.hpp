#ifndef TACTILE_CONFIG_HPP
#define TACTILE_CONFIG_HPP

#include "tactile/common.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace tactile {

/**
 * Experiment configuration: sensor-model constants, collection grids,
 * controller constants and shape parameters. Loaded from a flat
 * `key = value` text file; every key may also be overridden by CLI flags.
 *
 * The sensor constants were calibrated on the synthetic sensor so that the
 * full pipeline reproduces the paper's qualitative results (see README).
 */
struct ExperimentConfig {
    std::uint64_t seed = 7;

    // Sensor model.
    double alpha = 2.2;             // contact-spread gain (px per mm of depth)
    double beta = 0.2;              // smooth shear-drag gain (px per mm of drag)
    double gamma = 4.8;             // stick-slip ripple gain (px per mm of drag)
    double ripple_wavelength = 2.0; // spatial wavelength of the slip ripple (mm)
    double w = 6.0;                 // soft-coverage sigmoid width (mm)
    double lambda = 0.7;            // shear-drag retention per step
    double s_max = 6.0;             // drag saturation cap (mm)
    double eta = 0.7;               // pin-position noise std (px)
    double pitch = 3.0;             // hexagonal pin pitch (mm)
    double px_per_mm = 5.0;
    double contact_gate = 9.0;      // |lateral| beyond which there is no contact (mm)

    // Collection grids.
    std::vector<double> orientations;   // degrees
    std::vector<double> laterals;       // mm, descending from off-edge to on-edge
    std::vector<double> depths;         // mm
    std::vector<double> directions;     // sliding directions, degrees
    double slide_depth = 4.0;           // depth during multi-directional sliding (mm)

    // Controller.
    double e_step = 3.0;     // exploratory step (mm)
    double gain_k = 0.35;    // lateral correction gain
    double l_desired = 0.0;  // desired lateral offset (mm)
    double task_depth = 3.0; // indentation depth during contour following (mm)
    double rho_floor = 3.0;  // contact-loss threshold on rho (PC units)
    bool ccw = false;        // traverse closed shapes counterclockwise

    // Shape parameters.
    double rect_width = 60.0, rect_height = 40.0;
    double circle_radius = 30.0;
    double flower_r0 = 30.0, flower_amp = 6.0;
    double spiral_a = 10.0, spiral_b = 3.5, spiral_turns = 2.5, spiral_half_width = 5.0;

    ExperimentConfig() {
        for (int t = -160; t <= 180; t += 20) orientations.push_back(t);
        laterals = {9.9, 6.0, 4.0, 2.0, 0.0, -2.0, -4.0, -6.0};
        depths = {2.0, 4.0};
        for (int d = 0; d < 360; d += 45) directions.push_back(d);
    }

    void validate() const {
        auto positive = [](double v, const char* key) {
            if (!(v > 0.0)) throw ConfigError(std::string("config key '") + key + "' must be positive");
        };
        positive(alpha, "alpha");
        positive(w, "w");
        positive(s_max, "s_max");
        positive(pitch, "pitch");
        positive(px_per_mm, "px_per_mm");
        positive(contact_gate, "contact_gate");
        positive(ripple_wavelength, "ripple_wavelength");
        if (beta < 0.0) throw ConfigError("config key 'beta' must be >= 0");
        if (gamma < 0.0) throw ConfigError("config key 'gamma' must be >= 0");
        if (eta < 0.0) throw ConfigError("config key 'eta' must be >= 0");
        if (lambda < 0.0 || lambda >= 1.0) throw ConfigError("config key 'lambda' must be in [0, 1)");
        if (orientations.empty() || laterals.empty() || depths.empty() || directions.empty())
            throw ConfigError("config grids must be non-empty");
        for (double d : depths)
            if (d < 0.0 || d > 10.0) throw ConfigError("config key 'depths': depth must be in [0, 10] mm");
        if (slide_depth < 0.0 || slide_depth > 10.0)
            throw ConfigError("config key 'slide_depth' must be in [0, 10] mm");
        if (task_depth < 0.0 || task_depth > 10.0)
            throw ConfigError("config key 'task_depth' must be in [0, 10] mm");
        positive(e_step, "e");
        if (gain_k < 0.0) throw ConfigError("config key 'K' must be >= 0");
    }

    /** Canonical serialization, also used for the metadata config hash. */
    std::string to_string() const {
        std::ostringstream os;
        os.precision(17);
        os << "seed = " << seed << "\n";
        os << "alpha = " << alpha << "\nbeta = " << beta << "\ngamma = " << gamma << "\n";
        os << "ripple_wavelength = " << ripple_wavelength << "\nw = " << w << "\n";
        os << "lambda = " << lambda << "\ns_max = " << s_max << "\neta = " << eta << "\n";
        os << "pitch = " << pitch << "\npx_per_mm = " << px_per_mm << "\n";
        os << "contact_gate = " << contact_gate << "\nslide_depth = " << slide_depth << "\n";
        auto grid = [&os](const char* key, const std::vector<double>& v) {
            os << key << " =";
            for (double x : v) os << " " << x;
            os << "\n";
        };
        grid("orientations", orientations);
        grid("laterals", laterals);
        grid("depths", depths);
        grid("directions", directions);
        os << "e = " << e_step << "\nK = " << gain_k << "\nl_d = " << l_desired << "\n";
        os << "task_depth = " << task_depth << "\nrho_floor = " << rho_floor << "\n";
        os << "ccw = " << (ccw ? 1 : 0) << "\n";
        os << "rect_width = " << rect_width << "\nrect_height = " << rect_height << "\n";
        os << "circle_radius = " << circle_radius << "\n";
        os << "flower_r0 = " << flower_r0 << "\nflower_amp = " << flower_amp << "\n";
        os << "spiral_a = " << spiral_a << "\nspiral_b = " << spiral_b << "\n";
        os << "spiral_turns = " << spiral_turns << "\nspiral_half_width = " << spiral_half_width << "\n";
        return os.str();
    }

    void set(const std::string& key, const std::string& value) {
        std::istringstream is(value);
        auto scalar = [&is, &key, &value]() {
            double v;
            if (!(is >> v)) throw ConfigError("config key '" + key + "': bad numeric value '" + value + "'");
            return v;
        };
        auto grid = [&is]() {
            std::vector<double> v;
            double x;
            while (is >> x) v.push_back(x);
            return v;
        };
        if (key == "seed") { std::uint64_t s; if (!(is >> s)) throw ConfigError("bad seed"); seed = s; }
        else if (key == "alpha") alpha = scalar();
        else if (key == "beta") beta = scalar();
        else if (key == "gamma") gamma = scalar();
        else if (key == "ripple_wavelength") ripple_wavelength = scalar();
        else if (key == "w") w = scalar();
        else if (key == "lambda") lambda = scalar();
        else if (key == "s_max") s_max = scalar();
        else if (key == "eta") eta = scalar();
        else if (key == "pitch") pitch = scalar();
        else if (key == "px_per_mm") px_per_mm = scalar();
        else if (key == "contact_gate") contact_gate = scalar();
        else if (key == "slide_depth") slide_depth = scalar();
        else if (key == "orientations") orientations = grid();
        else if (key == "laterals") laterals = grid();
        else if (key == "depths") depths = grid();
        else if (key == "directions") directions = grid();
        else if (key == "e") e_step = scalar();
        else if (key == "K") gain_k = scalar();
        else if (key == "l_d") l_desired = scalar();
        else if (key == "task_depth") task_depth = scalar();
        else if (key == "rho_floor") rho_floor = scalar();
        else if (key == "ccw") ccw = scalar() != 0.0;
        else if (key == "rect_width") rect_width = scalar();
        else if (key == "rect_height") rect_height = scalar();
        else if (key == "circle_radius") circle_radius = scalar();
        else if (key == "flower_r0") flower_r0 = scalar();
        else if (key == "flower_amp") flower_amp = scalar();
        else if (key == "spiral_a") spiral_a = scalar();
        else if (key == "spiral_b") spiral_b = scalar();
        else if (key == "spiral_turns") spiral_turns = scalar();
        else if (key == "spiral_half_width") spiral_half_width = scalar();
        else throw ConfigError("unknown config key '" + key + "'");
    }

    static ExperimentConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        ExperimentConfig cfg;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            auto eq = line.find('=');
            if (eq == std::string::npos) {
                bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
                if (blank) continue;
                throw ConfigError("config parse error at line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
            }
            auto trim = [](std::string s) {
                auto b = s.find_first_not_of(" \t\r");
                auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
        cfg.validate();
        return cfg;
    }

    /** FNV-1a hash of the canonical serialization. */
    std::uint64_t hash() const {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (char c : to_string()) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001B3ULL;
        }
        return h;
    }
};

}  // namespace tactile

#endif  // TACTILE_CONFIG_HPP
