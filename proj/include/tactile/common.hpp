#ifndef TACTILE_COMMON_HPP
#define TACTILE_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tactile {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

/** Raised for malformed configuration or command-line usage (exit code 1). */
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/** Raised for invalid operation inputs (dimension mismatches, empty data). */
class InputError : public std::runtime_error {
  public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/** Raised when a numerical procedure cannot complete (exit code 2). */
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/** Raised when a closed-loop task aborts, e.g. on contact loss (exit code 3). */
class TaskError : public std::runtime_error {
  public:
    explicit TaskError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/** Normalizes an angle in degrees into (-180, 180]. */
inline double wrap_deg(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w <= -180.0) w += 360.0;
    if (w > 180.0) w -= 360.0;
    return w;
}

/** Circular RMS of a set of angular errors (degrees, wrapped before squaring). */
inline double circular_rms_deg(const std::vector<double>& errors_deg) {
    if (errors_deg.empty()) throw InputError("circular_rms_deg: empty input");
    double acc = 0.0;
    for (double e : errors_deg) {
        double w = wrap_deg(e);
        acc += w * w;
    }
    return std::sqrt(acc / static_cast<double>(errors_deg.size()));
}

/** Circular standard deviation (degrees) via the resultant length. */
inline double circular_std_deg(const std::vector<double>& angles_deg) {
    if (angles_deg.empty()) throw InputError("circular_std_deg: empty input");
    double s = 0.0, c = 0.0;
    for (double a : angles_deg) {
        s += std::sin(deg2rad(a));
        c += std::cos(deg2rad(a));
    }
    s /= static_cast<double>(angles_deg.size());
    c /= static_cast<double>(angles_deg.size());
    double r = std::hypot(s, c);
    if (r < 1e-12) r = 1e-12;
    double v = -2.0 * std::log(r);
    return rad2deg(std::sqrt(v > 0.0 ? v : 0.0));
}

/** Circular mean (degrees) of a set of angles. */
inline double circular_mean_deg(const std::vector<double>& angles_deg) {
    if (angles_deg.empty()) throw InputError("circular_mean_deg: empty input");
    double s = 0.0, c = 0.0;
    for (double a : angles_deg) {
        s += std::sin(deg2rad(a));
        c += std::cos(deg2rad(a));
    }
    return rad2deg(std::atan2(s, c));
}

/**
 * Deterministic counter-based random stream (splitmix64 core with a
 * hand-rolled Box-Muller transform). Using our own generator rather than
 * <random> keeps datasets bit-identical across standard libraries.
 */
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /** Uniform double in [0, 1). */
    double next_uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /** Standard normal deviate (Box-Muller, one of the pair kept). */
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_uniform();
        double u2 = next_uniform();
        while (u1 <= 1e-300) u1 = next_uniform();
        double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return mag * std::cos(2.0 * kPi * u2);
    }

    /** Derives an independent stream for a sub-task (e.g. one frame). */
    static std::uint64_t derive(std::uint64_t master, std::uint64_t index) {
        Rng r(master ^ (0xA0761D6478BD642FULL + index * 0xE7037ED1A0B428DBULL));
        return r.next_u64();
    }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace tactile

#endif  // TACTILE_COMMON_HPP
