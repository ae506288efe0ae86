// Synthetic room impulse responses: the image-source method for rectangular
// rooms, and seeded exponentially decaying noise.

#ifndef CNMF_RIR_HPP
#define CNMF_RIR_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cnmf/audio_io.hpp"
#include "cnmf/error.hpp"

namespace cnmf {

using Point3 = std::array<double, 3>;

/// How a requested T60 becomes a wall reflection coefficient.
enum class T60Conversion {
    image_decay,  // match the direction-averaged decay of the image lattice
    sabine,       // r = sqrt(1 - 0.161 V / (T60 A))
};

struct RoomSpec {
    Point3 dimensions{6.0, 4.0, 3.0};
    Point3 source{1.0, 1.0, 1.5};
    Point3 mic{4.0, 2.0, 1.5};
    std::optional<double> t60;               // seconds
    std::optional<double> reflection_coeff;  // uniform over all six walls
    int max_order = -1;                      // per-axis reflection limit, -1 = unlimited
    T60Conversion conversion = T60Conversion::sabine;
    bool high_pass = true;                   // Allen & Berkley 100 Hz DC-removal filter
    int sample_rate = 16000;
    double speed_of_sound = 343.0;

    double volume() const { return dimensions[0] * dimensions[1] * dimensions[2]; }

    double surface_area() const {
        const auto& d = dimensions;
        return 2.0 * (d[0] * d[1] + d[0] * d[2] + d[1] * d[2]);
    }

    void validate() const {
        for (int a = 0; a < 3; ++a) {
            if (!(dimensions[a] > 0.0)) {
                throw InvalidGeometry("room dimensions must be positive");
            }
            if (!(source[a] > 0.0 && source[a] < dimensions[a])) {
                throw InvalidGeometry("source lies outside the room");
            }
            if (!(mic[a] > 0.0 && mic[a] < dimensions[a])) {
                throw InvalidGeometry("microphone lies outside the room");
            }
        }
        if (source == mic) {
            throw InvalidGeometry("source and microphone coincide");
        }
        if (t60.has_value() == reflection_coeff.has_value()) {
            throw InvalidArgument("give exactly one of t60 and reflection_coeff");
        }
        if (t60 && !(*t60 > 0.0)) {
            throw InvalidArgument("t60 must be positive");
        }
        if (reflection_coeff && !(*reflection_coeff >= 0.0 && *reflection_coeff < 1.0)) {
            throw InvalidArgument("reflection coefficient must lie in [0, 1)");
        }
        if (sample_rate <= 0 || !(speed_of_sound > 0.0)) {
            throw InvalidArgument("sample rate and speed of sound must be positive");
        }
    }

    /// Wall reflection coefficient; derived from t60 when no coefficient is given.
    double wall_reflection() const;
};

namespace detail {

constexpr int kSincHalfWidth = 32;

inline double windowed_sinc(double t) {
    if (std::abs(t) >= kSincHalfWidth) return 0.0;
    const double window = 0.5 * (1.0 + std::cos(std::numbers::pi * t / kSincHalfWidth));
    if (t == 0.0) return window;
    return window * std::sin(std::numbers::pi * t) / (std::numbers::pi * t);
}

}  // namespace detail

/// The second-order high-pass filter (100 Hz cut-off) of Allen and Berkley,
/// which removes the DC build-up of the all-positive image sum.
inline void high_pass_in_place(std::vector<double>& h, double fs) {
    const double w = 2.0 * std::numbers::pi * 100.0 / fs;
    const double r1 = std::exp(-w);
    const double b1 = 2.0 * r1 * std::cos(w);
    const double b2 = -r1 * r1;
    const double a1 = -(1.0 + r1);
    double y0 = 0.0, y1 = 0.0, y2 = 0.0;
    for (double& v : h) {
        y2 = y1;
        y1 = y0;
        y0 = b1 * y1 + b2 * y2 + v;
        v = y0 + a1 * y1 + r1 * y2;
    }
}

inline double sabine_reflection(const Point3& dimensions, double t60) {
    const double volume = dimensions[0] * dimensions[1] * dimensions[2];
    const double area = 2.0 * (dimensions[0] * dimensions[1] + dimensions[0] * dimensions[2] +
                               dimensions[1] * dimensions[2]);
    const double absorption = 0.161 * volume / (t60 * area);
    return std::clamp(std::sqrt(std::max(0.0, 1.0 - absorption)), 0.0, 0.999);
}

/// Decay constant of the image lattice of a rectangular room.
///
/// An image seen along unit direction u at distance d = c t has undergone
/// about d * sum_a |u_a| / L_a wall reflections, so with a uniform wall
/// coefficient r the energy envelope is the direction average
///     e(t) = < exp(-kappa g(u) t) >,  g(u) = sum_a |u_a| / L_a,
/// with kappa = -2 c ln r. Its backward integral is <exp(-kappa g t) / g> / kappa,
/// so the -5 dB and -25 dB crossing times scale exactly as 1 / kappa. The
/// returned constant C satisfies T60 = C / kappa, with T60 taken as three
/// times the -5..-25 dB interval.
inline double image_decay_constant(const Point3& dimensions) {
    constexpr int kPolar = 256;
    constexpr int kAzimuth = 256;
    // Equal-area grid over one octant (|u_a| makes the octants identical).
    std::vector<double> rate;
    rate.reserve(kPolar * kAzimuth);
    for (int i = 0; i < kPolar; ++i) {
        const double uz = (i + 0.5) / kPolar;
        const double rho = std::sqrt(1.0 - uz * uz);
        for (int j = 0; j < kAzimuth; ++j) {
            const double phi = 0.5 * std::numbers::pi * (j + 0.5) / kAzimuth;
            const double ux = rho * std::cos(phi);
            const double uy = rho * std::sin(phi);
            rate.push_back(ux / dimensions[0] + uy / dimensions[1] + uz / dimensions[2]);
        }
    }
    auto edc = [&](double t) {
        double acc = 0.0;
        for (double g : rate) acc += std::exp(-g * t) / g;
        return acc;
    };
    const double total = edc(0.0);
    auto crossing = [&](double db) {
        const double target = total * std::pow(10.0, db / 10.0);
        double lo = 0.0, hi = 1.0;
        while (edc(hi) > target) hi *= 2.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (edc(mid) > target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    return 3.0 * (crossing(-25.0) - crossing(-5.0));
}

/// Reflection coefficient for which the image lattice decays with `t60`.
inline double image_decay_reflection(const Point3& dimensions, double t60, double speed_of_sound) {
    const double kappa = image_decay_constant(dimensions) / t60;
    return std::clamp(std::exp(-kappa / (2.0 * speed_of_sound)), 0.0, 0.999);
}

inline double RoomSpec::wall_reflection() const {
    if (reflection_coeff) return *reflection_coeff;
    return conversion == T60Conversion::sabine
               ? sabine_reflection(dimensions, *t60)
               : image_decay_reflection(dimensions, *t60, speed_of_sound);
}

/// Image-source RIR (Allen & Berkley) of `length` samples. Each image
/// contributes r^reflections / (4 pi d) at delay d / c through a Hann
/// windowed sinc of half-width 32 samples.
inline AudioSignal image_method_rir(const RoomSpec& room, std::size_t length) {
    room.validate();
    const double beta = room.wall_reflection();
    const double fs = room.sample_rate;
    const double c = room.speed_of_sound;
    const double max_dist = (static_cast<double>(length) + detail::kSincHalfWidth) * c / fs;

    std::array<int, 3> extent{};
    for (int a = 0; a < 3; ++a) {
        extent[a] = static_cast<int>(std::ceil(max_dist / (2.0 * room.dimensions[a]))) + 1;
        if (room.max_order >= 0) {
            extent[a] = std::min(extent[a], (room.max_order + 1) / 2);
        }
    }

    std::vector<double> h(length, 0.0);
    std::array<int, 3> m{};
    std::array<double, 3> offset{};
    std::array<int, 3> order{};
    for (m[0] = -extent[0]; m[0] <= extent[0]; ++m[0]) {
        for (m[1] = -extent[1]; m[1] <= extent[1]; ++m[1]) {
            for (m[2] = -extent[2]; m[2] <= extent[2]; ++m[2]) {
                for (int parity = 0; parity < 8; ++parity) {
                    bool skip = false;
                    for (int a = 0; a < 3; ++a) {
                        const int q = (parity >> a) & 1;
                        order[a] = std::abs(2 * m[a] - q);
                        if (room.max_order >= 0 && order[a] > room.max_order) skip = true;
                        offset[a] = (1 - 2 * q) * room.source[a] + 2.0 * m[a] * room.dimensions[a] -
                                    room.mic[a];
                    }
                    if (skip) continue;
                    const double dist = std::sqrt(offset[0] * offset[0] + offset[1] * offset[1] +
                                                  offset[2] * offset[2]);
                    if (dist > max_dist) continue;
                    const int reflections = order[0] + order[1] + order[2];
                    const double gain =
                        std::pow(beta, reflections) / (4.0 * std::numbers::pi * dist);
                    if (gain == 0.0) continue;
                    const double delay = dist * fs / c;
                    const auto centre = static_cast<long>(std::floor(delay));
                    for (long i = centre - detail::kSincHalfWidth + 1;
                         i <= centre + detail::kSincHalfWidth; ++i) {
                        if (i < 0 || i >= static_cast<long>(length)) continue;
                        h[static_cast<std::size_t>(i)] +=
                            gain * detail::windowed_sinc(static_cast<double>(i) - delay);
                    }
                }
            }
        }
    }
    if (room.high_pass) {
        high_pass_in_place(h, fs);
    }
    return AudioSignal{std::move(h), room.sample_rate};
}

/// White Gaussian noise under an envelope that falls by 60 dB after t60
/// seconds; the first sample is set to one.
inline AudioSignal exp_decay_rir(double t60, int sample_rate, std::size_t length,
                                 std::uint64_t seed) {
    if (!(t60 > 0.0)) throw InvalidArgument("t60 must be positive");
    if (sample_rate <= 0) throw InvalidArgument("sample rate must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double rate = 3.0 * std::log(10.0) / (t60 * sample_rate);
    std::vector<double> h(length);
    for (std::size_t n = 0; n < length; ++n) {
        h[n] = noise(rng) * std::exp(-rate * static_cast<double>(n));
    }
    if (length > 0) h[0] = 1.0;
    return AudioSignal{std::move(h), sample_rate};
}

}  // namespace cnmf

#endif  // CNMF_RIR_HPP
