// Intrusive speech quality measures: frequency-weighted segmental SNR and
// LPC cepstral distance. Both use 25 ms Hann frames with a 10 ms hop and
// ignore frames more than 40 dB below the loudest reference frame.

#ifndef CNMF_METRICS_HPP
#define CNMF_METRICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "cnmf/audio_io.hpp"
#include "cnmf/error.hpp"

namespace cnmf {

struct MetricsReport {
    double fwssnr_db = 0.0;
    double cepstral_distance = 0.0;
    std::size_t frames_used = 0;
};

namespace metrics {

constexpr double kFrameSeconds = 0.025;
constexpr double kHopSeconds = 0.010;
constexpr double kGateDb = 40.0;
constexpr int kBands = 25;
constexpr double kWeightExponent = 0.2;
constexpr double kSnrMin = -10.0;
constexpr double kSnrMax = 35.0;
constexpr int kLpcOrder = 10;
constexpr double kCepstralMax = 10.0;

struct Framing {
    int window_len = 0;
    int hop = 0;
    std::size_t frames = 0;
    std::vector<double> window;
};

inline Framing make_framing(const AudioSignal& clean, const AudioSignal& test) {
    if (clean.sample_rate != test.sample_rate) {
        throw SampleRateMismatch("reference at " + std::to_string(clean.sample_rate) +
                                 " Hz, test at " + std::to_string(test.sample_rate) + " Hz");
    }
    Framing f;
    f.window_len = static_cast<int>(std::lround(kFrameSeconds * clean.sample_rate));
    f.hop = static_cast<int>(std::lround(kHopSeconds * clean.sample_rate));
    const std::size_t len = clean.size();
    f.frames = len >= static_cast<std::size_t>(f.window_len)
                   ? (len - f.window_len) / f.hop + 1
                   : 0;
    if (f.frames < 3) {
        throw SignalTooShort("need at least 3 analysis frames");
    }
    f.window.resize(static_cast<std::size_t>(f.window_len));
    for (int m = 0; m < f.window_len; ++m) {
        f.window[m] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * m / f.window_len);
    }
    return f;
}

/// `test` truncated or zero-padded to the reference length.
inline std::vector<double> aligned(const AudioSignal& test, std::size_t len) {
    std::vector<double> out(test.samples.begin(),
                            test.samples.begin() + static_cast<long>(std::min(len, test.size())));
    out.resize(len, 0.0);
    return out;
}

inline void windowed_frame(const std::vector<double>& x, const Framing& f, std::size_t frame,
                           std::vector<double>& out) {
    out.resize(f.window.size());
    const std::size_t start = frame * static_cast<std::size_t>(f.hop);
    for (std::size_t m = 0; m < f.window.size(); ++m) {
        out[m] = x[start + m] * f.window[m];
    }
}

/// Per-frame flags: frame energy within kGateDb of the loudest frame.
inline std::vector<bool> energy_gate(const std::vector<double>& x, const Framing& f) {
    std::vector<double> energy(f.frames, 0.0);
    std::vector<double> buf;
    for (std::size_t i = 0; i < f.frames; ++i) {
        windowed_frame(x, f, i, buf);
        for (double v : buf) energy[i] += v * v;
    }
    const double peak = *std::max_element(energy.begin(), energy.end());
    std::vector<bool> keep(f.frames, false);
    if (peak <= 0.0) return keep;
    const double threshold = peak * std::pow(10.0, -kGateDb / 10.0);
    for (std::size_t i = 0; i < f.frames; ++i) {
        keep[i] = energy[i] > 0.0 && energy[i] >= threshold;
    }
    return keep;
}

inline double hz_to_bark(double f) { return 26.81 * f / (1960.0 + f) - 0.53; }
inline double bark_to_hz(double z) { return 1960.0 * (z + 0.53) / (26.28 - z); }

/// Gaussian-shaped critical-band weights over FFT bins 0..fft_len/2, with
/// band edges equally spaced on the Bark scale from 80 Hz to 8 kHz.
inline std::vector<std::vector<double>> critical_band_filters(int sample_rate, int fft_len) {
    const double top = std::min(8000.0, sample_rate / 2.0);
    const double z_lo = hz_to_bark(80.0);
    const double z_hi = hz_to_bark(top);
    const int bins = fft_len / 2 + 1;
    const double bin_hz = static_cast<double>(sample_rate) / fft_len;
    const double min_gain = std::exp(-30.0 / (2.0 * 2.303));

    std::vector<std::vector<double>> filters(kBands, std::vector<double>(bins, 0.0));
    for (int j = 0; j < kBands; ++j) {
        const double lo = bark_to_hz(z_lo + (z_hi - z_lo) * j / kBands);
        const double hi = bark_to_hz(z_lo + (z_hi - z_lo) * (j + 1) / kBands);
        const double centre = bark_to_hz(z_lo + (z_hi - z_lo) * (j + 0.5) / kBands) / bin_hz;
        const double width = (hi - lo) / bin_hz;
        for (int b = 0; b < bins; ++b) {
            const double d = (b - centre) / width;
            const double g = std::exp(-11.0 * d * d);
            filters[j][b] = g > min_gain ? g : 0.0;
        }
    }
    return filters;
}

struct LpcResult {
    std::array<double, kLpcOrder + 1> predictor{};  // x[n] ~ sum_k predictor[k] x[n-k]
    bool ok = false;
};

/// Autocorrelation method with Levinson-Durbin recursion.
inline LpcResult lpc(const std::vector<double>& frame) {
    std::array<double, kLpcOrder + 1> r{};
    for (int lag = 0; lag <= kLpcOrder; ++lag) {
        double acc = 0.0;
        for (std::size_t i = static_cast<std::size_t>(lag); i < frame.size(); ++i) {
            acc += frame[i] * frame[i - lag];
        }
        r[lag] = acc;
    }
    LpcResult out;
    if (!(r[0] > 0.0)) return out;
    std::array<double, kLpcOrder + 1> a{}, prev{};
    double err = r[0];
    for (int i = 1; i <= kLpcOrder; ++i) {
        double acc = r[i];
        for (int j = 1; j < i; ++j) acc -= a[j] * r[i - j];
        const double k = acc / err;
        prev = a;
        a[i] = k;
        for (int j = 1; j < i; ++j) a[j] = prev[j] - k * prev[i - j];
        err *= (1.0 - k * k);
        if (!(err > 0.0) || !std::isfinite(err)) return out;
    }
    out.predictor = a;
    out.ok = true;
    return out;
}

/// Cepstrum c_1..c_p of the all-pole model 1 / (1 - sum_k a_k z^-k).
inline std::array<double, kLpcOrder + 1> lpc_cepstrum(const std::array<double, kLpcOrder + 1>& a) {
    std::array<double, kLpcOrder + 1> c{};
    for (int n = 1; n <= kLpcOrder; ++n) {
        double acc = a[n];
        for (int k = 1; k < n; ++k) {
            acc += (static_cast<double>(k) / n) * c[k] * a[n - k];
        }
        c[n] = acc;
    }
    return c;
}

}  // namespace metrics

struct FwsSnrResult {
    double value_db = 0.0;
    std::size_t frames_used = 0;
};

inline FwsSnrResult fwssnr_detail(const AudioSignal& clean, const AudioSignal& test) {
    using namespace metrics;
    const Framing f = make_framing(clean, test);
    const std::vector<double> y = aligned(test, clean.size());
    const std::vector<bool> keep = energy_gate(clean.samples, f);

    int fft_len = 1;
    while (fft_len < 2 * f.window_len) fft_len <<= 1;
    const auto filters = critical_band_filters(clean.sample_rate, fft_len);
    const int bins = fft_len / 2 + 1;

    Eigen::FFT<double> fft;
    std::vector<double> frame_c, frame_t;
    std::vector<std::complex<double>> spec_c, spec_t;
    std::vector<double> mag_c(bins), mag_t(bins);

    FwsSnrResult out;
    double total = 0.0;
    for (std::size_t i = 0; i < f.frames; ++i) {
        if (!keep[i]) continue;
        windowed_frame(clean.samples, f, i, frame_c);
        windowed_frame(y, f, i, frame_t);
        frame_c.resize(fft_len, 0.0);
        frame_t.resize(fft_len, 0.0);
        fft.fwd(spec_c, frame_c);
        fft.fwd(spec_t, frame_t);
        for (int b = 0; b < bins; ++b) {
            mag_c[b] = std::abs(spec_c[b]);
            mag_t[b] = std::abs(spec_t[b]);
        }
        double num = 0.0, den = 0.0;
        for (int j = 0; j < kBands; ++j) {
            double ec = 0.0, et = 0.0;
            for (int b = 0; b < bins; ++b) {
                ec += filters[j][b] * mag_c[b];
                et += filters[j][b] * mag_t[b];
            }
            const double diff = ec - et;
            double snr = kSnrMax;
            if (diff != 0.0) {
                snr = ec > 0.0 ? 10.0 * std::log10(ec * ec / (diff * diff)) : kSnrMin;
            }
            snr = std::clamp(snr, kSnrMin, kSnrMax);
            const double weight = std::pow(ec, kWeightExponent);
            num += weight * snr;
            den += weight;
        }
        if (den <= 0.0) continue;
        total += num / den;
        ++out.frames_used;
    }
    if (out.frames_used == 0) {
        throw InvalidArgument("reference signal has no frames above the energy gate");
    }
    out.value_db = total / static_cast<double>(out.frames_used);
    return out;
}

/// Frequency-weighted segmental SNR in dB; `clean` is the reference.
inline double fwssnr(const AudioSignal& clean, const AudioSignal& test) {
    return fwssnr_detail(clean, test).value_db;
}

struct CepstralResult {
    double value = 0.0;
    std::size_t frames_used = 0;
    std::size_t frames_skipped = 0;  // LPC recursion failed in either signal
};

/// Frames pass only if both signals clear their own energy gate, which
/// keeps the measure symmetric in its arguments.
inline CepstralResult cepstral_distance_detail(const AudioSignal& clean, const AudioSignal& test) {
    using namespace metrics;
    const Framing f = make_framing(clean, test);
    const std::vector<double> y = aligned(test, clean.size());
    const std::vector<bool> keep_c = energy_gate(clean.samples, f);
    const std::vector<bool> keep_t = energy_gate(y, f);

    const double scale = 10.0 / std::log(10.0);
    CepstralResult out;
    double total = 0.0;
    std::vector<double> frame_c, frame_t;
    for (std::size_t i = 0; i < f.frames; ++i) {
        if (!keep_c[i] || !keep_t[i]) continue;
        windowed_frame(clean.samples, f, i, frame_c);
        windowed_frame(y, f, i, frame_t);
        const LpcResult lc = lpc(frame_c);
        const LpcResult lt = lpc(frame_t);
        if (!lc.ok || !lt.ok) {
            ++out.frames_skipped;
            continue;
        }
        const auto cc = lpc_cepstrum(lc.predictor);
        const auto ct = lpc_cepstrum(lt.predictor);
        double sq = 0.0;
        for (int n = 1; n <= kLpcOrder; ++n) {
            const double d = cc[n] - ct[n];
            sq += d * d;
        }
        total += std::clamp(scale * std::sqrt(2.0 * sq), 0.0, kCepstralMax);
        ++out.frames_used;
    }
    if (out.frames_used > 0) {
        out.value = total / static_cast<double>(out.frames_used);
    }
    return out;
}

inline double cepstral_distance(const AudioSignal& clean, const AudioSignal& test) {
    return cepstral_distance_detail(clean, test).value;
}

inline MetricsReport evaluate(const AudioSignal& clean, const AudioSignal& test) {
    const FwsSnrResult snr = fwssnr_detail(clean, test);
    MetricsReport r;
    r.fwssnr_db = snr.value_db;
    r.cepstral_distance = cepstral_distance(clean, test);
    r.frames_used = snr.frames_used;
    return r;
}

inline void write_report(std::ostream& os, const MetricsReport& r) {
    os << "fwssnr_db=" << r.fwssnr_db << '\n'
       << "cepstral_distance=" << r.cepstral_distance << '\n'
       << "frames_used=" << r.frames_used << '\n';
}

inline void write_report_csv_header(std::ostream& os) {
    os << "file,fwssnr_db,cepstral_distance,frames_used\n";
}

inline void write_report_csv_row(std::ostream& os, const std::string& file,
                                 const MetricsReport& r) {
    os << file << ',' << r.fwssnr_db << ',' << r.cepstral_distance << ',' << r.frames_used << '\n';
}

}  // namespace cnmf

#endif  // CNMF_METRICS_HPP
