// Short-time Fourier analysis with a unit-l1 Hann window and weighted
// overlap-add resynthesis.

#ifndef CNMF_STFT_HPP
#define CNMF_STFT_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "cnmf/audio_io.hpp"
#include "cnmf/error.hpp"

namespace cnmf {

using Matrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct StftConfig {
    int window_len = 512;
    int hop = 256;

    int num_bins() const noexcept { return window_len / 2 + 1; }

    void validate() const {
        if (window_len <= 0 || window_len % 2 != 0) {
            throw InvalidArgument("window length must be a positive even integer");
        }
        if (hop <= 0 || hop > window_len) {
            throw InvalidArgument("hop must satisfy 0 < hop <= window length");
        }
    }

    friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

/// Periodic Hann window scaled so that its samples sum to one.
inline std::vector<double> analysis_window(int window_len) {
    std::vector<double> w(static_cast<std::size_t>(window_len));
    double sum = 0.0;
    for (int m = 0; m < window_len; ++m) {
        w[m] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * m / window_len);
        sum += w[m];
    }
    for (double& v : w) v /= sum;
    return w;
}

/// Number of frames needed so that the window supports cover `signal_len`
/// samples when frames start at 0, hop, 2*hop, ...
inline Index frame_count(std::size_t signal_len, const StftConfig& cfg) {
    const auto len = static_cast<Index>(signal_len);
    if (len < cfg.window_len) {
        return 0;
    }
    const Index span = len - cfg.window_len;
    return span / cfg.hop + 1 + (span % cfg.hop != 0 ? 1 : 0);
}

struct ComplexSpectrogram {
    ComplexMatrix data;  // bins x frames
    StftConfig config;
    int sample_rate = 16000;
    std::size_t signal_length = 0;

    Index bins() const noexcept { return data.rows(); }
    Index frames() const noexcept { return data.cols(); }
};

struct PowerSpectrogram {
    Matrix data;  // bins x frames, nonnegative
    StftConfig config;
    int sample_rate = 16000;
    std::size_t signal_length = 0;

    Index bins() const noexcept { return data.rows(); }
    Index frames() const noexcept { return data.cols(); }
};

inline ComplexSpectrogram analyze(const AudioSignal& signal, const StftConfig& cfg = {}) {
    cfg.validate();
    if (signal.size() < static_cast<std::size_t>(cfg.window_len)) {
        throw SignalTooShort("signal has " + std::to_string(signal.size()) +
                             " samples, window needs " + std::to_string(cfg.window_len));
    }
    const std::vector<double> w = analysis_window(cfg.window_len);
    const Index frames = frame_count(signal.size(), cfg);
    const Index bins = cfg.num_bins();

    ComplexSpectrogram out;
    out.config = cfg;
    out.sample_rate = signal.sample_rate;
    out.signal_length = signal.size();
    out.data.resize(bins, frames);

    Eigen::FFT<double> fft;
    std::vector<double> frame(static_cast<std::size_t>(cfg.window_len));
    std::vector<std::complex<double>> spectrum;
    for (Index n = 0; n < frames; ++n) {
        const std::size_t start = static_cast<std::size_t>(n) * cfg.hop;
        for (int m = 0; m < cfg.window_len; ++m) {
            const std::size_t idx = start + m;
            frame[m] = idx < signal.size() ? signal.samples[idx] * w[m] : 0.0;
        }
        fft.fwd(spectrum, frame);
        for (Index k = 0; k < bins; ++k) {
            out.data(k, n) = spectrum[static_cast<std::size_t>(k)];
        }
    }
    return out;
}

/// Weighted overlap-add inverse of analyze(); the output is trimmed to the
/// analyzed signal length.
inline AudioSignal synthesize(const ComplexSpectrogram& spec) {
    const StftConfig& cfg = spec.config;
    cfg.validate();
    if (spec.bins() != cfg.num_bins()) {
        throw DimensionMismatch("spectrogram has " + std::to_string(spec.bins()) +
                                " bins, config expects " + std::to_string(cfg.num_bins()));
    }
    const std::vector<double> w = analysis_window(cfg.window_len);
    const Index frames = spec.frames();
    const std::size_t full_len =
        frames > 0 ? static_cast<std::size_t>((frames - 1) * cfg.hop + cfg.window_len) : 0;

    std::vector<double> out(full_len, 0.0), envelope(full_len, 0.0);
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum(static_cast<std::size_t>(cfg.window_len));
    std::vector<double> frame;
    for (Index n = 0; n < frames; ++n) {
        for (Index k = 0; k < spec.bins(); ++k) {
            spectrum[static_cast<std::size_t>(k)] = spec.data(k, n);
        }
        // Hermitian completion; DC and Nyquist are taken as real.
        spectrum[0] = spectrum[0].real();
        spectrum[cfg.window_len / 2] = spectrum[cfg.window_len / 2].real();
        for (int k = cfg.window_len / 2 + 1; k < cfg.window_len; ++k) {
            spectrum[k] = std::conj(spectrum[cfg.window_len - k]);
        }
        fft.inv(frame, spectrum);
        const std::size_t start = static_cast<std::size_t>(n) * cfg.hop;
        for (int m = 0; m < cfg.window_len; ++m) {
            out[start + m] += frame[m] * w[m];
            envelope[start + m] += w[m] * w[m];
        }
    }
    constexpr double kEnvelopeFloor = 1e-8;
    for (std::size_t i = 0; i < full_len; ++i) {
        out[i] /= std::max(envelope[i], kEnvelopeFloor);
    }
    out.resize(spec.signal_length, 0.0);
    return AudioSignal{std::move(out), spec.sample_rate};
}

inline PowerSpectrogram power(const ComplexSpectrogram& spec) {
    PowerSpectrogram out;
    out.config = spec.config;
    out.sample_rate = spec.sample_rate;
    out.signal_length = spec.signal_length;
    out.data = spec.data.cwiseAbs2();
    return out;
}

/// Text dump: header `# K N sample_rate window_len hop`, then one
/// tab-separated row per frequency bin.
inline void write_spectrogram_text(std::ostream& os, const PowerSpectrogram& spec) {
    os << "# " << spec.bins() << ' ' << spec.frames() << ' ' << spec.sample_rate << ' '
       << spec.config.window_len << ' ' << spec.config.hop << '\n';
    const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
    for (Index k = 0; k < spec.bins(); ++k) {
        for (Index n = 0; n < spec.frames(); ++n) {
            if (n > 0) os << '\t';
            os << spec.data(k, n);
        }
        os << '\n';
    }
    os.precision(old_precision);
}

inline PowerSpectrogram read_spectrogram_text(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0) {
        throw MalformedFile("spectrogram dump is missing its header line");
    }
    std::istringstream header(line.substr(2));
    Index bins = 0, frames = 0;
    PowerSpectrogram out;
    if (!(header >> bins >> frames >> out.sample_rate >> out.config.window_len >> out.config.hop)) {
        throw MalformedFile("bad spectrogram header: '" + line + "'");
    }
    out.data.resize(bins, frames);
    for (Index k = 0; k < bins; ++k) {
        if (!std::getline(is, line)) {
            throw MalformedFile("spectrogram dump truncated at row " + std::to_string(k));
        }
        std::istringstream row(line);
        for (Index n = 0; n < frames; ++n) {
            if (!(row >> out.data(k, n))) {
                throw MalformedFile("spectrogram row " + std::to_string(k) + " too short");
            }
        }
    }
    return out;
}

}  // namespace cnmf

#endif  // CNMF_STFT_HPP
