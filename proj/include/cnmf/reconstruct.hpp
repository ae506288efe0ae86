// Time-domain resynthesis of an estimated clean power spectrogram using
// the phase of the observed (reverberant) STFT.

#ifndef CNMF_RECONSTRUCT_HPP
#define CNMF_RECONSTRUCT_HPP

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <string_view>

#include "cnmf/error.hpp"
#include "cnmf/stft.hpp"

namespace cnmf {

enum class ReconstructMethod { magnitude_replace, gain_mask };

inline std::optional<ReconstructMethod> parse_reconstruct_method(std::string_view name) {
    if (name == "magnitude_replace") return ReconstructMethod::magnitude_replace;
    if (name == "gain_mask") return ReconstructMethod::gain_mask;
    return std::nullopt;
}

inline std::string_view to_string(ReconstructMethod m) {
    return m == ReconstructMethod::magnitude_replace ? "magnitude_replace" : "gain_mask";
}

/// STFT whose magnitudes follow `S` and whose phases follow `reverberant`.
inline ComplexSpectrogram clean_stft(const Matrix& S, const ComplexSpectrogram& reverberant,
                                     ReconstructMethod method) {
    if (S.rows() != reverberant.bins() || S.cols() != reverberant.frames()) {
        throw DimensionMismatch("estimate is " + std::to_string(S.rows()) + "x" +
                                std::to_string(S.cols()) + ", reverberant STFT is " +
                                std::to_string(reverberant.bins()) + "x" +
                                std::to_string(reverberant.frames()));
    }
    ComplexSpectrogram out = reverberant;
    if (method == ReconstructMethod::magnitude_replace) {
        for (Index n = 0; n < S.cols(); ++n) {
            for (Index k = 0; k < S.rows(); ++k) {
                const std::complex<double> z = reverberant.data(k, n);
                const double mag = std::sqrt(std::max(S(k, n), 0.0));
                const double phase = std::arg(z);  // arg(0) == 0
                out.data(k, n) = std::polar(mag, phase);
            }
        }
    } else {
        const Matrix Y = reverberant.data.cwiseAbs2();
        const double eps = 1e-12 * (Y.size() > 0 ? Y.maxCoeff() : 0.0);
        for (Index n = 0; n < S.cols(); ++n) {
            for (Index k = 0; k < S.rows(); ++k) {
                const double denom = Y(k, n) + eps;
                const double gain = denom > 0.0 ? std::sqrt(std::max(S(k, n), 0.0) / denom) : 0.0;
                out.data(k, n) = reverberant.data(k, n) * gain;
            }
        }
    }
    return out;
}

inline AudioSignal reconstruct(const Matrix& S, const ComplexSpectrogram& reverberant,
                               ReconstructMethod method = ReconstructMethod::magnitude_replace) {
    return synthesize(clean_stft(S, reverberant, method));
}

inline AudioSignal reconstruct(const PowerSpectrogram& S, const ComplexSpectrogram& reverberant,
                               ReconstructMethod method = ReconstructMethod::magnitude_replace) {
    if (!(S.config == reverberant.config)) {
        throw DimensionMismatch("estimate and reverberant STFT use different frame settings");
    }
    return reconstruct(S.data, reverberant, method);
}

}  // namespace cnmf

#endif  // CNMF_RECONSTRUCT_HPP
