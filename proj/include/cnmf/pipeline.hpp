// End-to-end dereverberation of a time-domain signal.

#ifndef CNMF_PIPELINE_HPP
#define CNMF_PIPELINE_HPP

#include "cnmf/audio_io.hpp"
#include "cnmf/model.hpp"
#include "cnmf/reconstruct.hpp"
#include "cnmf/solver.hpp"
#include "cnmf/stft.hpp"

namespace cnmf {

/// Factor applied to the observed power before it reaches the solver: the
/// squared sum of the unnormalized Hann window. The solver then works on the
/// power of a conventional (unnormalized-window) STFT, the scale at which
/// the default sparsity weight is meaningful; the fidelity and smoothness
/// terms are invariant to this choice, the l_p term is not.
inline double solver_power_scale(const StftConfig& cfg) {
    const double gain = 0.5 * cfg.window_len;
    return gain * gain;
}

struct DereverbResult {
    AudioSignal output;
    ComplexSpectrogram observed;
    PowerSpectrogram clean_power;  // estimated S, in STFT units
    SolverState state;             // in solver units (see solver_power_scale)
    double power_scale = 1.0;
};

inline DereverbResult dereverberate(const AudioSignal& input, const StftConfig& stft_cfg = {},
                                    const SolverConfig& solver_cfg = {},
                                    ReconstructMethod method = ReconstructMethod::magnitude_replace) {
    input.validate();
    DereverbResult r;
    r.observed = analyze(input, stft_cfg);
    const PowerSpectrogram Y = power(r.observed);
    r.power_scale = solver_power_scale(stft_cfg);
    r.state = run(Y.data * r.power_scale, solver_cfg);
    r.clean_power = Y;
    r.clean_power.data = r.state.S / r.power_scale;
    r.output = reconstruct(r.clean_power, r.observed, method);
    return r;
}

}  // namespace cnmf

#endif  // CNMF_PIPELINE_HPP
