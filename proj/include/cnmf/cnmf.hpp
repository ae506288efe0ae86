// Umbrella header.

#ifndef CNMF_CNMF_HPP
#define CNMF_CNMF_HPP

#include "cnmf/audio_io.hpp"
#include "cnmf/error.hpp"
#include "cnmf/metrics.hpp"
#include "cnmf/model.hpp"
#include "cnmf/pipeline.hpp"
#include "cnmf/reconstruct.hpp"
#include "cnmf/rir.hpp"
#include "cnmf/solver.hpp"
#include "cnmf/stft.hpp"

#endif  // CNMF_CNMF_HPP
