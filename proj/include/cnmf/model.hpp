// Convolutive NMF reverberation model on power spectrograms.
//
// Row k of every matrix is one frequency band. The observation Y and the
// clean estimate S are K x N, the reverberation kernel H is K x N_h, and
// the model is the per-band causal convolution
//
//     X_k[n] = sum_{tau=0}^{N_h-1} S_k[n - tau] H_k[tau],   S_k[m] = 0 for m < 0.
//
// The cost adds an l_p sparsity penalty on S and a squared first-difference
// penalty on H to the squared fitting error, with band-dependent weights.

#ifndef CNMF_MODEL_HPP
#define CNMF_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "cnmf/error.hpp"
#include "cnmf/stft.hpp"

namespace cnmf {

struct SolverConfig {
    double lambda_h = 1.0;
    double lambda_s = 1e-4;
    double p = 1.0;
    int n_h = 15;
    int max_iter = 20;
    double delta_factor = 1e-3;  // stop once ||S - S'||_F <= delta_factor * ||Y||_F
    bool rescale = true;
    double eps_floor = 1e-12;    // relative to max(Y)

    void validate() const {
        if (!(p > 0.0 && p < 2.0)) throw InvalidArgument("p must lie in (0, 2)");
        if (!(lambda_h >= 0.0)) throw InvalidArgument("lambda_h must be nonnegative");
        if (!(lambda_s >= 0.0)) throw InvalidArgument("lambda_s must be nonnegative");
        if (n_h < 2) throw InvalidArgument("kernel length n_h must be at least 2");
        if (max_iter < 1) throw InvalidArgument("max_iter must be positive");
        if (!(delta_factor > 0.0)) throw InvalidArgument("delta_factor must be positive");
        if (!(eps_floor > 0.0)) throw InvalidArgument("eps_floor must be positive");
    }

    friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// Absolute floor used for previous-iterate entries that are divided by.
inline double numerical_floor(const Matrix& Y, const SolverConfig& cfg) {
    const double peak = Y.size() > 0 ? Y.maxCoeff() : 0.0;
    return std::max(cfg.eps_floor * peak, std::numeric_limits<double>::min());
}

inline void require_same_bands(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows()) {
        throw DimensionMismatch(std::string(what) + ": band counts differ (" +
                                std::to_string(a.rows()) + " vs " + std::to_string(b.rows()) + ")");
    }
}

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch(std::string(what) + ": shapes differ (" +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
    }
}

/// One band of the forward model, written into `x`.
template <typename SRow, typename HRow, typename XRow>
void convolve_band(const SRow& s, const HRow& h, XRow&& x) {
    const Index frames = s.size();
    const Index taps = h.size();
    for (Index n = 0; n < frames; ++n) {
        double acc = 0.0;
        const Index last = std::min(n, taps - 1);
        for (Index tau = 0; tau <= last; ++tau) {
            acc += s(n - tau) * h(tau);
        }
        x(n) = acc;
    }
}

inline Matrix forward_model(const Matrix& S, const Matrix& H) {
    require_same_bands(S, H, "forward_model");
    Matrix X(S.rows(), S.cols());
    for (Index k = 0; k < S.rows(); ++k) {
        convolve_band(S.row(k), H.row(k), X.row(k));
    }
    return X;
}

/// First differences (L h)[i] = h[i+1] - h[i]; length n_h - 1.
template <typename Row>
Vector first_difference(const Row& h) {
    const Index n = h.size();
    Vector v(std::max<Index>(n - 1, 0));
    for (Index i = 0; i + 1 < n; ++i) {
        v(i) = h(i + 1) - h(i);
    }
    return v;
}

template <typename Row>
double smoothness_penalty(const Row& h) {
    double acc = 0.0;
    for (Index i = 0; i + 1 < h.size(); ++i) {
        const double d = h(i + 1) - h(i);
        acc += d * d;
    }
    return acc;
}

/// ||s||_p^p on entries floored at zero.
template <typename Row>
double sparsity_penalty(const Row& s, double p) {
    double acc = 0.0;
    for (Index i = 0; i < s.size(); ++i) {
        const double v = std::max(s(i), 0.0);
        acc += p == 1.0 ? v : std::pow(v, p);
    }
    return acc;
}

struct BandWeights {
    Vector lambda_h;  // lambda_h * energy of each row of Y
    Vector lambda_s;
};

inline BandWeights per_band_lambdas(const Matrix& Y, const SolverConfig& cfg) {
    BandWeights w;
    // Plain loops keep each band's sum order independent of its row index.
    w.lambda_h.resize(Y.rows());
    for (Index k = 0; k < Y.rows(); ++k) {
        double energy = 0.0;
        for (Index n = 0; n < Y.cols(); ++n) energy += Y(k, n) * Y(k, n);
        w.lambda_h(k) = cfg.lambda_h * energy;
    }
    w.lambda_s = Vector::Constant(Y.rows(), cfg.lambda_s);
    return w;
}

struct CostTerms {
    double fidelity = 0.0;
    double sparsity = 0.0;    // sum_k lambda_{s,k} ||S_k||_p^p
    double smoothness = 0.0;  // sum_k lambda_{h,k} ||L H_k||^2

    double total() const noexcept { return fidelity + sparsity + smoothness; }
};

inline CostTerms cost_terms(const Matrix& S, const Matrix& H, const Matrix& Y,
                            const BandWeights& w, double p) {
    require_same_shape(S, Y, "cost");
    require_same_bands(S, H, "cost");
    const Matrix X = forward_model(S, H);
    CostTerms c;
    for (Index k = 0; k < S.rows(); ++k) {
        c.fidelity += (Y.row(k) - X.row(k)).squaredNorm();
        c.sparsity += w.lambda_s(k) * sparsity_penalty(S.row(k), p);
        c.smoothness += w.lambda_h(k) * smoothness_penalty(H.row(k));
    }
    return c;
}

inline CostTerms cost_terms(const Matrix& S, const Matrix& H, const Matrix& Y,
                            const SolverConfig& cfg) {
    return cost_terms(S, H, Y, per_band_lambdas(Y, cfg), cfg.p);
}

inline double cost(const Matrix& S, const Matrix& H, const Matrix& Y, const SolverConfig& cfg) {
    return cost_terms(S, H, Y, cfg).total();
}

/// Majorizer of the cost in S around S_prev with H fixed. Entries of
/// S_prev are floored before use; terms whose weight S'_k[tau] H_k[n-tau]
/// vanishes contribute nothing.
inline double aux_gs(const Matrix& S, const Matrix& S_prev, const Matrix& H, const Matrix& Y,
                     const SolverConfig& cfg) {
    require_same_shape(S, Y, "aux_gs");
    require_same_shape(S_prev, Y, "aux_gs");
    require_same_bands(H, Y, "aux_gs");
    const double floor = numerical_floor(Y, cfg);
    const Matrix Sp = S_prev.cwiseMax(floor);
    const Matrix Xp = forward_model(Sp, H);
    const BandWeights w = per_band_lambdas(Y, cfg);
    const double p = cfg.p;
    const Index frames = Y.cols();
    const Index taps = H.cols();

    double fit = 0.0, reg = 0.0;
    for (Index k = 0; k < Y.rows(); ++k) {
        double band_fit = 0.0;
        for (Index n = 0; n < frames; ++n) {
            const Index first = std::max<Index>(0, n - taps + 1);
            for (Index tau = first; tau <= n; ++tau) {
                const double weight = Sp(k, tau) * H(k, n - tau);
                if (weight == 0.0) continue;
                const double r = Y(k, n) - S(k, tau) / Sp(k, tau) * Xp(k, n);
                band_fit += weight / Xp(k, n) * r * r;
            }
        }
        double band_sparse = 0.0;
        for (Index n = 0; n < frames; ++n) {
            const double sp = Sp(k, n);
            const double sp_p = std::pow(sp, p);
            band_sparse += 0.5 * p * std::pow(sp, p - 2.0) * S(k, n) * S(k, n) + sp_p - 0.5 * p * sp_p;
        }
        fit += band_fit;
        reg += w.lambda_s(k) * band_sparse + w.lambda_h(k) * smoothness_penalty(H.row(k));
    }
    return fit + reg;
}

/// Majorizer of the cost in H around H_prev with S fixed.
inline double aux_gh(const Matrix& H, const Matrix& H_prev, const Matrix& S, const Matrix& Y,
                     const SolverConfig& cfg) {
    require_same_shape(S, Y, "aux_gh");
    require_same_bands(H, Y, "aux_gh");
    require_same_shape(H_prev, H, "aux_gh");
    const double floor = numerical_floor(Y, cfg);
    const Matrix Hp = H_prev.cwiseMax(floor);
    const Matrix Xp = forward_model(S, Hp);
    const BandWeights w = per_band_lambdas(Y, cfg);
    const Index frames = Y.cols();
    const Index taps = H.cols();

    double fit = 0.0, reg = 0.0;
    for (Index k = 0; k < Y.rows(); ++k) {
        for (Index n = 0; n < frames; ++n) {
            const Index last = std::min(n, taps - 1);
            for (Index tau = 0; tau <= last; ++tau) {
                const double weight = S(k, n - tau) * Hp(k, tau);
                if (weight == 0.0) continue;
                const double r = Y(k, n) - H(k, tau) / Hp(k, tau) * Xp(k, n);
                fit += weight / Xp(k, n) * r * r;
            }
        }
        reg += w.lambda_s(k) * sparsity_penalty(S.row(k), cfg.p) +
               w.lambda_h(k) * smoothness_penalty(H.row(k));
    }
    return fit + reg;
}

}  // namespace cnmf

#endif  // CNMF_MODEL_HPP
