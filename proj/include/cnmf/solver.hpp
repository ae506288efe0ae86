// Alternating majorization-minimization solver for the mixed-penalty
// convolutive NMF cost.
//
// Each iteration performs a multiplicative update of S (the exact
// minimizer of the S-majorizer), an optional per-band l_inf rescaling of S
// to the peak of Y, and a per-band tridiagonal solve for H (the exact
// minimizer of the H-majorizer). Bands never interact, so every band can be
// updated in any order with identical results.

#ifndef CNMF_SOLVER_HPP
#define CNMF_SOLVER_HPP

#include <cmath>
#include <ostream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "cnmf/error.hpp"
#include "cnmf/model.hpp"

namespace cnmf {

// ---------------------------------------------------------------------------
// Tridiagonal systems

/// Row i reads lower[i-1] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i].
struct TridiagonalSystem {
    Vector lower;  // size n-1
    Vector diag;   // size n
    Vector upper;  // size n-1
    Vector rhs;    // size n

    Index size() const noexcept { return diag.size(); }

    Matrix dense() const {
        const Index n = size();
        Matrix m = Matrix::Zero(n, n);
        for (Index i = 0; i < n; ++i) {
            m(i, i) = diag(i);
            if (i > 0) m(i, i - 1) = lower(i - 1);
            if (i + 1 < n) m(i, i + 1) = upper(i);
        }
        return m;
    }

    /// Strict row diagonal dominance, the condition under which elimination
    /// without pivoting is safe.
    bool diagonally_dominant() const {
        const Index n = size();
        for (Index i = 0; i < n; ++i) {
            double off = 0.0;
            if (i > 0) off += std::abs(lower(i - 1));
            if (i + 1 < n) off += std::abs(upper(i));
            if (!(std::abs(diag(i)) > off)) return false;
        }
        return true;
    }
};

struct TridiagonalSolution {
    Vector x;
    bool least_squares = false;  // true when the fallback was used
};

/// Thomas elimination on a diagonally dominant system, otherwise the
/// minimum-norm least-squares solution.
inline TridiagonalSolution solve_tridiagonal(const TridiagonalSystem& sys) {
    const Index n = sys.size();
    TridiagonalSolution out;
    if (n == 0) return out;

    if (sys.diagonally_dominant()) {
        Vector c(n), d(n);
        double pivot = sys.diag(0);
        c(0) = n > 1 ? sys.upper(0) / pivot : 0.0;
        d(0) = sys.rhs(0) / pivot;
        for (Index i = 1; i < n; ++i) {
            pivot = sys.diag(i) - sys.lower(i - 1) * c(i - 1);
            c(i) = i + 1 < n ? sys.upper(i) / pivot : 0.0;
            d(i) = (sys.rhs(i) - sys.lower(i - 1) * d(i - 1)) / pivot;
        }
        out.x.resize(n);
        out.x(n - 1) = d(n - 1);
        for (Index i = n - 2; i >= 0; --i) {
            out.x(i) = d(i) - c(i) * out.x(i + 1);
        }
        if (out.x.allFinite()) return out;
    }

    out.x = sys.dense().completeOrthogonalDecomposition().solve(sys.rhs);
    out.least_squares = true;
    return out;
}

// ---------------------------------------------------------------------------
// Per-band kernels

/// Multiplicative S update for one band. Entries whose previous value is
/// zero, or whose numerator vanishes, stay at zero.
template <typename SRow, typename HRow, typename YRow>
Vector update_s_band(const SRow& s_prev, const HRow& h, const YRow& y, double lambda_s, double p) {
    const Index frames = s_prev.size();
    const Index taps = h.size();
    Vector x_prev(frames);
    convolve_band(s_prev, h, x_prev);

    Vector s(frames);
    for (Index tau = 0; tau < frames; ++tau) {
        const double sp = s_prev(tau);
        double num = 0.0, den = 0.0;
        const Index last = std::min(frames - 1, tau + taps - 1);
        for (Index n = tau; n <= last; ++n) {
            num += h(n - tau) * y(n);
            den += h(n - tau) * x_prev(n);
        }
        if (sp <= 0.0 || num <= 0.0) {
            s(tau) = 0.0;
            continue;
        }
        if (lambda_s > 0.0) {
            den += 0.5 * lambda_s * p * (p == 1.0 ? 1.0 : std::pow(sp, p - 1.0));
        }
        s(tau) = sp * (num / den);
    }
    return s;
}

/// Builds (A + lambda_h B L^T L) h = B zeta for one band, where
/// A = diag(sum_n s[n-tau] x'[n]), B = diag(h'), zeta = sum_n s[n-tau] y[n]
/// and x' is the model output for (s, h').
template <typename SRow, typename HRow, typename YRow>
TridiagonalSystem h_system_band(const SRow& s, const HRow& h_prev, const YRow& y,
                                double lambda_h) {
    const Index frames = s.size();
    const Index taps = h_prev.size();
    Vector x_prev(frames);
    convolve_band(s, h_prev, x_prev);

    TridiagonalSystem sys;
    sys.diag.resize(taps);
    sys.rhs.resize(taps);
    sys.lower.resize(taps - 1);
    sys.upper.resize(taps - 1);
    for (Index tau = 0; tau < taps; ++tau) {
        double a = 0.0, zeta = 0.0;
        for (Index n = tau; n < frames; ++n) {
            a += s(n - tau) * x_prev(n);
            zeta += s(n - tau) * y(n);
        }
        const double b = h_prev(tau);
        // L^T L is the second-difference stencil with 1 at both corners.
        const double stencil = (tau == 0 || tau == taps - 1) ? 1.0 : 2.0;
        sys.diag(tau) = a + lambda_h * b * stencil;
        sys.rhs(tau) = b * zeta;
        if (tau > 0) sys.lower(tau - 1) = -lambda_h * b;
        if (tau + 1 < taps) sys.upper(tau) = -lambda_h * b;
    }
    return sys;
}

/// H update for one band; the previous kernel is floored at `floor` and
/// negative solution entries are clamped to zero.
template <typename SRow, typename HRow, typename YRow>
Vector update_h_band(const SRow& s, const HRow& h_prev, const YRow& y, double lambda_h,
                     double floor) {
    const Vector hp = h_prev.transpose().cwiseMax(floor);
    const TridiagonalSystem sys = h_system_band(s, hp, y, lambda_h);
    if (!sys.diag.allFinite() || !sys.lower.allFinite() || !sys.rhs.allFinite()) {
        throw NumericalFailure("H system has non-finite coefficients");
    }
    // NaN must survive the clamp so the caller can report it.
    return solve_tridiagonal(sys).x.unaryExpr([](double v) { return v < 0.0 ? 0.0 : v; });
}

// ---------------------------------------------------------------------------
// Solver state and steps

struct SolverState {
    Matrix S;
    Matrix H;
    Matrix X;  // forward_model(S, H)
    int iteration = 0;
    std::vector<CostTerms> cost_history;
    bool converged = false;
};

inline void require_valid_observation(const Matrix& Y) {
    if (!Y.allFinite() || (Y.size() > 0 && Y.minCoeff() < 0.0)) {
        throw InvalidArgument("observation must be finite and nonnegative");
    }
}

/// Initial kernel exp(-tau), tau = 0..n_h-1, in every band.
inline Matrix initial_kernel(Index bands, int n_h) {
    Matrix H(bands, n_h);
    for (Index tau = 0; tau < n_h; ++tau) {
        H.col(tau).setConstant(std::exp(-static_cast<double>(tau)));
    }
    return H;
}

inline SolverState initialize(const Matrix& Y, const SolverConfig& cfg) {
    cfg.validate();
    require_valid_observation(Y);
    SolverState st;
    st.S = Y;
    st.H = initial_kernel(Y.rows(), cfg.n_h);
    st.X = forward_model(st.S, st.H);
    st.cost_history.push_back(cost_terms(st.S, st.H, Y, cfg));
    return st;
}

inline SolverState update_s(SolverState st, const Matrix& Y, const SolverConfig& cfg) {
    require_same_shape(st.S, Y, "update_s");
    require_same_bands(st.H, Y, "update_s");
    const BandWeights w = per_band_lambdas(Y, cfg);
    for (Index k = 0; k < Y.rows(); ++k) {
        st.S.row(k) = update_s_band(st.S.row(k), st.H.row(k), Y.row(k), w.lambda_s(k), cfg.p);
    }
    if (!st.S.allFinite()) {
        throw NumericalFailure("S update produced non-finite values");
    }
    st.X = forward_model(st.S, st.H);
    return st;
}

/// Scales every row of S so that its peak equals the peak of the matching
/// row of Y; rows where Y vanishes are zeroed.
inline SolverState rescale_s(SolverState st, const Matrix& Y) {
    require_same_shape(st.S, Y, "rescale_s");
    for (Index k = 0; k < Y.rows(); ++k) {
        const double y_peak = Y.row(k).maxCoeff();
        const double s_peak = st.S.row(k).maxCoeff();
        if (y_peak <= 0.0) {
            st.S.row(k).setZero();
        } else if (s_peak > 0.0) {
            st.S.row(k) *= y_peak / s_peak;
        }
    }
    st.X = forward_model(st.S, st.H);
    return st;
}

inline SolverState update_h(SolverState st, const Matrix& Y, const SolverConfig& cfg) {
    require_same_shape(st.S, Y, "update_h");
    require_same_bands(st.H, Y, "update_h");
    const BandWeights w = per_band_lambdas(Y, cfg);
    const double floor = numerical_floor(Y, cfg);
    for (Index k = 0; k < Y.rows(); ++k) {
        st.H.row(k) = update_h_band(st.S.row(k), st.H.row(k), Y.row(k), w.lambda_h(k), floor);
    }
    if (!st.H.allFinite()) {
        throw NumericalFailure("H update produced non-finite values");
    }
    st.X = forward_model(st.S, st.H);
    return st;
}

/// Full alternating loop. Stops after max_iter iterations or once
/// ||S - S'||_F <= delta_factor * ||Y||_F, S' being S at the start of the
/// iteration.
inline SolverState run(const Matrix& Y, const SolverConfig& cfg) {
    cfg.validate();
    if (Y.cols() <= cfg.n_h) {
        throw SignalTooShort("need more frames (" + std::to_string(Y.cols()) +
                             ") than kernel taps (" + std::to_string(cfg.n_h) + ")");
    }
    SolverState st = initialize(Y, cfg);
    const double delta = cfg.delta_factor * Y.norm();
    for (int i = 1; i <= cfg.max_iter; ++i) {
        const Matrix s_start = st.S;
        try {
            st = update_s(std::move(st), Y, cfg);
            if (cfg.rescale) st = rescale_s(std::move(st), Y);
            st = update_h(std::move(st), Y, cfg);
        } catch (const NumericalFailure& e) {
            throw NumericalFailure(e.what(), i);
        }
        st.iteration = i;
        st.cost_history.push_back(cost_terms(st.S, st.H, Y, cfg));
        if ((st.S - s_start).norm() <= delta) {
            st.converged = true;
            break;
        }
    }
    return st;
}

/// CSV with columns iteration,fidelity,sparsity_penalty,smoothness_penalty,total.
inline void write_cost_csv(std::ostream& os, const std::vector<CostTerms>& history) {
    const auto old_precision = os.precision(17);
    os << "iteration,fidelity,sparsity_penalty,smoothness_penalty,total\n";
    for (std::size_t i = 0; i < history.size(); ++i) {
        const CostTerms& c = history[i];
        os << i << ',' << c.fidelity << ',' << c.sparsity << ',' << c.smoothness << ','
           << c.total() << '\n';
    }
    os.precision(old_precision);
}

}  // namespace cnmf

#endif  // CNMF_SOLVER_HPP
