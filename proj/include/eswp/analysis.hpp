#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "eswp/rng.hpp"
#include "eswp/sampler.hpp"

namespace eswp {

// Per-step loss history of one sample, with its initial score. losses[k]
// holds the loss observed at step k+1.
struct LossTrace {
    std::vector<double> losses;
    double s0 = 0.0;
};

inline LossTrace random_trace(std::size_t length, double s0, Rng& rng, double scale = 2.0) {
    LossTrace t;
    t.s0 = s0;
    t.losses.resize(length);
    for (double& v : t.losses) v = scale * rng.u01();
    return t;
}

struct TransferPoint {
    double omega = 0.0;
    double gain = 0.0;
};

// Weight sequence w(1..t) produced by the shipped recursion on one trace.
// This is the implementation path the expansion oracle checks.
inline std::vector<double> recursion_weights(const LossTrace& trace, const BetaParams& betas) {
    SamplerState st = init_state(1);
    st.scores[0] = trace.s0;
    st.weights[0] = trace.s0;
    std::vector<double> w(trace.losses.size());
    for (std::size_t k = 0; k < trace.losses.size(); ++k) {
        update_sample(st, 0, trace.losses[k], betas, static_cast<std::int64_t>(k) + 1);
        w[k] = st.weights[0];
    }
    return w;
}

// Explicit expansion of the weight at step t: the geometric loss sum, the
// accumulated loss differences, and the exact initialization term
// beta2^{t-1} * (beta1 * s0 + (beta2 - beta1) * loss(1)). With that term
// the expansion equals the recursion identically, not just up to
// O(beta2^t).
inline double expansion_weight(const LossTrace& trace, const BetaParams& betas, std::size_t t,
                               bool include_init_term = true) {
    if (betas.beta2 == 1.0) {
        throw std::invalid_argument("expansion_weight: beta2 = 1 has no expansion");
    }
    if (t < 1 || t > trace.losses.size()) {
        throw std::invalid_argument("expansion_weight: t out of range");
    }
    const double b1 = betas.beta1;
    const double b2 = betas.beta2;
    auto loss = [&](std::size_t k) { return trace.losses[k - 1]; };

    double sum_losses = 0.0;
    double p = 1.0;  // b2^{t-k}, built iteratively from k = t downward
    for (std::size_t k = t; k >= 1; --k) {
        sum_losses += p * loss(k);
        p *= b2;
    }
    double sum_diffs = 0.0;
    p = 1.0;  // b2^{t-1-k} from k = t-1 downward
    for (std::size_t k = t; k >= 2; --k) {
        sum_diffs += p * (loss(k) - loss(k - 1));
        p *= b2;
    }
    double w = (1.0 - b2) * sum_losses + (b2 - b1) * sum_diffs;
    if (include_init_term) {
        w += std::pow(b2, static_cast<double>(t - 1)) *
             (b1 * trace.s0 + (b2 - b1) * loss(1));
    }
    return w;
}

// Max |recursion - expansion| over all steps of the trace.
inline double recursion_expansion_gap(const LossTrace& trace, const BetaParams& betas,
                                      bool include_init_term = true) {
    const std::vector<double> rec = recursion_weights(trace, betas);
    double gap = 0.0;
    for (std::size_t t = 1; t <= trace.losses.size(); ++t) {
        gap = std::max(gap, std::abs(rec[t - 1] - expansion_weight(trace, betas, t,
                                                                  include_init_term)));
    }
    return gap;
}

// |H(i*omega0)| of the continuous-time idealization:
// sqrt(((b2-b1)^2 w^2 + (1-b2)^2) / (w^2 + (1-b2)^2)). DC gain is 1; the
// high-frequency asymptote is |b2 - b1|.
inline double continuous_gain(const BetaParams& betas, double omega0) {
    if (betas.beta2 == 1.0) {
        throw std::invalid_argument("continuous_gain: beta2 = 1 is degenerate");
    }
    if (!(omega0 >= 0.0)) {
        throw std::invalid_argument("continuous_gain: omega0 must be non-negative");
    }
    const double d = betas.beta2 - betas.beta1;
    const double c = 1.0 - betas.beta2;
    const double w2 = omega0 * omega0;
    return std::sqrt((d * d * w2 + c * c) / (w2 + c * c));
}

// Exact gain of the discrete recursion at per-step angular frequency
// omega, from the z-transform of the two-EMA update evaluated on the unit
// circle: |(1-b1) + b1 (1-b2) e^{-iw} / (1 - b2 e^{-iw})|.
inline double discrete_gain(const BetaParams& betas, double omega) {
    if (betas.beta2 == 1.0) {
        throw std::invalid_argument("discrete_gain: beta2 = 1 is degenerate");
    }
    const std::complex<double> z_inv = std::polar(1.0, -omega);
    const std::complex<double> h =
        (1.0 - betas.beta1) +
        betas.beta1 * (1.0 - betas.beta2) * z_inv / (1.0 - betas.beta2 * z_inv);
    return std::abs(h);
}

// Measured gain: drive the recursion with loss(t) = 1 + 0.5 sin(omega t),
// discard a burn-in of >= 10/(1-beta2) steps, then least-squares fit
// a + b sin(omega t) + c cos(omega t) over `cycles` full periods and
// report amplitude ratio sqrt(b^2 + c^2) / 0.5.
inline double empirical_gain(const BetaParams& betas, double omega, std::size_t cycles = 40) {
    if (!(omega > 0.0)) {
        throw std::invalid_argument("empirical_gain: omega must be positive");
    }
    if (betas.beta2 == 1.0) {
        throw std::invalid_argument("empirical_gain: beta2 = 1 is degenerate");
    }
    const double two_pi = 6.283185307179586476925286766559;
    const std::size_t burn_in = static_cast<std::size_t>(
        std::ceil(10.0 / (1.0 - betas.beta2)));
    const std::size_t window = std::max<std::size_t>(
        static_cast<std::size_t>(std::ceil(static_cast<double>(cycles) * two_pi / omega)), 8);

    SamplerState st = init_state(1);
    double t = 0.0;
    // normal-equation accumulators for [1, sin, cos]
    double s_ss = 0, s_cc = 0, s_sc = 0, s_s = 0, s_c = 0;
    double y_1 = 0, y_s = 0, y_c = 0;
    std::size_t n_fit = 0;
    for (std::size_t step = 1; step <= burn_in + window; ++step) {
        t = static_cast<double>(step);
        const double loss = 1.0 + 0.5 * std::sin(omega * t);
        update_sample(st, 0, loss, betas, static_cast<std::int64_t>(step));
        if (step <= burn_in) continue;
        const double sn = std::sin(omega * t);
        const double cs = std::cos(omega * t);
        const double w = st.weights[0];
        s_ss += sn * sn;
        s_cc += cs * cs;
        s_sc += sn * cs;
        s_s += sn;
        s_c += cs;
        y_1 += w;
        y_s += w * sn;
        y_c += w * cs;
        ++n_fit;
    }
    // Solve the 3x3 normal equations [[N,Ss,Sc],[Ss,Sss,Ssc],[Sc,Ssc,Scc]]
    const double N = static_cast<double>(n_fit);
    double m[3][4] = {{N, s_s, s_c, y_1},
                      {s_s, s_ss, s_sc, y_s},
                      {s_c, s_sc, s_cc, y_c}};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        }
        std::swap(m[col], m[piv]);
        for (int r = 0; r < 3; ++r) {
            if (r == col || m[col][col] == 0.0) continue;
            const double f = m[r][col] / m[col][col];
            for (int c2 = col; c2 < 4; ++c2) m[r][c2] -= f * m[col][c2];
        }
    }
    const double b = m[1][3] / m[1][1];
    const double c = m[2][3] / m[2][2];
    return std::sqrt(b * b + c * c) / 0.5;
}

// Reference loss of the DRO reformulation at step t (appendix form, with
// the explicit s0 term). Satisfies
//   w(t+1) - w(t) = (1 - beta1) * (loss(t+1) - ref(t)).
inline double dro_reference_loss(const LossTrace& trace, const BetaParams& betas,
                                 std::size_t t) {
    if (betas.beta1 == 1.0) {
        throw std::invalid_argument("dro_reference_loss: beta1 = 1 is degenerate");
    }
    if (t < 1 || t > trace.losses.size()) {
        throw std::invalid_argument("dro_reference_loss: t out of range");
    }
    const double b1 = betas.beta1;
    const double b2 = betas.beta2;
    auto loss = [&](std::size_t k) { return trace.losses[k - 1]; };

    double hist = 0.0;
    double p = 1.0;  // b2^{t-1-k}, built iteratively from k = t-1 downward
    for (std::size_t k = t; k >= 2; --k) {
        hist += p * loss(k - 1);
        p *= b2;
    }
    return (1.0 - 2.0 * b1 + b1 * b2) / (1.0 - b1) * loss(t) +
           b1 * (1.0 - b2) * (1.0 - b2) / (1.0 - b1) * hist +
           b1 * (1.0 - b2) * std::pow(b2, static_cast<double>(t - 1)) / (1.0 - b1) * trace.s0;
}

// Max |(w(t+1) - w(t)) - (1-beta1)(loss(t+1) - ref(t))| over the trace.
inline double dro_identity_residual(const LossTrace& trace, const BetaParams& betas) {
    const std::vector<double> w = recursion_weights(trace, betas);
    double residual = 0.0;
    for (std::size_t t = 1; t + 1 <= trace.losses.size(); ++t) {
        const double lhs = w[t] - w[t - 1];
        const double rhs =
            (1.0 - betas.beta1) * (trace.losses[t] - dro_reference_loss(trace, betas, t));
        residual = std::max(residual, std::abs(lhs - rhs));
    }
    return residual;
}

// Consistent least-squares rows: per-sample loss 0.5 * (a_i . theta - b_i)^2
// with rhs = A theta_star, so theta_star interpolates with zero loss.
struct LwGdProblem {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> a;      // rows x dim
    std::vector<double> rhs;    // rows
    std::vector<double> theta_star;
    std::vector<double> theta0;
};

inline LwGdProblem random_consistent_system(std::size_t rows, std::size_t dim,
                                            std::uint64_t seed) {
    LwGdProblem p;
    p.rows = rows;
    p.dim = dim;
    Rng rng = Rng::derive(seed, 0x19d);
    p.a.resize(rows * dim);
    for (double& v : p.a) v = rng.normal();
    p.theta_star.resize(dim);
    for (double& v : p.theta_star) v = rng.normal();
    p.rhs.assign(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            p.rhs[i] += p.a[i * dim + j] * p.theta_star[j];
        }
    }
    p.theta0.assign(dim, 0.0);
    return p;
}

struct LwGdStep {
    double mean_loss = 0.0;
    double delta = 0.0;      // slack Delta(s); 0 when losses are all equal
    double dist_to_opt = 0.0;
    bool degenerate = false;  // all per-sample losses equal at this step
};

struct LwGdResult {
    std::vector<LwGdStep> trajectory;
    std::vector<double> theta;
    bool converged(double tol) const {
        return !trajectory.empty() && trajectory.back().mean_loss < tol;
    }
};

// Discretized loss-weighted gradient flow: weights are normalized current
// losses, one plain gradient step per iteration. Aborts if the mean loss
// increases for 100 consecutive steps.
inline LwGdResult lw_gd_run(const LwGdProblem& problem, double step_size, std::size_t steps) {
    if (problem.rhs.size() != problem.rows || problem.a.size() != problem.rows * problem.dim) {
        throw std::invalid_argument("lw_gd_run: inconsistent problem shapes");
    }
    const std::size_t n = problem.rows;
    const std::size_t d = problem.dim;
    LwGdResult out;
    out.theta = problem.theta0;
    out.trajectory.reserve(steps);

    std::vector<double> losses(n), resid(n), grad(d);
    std::size_t rising = 0;
    double prev_mean = std::numeric_limits<double>::infinity();
    for (std::size_t step = 0; step < steps; ++step) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = -problem.rhs[i];
            for (std::size_t j = 0; j < d; ++j) r += problem.a[i * d + j] * out.theta[j];
            resid[i] = r;
            losses[i] = 0.5 * r * r;
            total += losses[i];
        }
        LwGdStep rec;
        rec.mean_loss = total / static_cast<double>(n);
        if (!std::isfinite(rec.mean_loss)) {
            throw std::runtime_error("lw_gd_run: diverging (mean loss is non-finite at step " +
                                     std::to_string(step) + ")");
        }
        double dist2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double e = out.theta[j] - problem.theta_star[j];
            dist2 += e * e;
        }
        rec.dist_to_opt = std::sqrt(dist2);

        if (total <= 0.0) {
            rec.degenerate = true;
            out.trajectory.push_back(rec);
            break;
        }

        // Delta(s) from its definition: delta = (min above-average loss)
        // - (max at-or-below-average loss), times the excess probability
        // mass of the above-average set.
        const double avg = rec.mean_loss;
        double min_above = std::numeric_limits<double>::infinity();
        double max_below = -std::numeric_limits<double>::infinity();
        double excess = 0.0;
        bool any_above = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (losses[i] > avg) {
                any_above = true;
                min_above = std::min(min_above, losses[i]);
                excess += losses[i] / total - 1.0 / static_cast<double>(n);
            } else {
                max_below = std::max(max_below, losses[i]);
            }
        }
        if (any_above) {
            rec.delta = (min_above - max_below) * excess;
        } else {
            rec.degenerate = true;  // all losses equal
        }
        out.trajectory.push_back(rec);

        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = (losses[i] / total) * resid[i];
            for (std::size_t j = 0; j < d; ++j) grad[j] += w * problem.a[i * d + j];
        }
        for (std::size_t j = 0; j < d; ++j) out.theta[j] -= step_size * grad[j];

        if (rec.mean_loss > prev_mean) {
            if (++rising >= 100) {
                throw std::runtime_error(
                    "lw_gd_run: diverging (mean loss rose for 100 consecutive steps, last " +
                    std::to_string(rec.mean_loss) + ")");
            }
        } else {
            rising = 0;
        }
        prev_mean = rec.mean_loss;
    }
    return out;
}

}  // namespace eswp
