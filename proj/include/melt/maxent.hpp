#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "probe.hpp"
#include "quadrature.hpp"
#include "rng.hpp"

namespace melt {

// Exponential-of-polynomial density p(l) = exp(-1 - sum_j alpha_j l^j) over
// the fixed domain [0, 1]. Positivity is structural; normalization is the
// j = 0 constraint and holds only as well as the fit converged.
struct MaxEntDensity {
    std::vector<double> coefficients;
    double residual = std::numeric_limits<double>::infinity(); // max_i |m_i - mu_i|
    std::size_t cycles = 0;             // coordinate-descent full cycles used
    std::size_t polish_iterations = 0;  // second-phase dual steps used
    bool converged = false;
    bool clamped = false; // exp argument clamp hit at a node => suspect fit
};

struct FitOptions {
    double tol = 1e-6;
    std::size_t max_cycles = 10000;
    std::uint64_t init_seed = 0; // 0 => alpha = 0 start; else alpha ~ N(0,1)
    // Coordinate descent is cheap but flattens out well above tol on real
    // moment vectors; once the best residual improves by less than stall_rel
    // over stall_window cycles, a damped Newton polish on the dual finishes
    // the job. max_polish bounds that second phase.
    std::size_t stall_window = 20;
    double stall_rel = 1e-3;
    std::size_t max_polish = 200;
    double exp_clamp = 700.0;
};

inline double density_eval(const MaxEntDensity& d, double lambda) {
    if (!(lambda > 0.0) || lambda > 1.0)
        throw contract_error("density_eval: lambda outside (0, 1]");
    double poly = 0.0;
    for (std::size_t j = d.coefficients.size(); j-- > 0;)
        poly = poly * lambda + d.coefficients[j];
    double s = -1.0 - poly;
    s = std::clamp(s, -700.0, 700.0);
    return std::exp(s);
}

inline double moment_of_density(const MaxEntDensity& d, std::size_t i, const QuadratureRule& q) {
    double acc = 0.0;
    for (std::size_t node = 0; node < q.nodes.size(); ++node)
        acc += q.weights[node] * std::pow(q.nodes[node], static_cast<double>(i)) *
               density_eval(d, q.nodes[node]);
    return acc;
}

inline double log_geometric_mean(const MaxEntDensity& d, const QuadratureRule& q) {
    double acc = 0.0;
    for (std::size_t node = 0; node < q.nodes.size(); ++node)
        acc += q.weights[node] * std::log(q.nodes[node]) * density_eval(d, q.nodes[node]);
    return acc;
}

inline double differential_entropy(const MaxEntDensity& d, const QuadratureRule& q) {
    double acc = 0.0;
    for (std::size_t node = 0; node < q.nodes.size(); ++node) {
        const double p = density_eval(d, q.nodes[node]);
        acc -= q.weights[node] * p * std::log(p);
    }
    return acc;
}

namespace detail {

// Shared scratch state for the fitter: node powers up to l^(2k) (the dual
// Hessian needs them), current polynomial values s and density p per node.
struct FitState {
    std::size_t k = 0;
    std::size_t nn = 0;
    double clamp = 700.0;
    bool clamp_hit = false;
    std::vector<std::vector<double>> pw; // pw[j][node] = node^j, j = 0..2k
    std::vector<double> s, p;
    const QuadratureRule* q = nullptr;

    void init(std::size_t k_, const QuadratureRule& q_, double clamp_) {
        k = k_;
        q = &q_;
        nn = q_.nodes.size();
        clamp = clamp_;
        pw.assign(2 * k + 1, std::vector<double>(nn));
        for (std::size_t node = 0; node < nn; ++node) pw[0][node] = 1.0;
        for (std::size_t j = 1; j <= 2 * k; ++j)
            for (std::size_t node = 0; node < nn; ++node)
                pw[j][node] = pw[j - 1][node] * q_.nodes[node];
        s.assign(nn, 0.0);
        p.assign(nn, 0.0);
    }

    void refresh(const std::vector<double>& alpha) {
        for (std::size_t node = 0; node < nn; ++node) {
            double poly = 0.0;
            for (std::size_t j = alpha.size(); j-- > 0;)
                poly = poly * q->nodes[node] + alpha[j];
            double v = -1.0 - poly;
            if (v > clamp) {
                v = clamp;
                clamp_hit = true;
            } else if (v < -clamp) {
                v = -clamp;
                clamp_hit = true;
            }
            s[node] = v;
            p[node] = std::exp(v);
        }
    }

    void shift_coefficient(std::size_t i, double delta) {
        for (std::size_t node = 0; node < nn; ++node) {
            double v = s[node] - delta * pw[i][node];
            if (v > clamp) {
                v = clamp;
                clamp_hit = true;
            } else if (v < -clamp) {
                v = -clamp;
                clamp_hit = true;
            }
            s[node] = v;
            p[node] = std::exp(v);
        }
    }

    double moment(std::size_t j) const {
        double acc = 0.0;
        for (std::size_t node = 0; node < nn; ++node)
            acc += q->weights[node] * pw[j][node] * p[node];
        return acc;
    }

    double max_residual(const std::vector<double>& mu) const {
        double r = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i)
            r = std::max(r, std::abs(moment(i) - mu[i]));
        return r;
    }

    // Dual objective: Psi(alpha) = integral p + alpha . mu. Convex, minimized
    // exactly where every constrained moment matches.
    double dual(const std::vector<double>& alpha, const std::vector<double>& mu) const {
        double acc = 0.0;
        for (std::size_t node = 0; node < nn; ++node) acc += q->weights[node] * p[node];
        for (std::size_t j = 0; j < mu.size(); ++j) acc += alpha[j] * mu[j];
        return acc;
    }
};

} // namespace detail

inline MaxEntDensity fit_maxent(const std::vector<double>& mu, const QuadratureRule& q,
                                const FitOptions& opt = {}) {
    if (mu.empty()) throw contract_error("fit_maxent: need at least mu_0");
    if (std::abs(mu[0] - 1.0) > 1e-12)
        throw constraint_domain_error("fit_maxent: mu_0 must equal 1");
    for (std::size_t i = 0; i < mu.size(); ++i)
        if (!(mu[i] > 0.0) || mu[i] > 1.0)
            throw constraint_domain_error("fit_maxent: moment " + std::to_string(i) +
                                          " outside (0, 1]");
    if (!(opt.tol > 0.0)) throw contract_error("fit_maxent: tol must be positive");

    const std::size_t k = mu.size() - 1;
    std::vector<double> alpha(k + 1, 0.0);
    if (opt.init_seed != 0) {
        Rng rng = Rng::derive(opt.init_seed, 0xA1FAULL);
        for (auto& a : alpha) a = rng.next_normal();
    }

    detail::FitState st;
    st.init(k, q, opt.exp_clamp);
    st.refresh(alpha);

    MaxEntDensity out;
    std::vector<double> best_alpha = alpha;
    double best_res = st.max_residual(mu);
    double prev_res = best_res;
    double damping = 1.0;
    std::vector<double> best_history; // best residual after each cycle, for the stall test

    std::size_t cycle = 0;
    for (; cycle < opt.max_cycles && best_res >= opt.tol; ++cycle) {
        for (std::size_t i = 0; i <= k; ++i) {
            const double mi = st.moment(i);
            if (!(mi > 0.0) || !std::isfinite(mi))
                throw numerical_failure_error("fit_maxent: model moment underflow", i);
            const double delta = damping * std::log(mi / mu[i]);
            alpha[i] += delta;
            if (!std::isfinite(alpha[i]))
                throw numerical_failure_error("fit_maxent: coefficient became non-finite", i);
            st.shift_coefficient(i, delta);
        }
        const double res = st.max_residual(mu);
        if (res > prev_res)
            damping = std::max(1e-4, damping * 0.5);
        else
            damping = std::min(1.0, damping * 1.2);
        prev_res = res;
        if (res < best_res) {
            best_res = res;
            best_alpha = alpha;
        }
        best_history.push_back(best_res);
        const std::size_t c = best_history.size();
        if (c >= opt.stall_window && best_res >= opt.tol) {
            const double then = best_history[c - opt.stall_window];
            if (then - best_res < opt.stall_rel * then) {
                ++cycle;
                break;
            }
        }
    }
    out.cycles = cycle;

    // Second phase: damped Newton on the dual from the best iterate. The
    // Hessian H_ij = integral l^(i+j) p is a Hankel moment matrix — badly
    // conditioned at k ~ 10 — so it is Jacobi-balanced and ridged until the
    // Cholesky goes through, then an Armijo backtracking line search keeps
    // every accepted step a genuine dual descent.
    alpha = best_alpha;
    st.refresh(alpha);
    std::size_t polish = 0;
    if (best_res >= opt.tol && opt.max_polish > 0) {
        const std::size_t dim = k + 1;
        Eigen::VectorXd grad(dim), gb(dim), dir(dim);
        Eigen::MatrixXd hb(dim, dim);
        std::vector<double> mm(2 * k + 1);
        std::vector<double> trial(dim);
        for (; polish < opt.max_polish; ++polish) {
            for (std::size_t j = 0; j <= 2 * k; ++j) mm[j] = st.moment(j);
            double res = 0.0;
            for (std::size_t i = 0; i <= k; ++i) {
                grad(static_cast<Eigen::Index>(i)) = mu[i] - mm[i];
                res = std::max(res, std::abs(grad(static_cast<Eigen::Index>(i))));
            }
            if (res < best_res) {
                best_res = res;
                best_alpha = alpha;
            }
            if (res < opt.tol) break;

            Eigen::VectorXd bal(dim);
            for (std::size_t i = 0; i <= k; ++i)
                bal(static_cast<Eigen::Index>(i)) =
                    1.0 / std::sqrt(std::max(mm[2 * i], 1e-300));
            for (std::size_t i = 0; i <= k; ++i)
                for (std::size_t j = 0; j <= k; ++j)
                    hb(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                        bal(static_cast<Eigen::Index>(i)) * mm[i + j] *
                        bal(static_cast<Eigen::Index>(j));
            for (std::size_t i = 0; i <= k; ++i)
                gb(static_cast<Eigen::Index>(i)) =
                    bal(static_cast<Eigen::Index>(i)) * grad(static_cast<Eigen::Index>(i));

            bool solved = false;
            for (double ridge = 0.0; ridge <= 1.0 + 1e-12;
                 ridge = (ridge == 0.0) ? 1e-12 : ridge * 100.0) {
                Eigen::MatrixXd work = hb;
                for (std::size_t i = 0; i <= k; ++i)
                    work(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += ridge;
                Eigen::LLT<Eigen::MatrixXd> llt(work);
                if (llt.info() == Eigen::Success) {
                    Eigen::VectorXd y = llt.solve(gb);
                    for (std::size_t i = 0; i <= k; ++i)
                        dir(static_cast<Eigen::Index>(i)) =
                            bal(static_cast<Eigen::Index>(i)) * y(static_cast<Eigen::Index>(i));
                    solved = dir.allFinite();
                    if (solved) break;
                }
            }
            double dd = solved ? grad.dot(dir) : 0.0;
            if (!solved || !(dd > 0.0)) {
                dir = grad; // fall back to steepest descent on the dual
                dd = grad.squaredNorm();
                if (!(dd > 0.0)) break;
            }

            const double psi0 = st.dual(alpha, mu);
            double step = 1.0;
            bool accepted = false;
            for (int half = 0; half < 60; ++half, step *= 0.5) {
                for (std::size_t i = 0; i <= k; ++i)
                    trial[i] = alpha[i] - step * dir(static_cast<Eigen::Index>(i));
                st.refresh(trial);
                const double psi = st.dual(trial, mu);
                if (std::isfinite(psi) && psi <= psi0 - 0.25 * step * dd) {
                    alpha = trial;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                st.refresh(alpha);
                break;
            }
            for (std::size_t i = 0; i <= k; ++i)
                if (!std::isfinite(alpha[i]))
                    throw numerical_failure_error("fit_maxent: coefficient became non-finite", i);
        }
        // The loop leaves st at the last accepted alpha; fold it into best.
        const double res = st.max_residual(mu);
        if (res < best_res) {
            best_res = res;
            best_alpha = alpha;
        }
    }

    st.clamp_hit = false;
    st.refresh(best_alpha);
    out.coefficients = std::move(best_alpha);
    out.residual = st.max_residual(mu);
    out.polish_iterations = polish;
    out.converged = out.residual < opt.tol;
    out.clamped = st.clamp_hit;
    return out;
}

inline MaxEntDensity fit_maxent(const MomentEstimate& est, const QuadratureRule& q,
                                const FitOptions& opt = {}) {
    return fit_maxent(est.moments, q, opt);
}

} // namespace melt
