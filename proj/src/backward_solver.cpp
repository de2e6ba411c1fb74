#include "mvsim/backward_solver.hpp"

#include "mvsim/error.hpp"
#include "mvsim/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace mvsim {

namespace {

// Partial sums are formed over fixed blocks and reduced in block order, so the
// fit does not depend on the worker count.
constexpr std::size_t kBlock = 2048;

class Regression {
public:
    Regression(std::span<const double> x, const RegressionConfig& reg) : x_(x) {
        const double n = static_cast<double>(x.size());
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : x) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / n);
        center_ = mean;
        if (sd > 1e-12 * (1.0 + std::abs(mean))) {
            inv_scale_ = 1.0 / sd;
            dim_ = reg.degree + 1;
        } else {
            inv_scale_ = 0.0;
            dim_ = 1;
        }
        ridge_ = reg.ridge;
    }

    std::size_t dim() const { return dim_; }

    void basis(double x, double* out) const {
        const double z = (x - center_) * inv_scale_;
        out[0] = 1.0;
        for (std::size_t j = 1; j < dim_; ++j) out[j] = out[j - 1] * z;
    }

    /// Fits each target column and writes fitted values into `fitted[c]`.
    void fit(const std::vector<std::span<const double>>& targets, const std::vector<std::span<double>>& fitted,
             unsigned threads) const {
        const std::size_t n = x_.size();
        const std::size_t d = dim_;
        const std::size_t nt = targets.size();
        const std::size_t blocks = (n + kBlock - 1) / kBlock;
        std::vector<Eigen::MatrixXd> gram(blocks, Eigen::MatrixXd::Zero(d, d));
        std::vector<Eigen::MatrixXd> rhs(blocks, Eigen::MatrixXd::Zero(d, nt));
        parallel_chunks(blocks, threads, [&](std::size_t b0, std::size_t b1) {
            std::vector<double> phi(d);
            for (std::size_t b = b0; b < b1; ++b) {
                const std::size_t lo = b * kBlock, hi = std::min(n, lo + kBlock);
                auto& g = gram[b];
                auto& r = rhs[b];
                for (std::size_t i = lo; i < hi; ++i) {
                    basis(x_[i], phi.data());
                    for (std::size_t p = 0; p < d; ++p) {
                        for (std::size_t q = 0; q <= p; ++q) g(p, q) += phi[p] * phi[q];
                        for (std::size_t c = 0; c < nt; ++c) r(p, c) += phi[p] * targets[c][i];
                    }
                }
            }
        });
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
        Eigen::MatrixXd r = Eigen::MatrixXd::Zero(d, nt);
        for (std::size_t b = 0; b < blocks; ++b) {
            g += gram[b];
            r += rhs[b];
        }
        g /= static_cast<double>(n);
        r /= static_cast<double>(n);
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) g(p, q) = g(q, p);
            g(p, p) += ridge_;
        }
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
        if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0) || !(ldlt.rcond() > 1e-14)) {
            throw Error(ErrorCode::RegressionSingular,
                        "normal equations are singular (rcond " + std::to_string(ldlt.rcond()) + ")");
        }
        const Eigen::MatrixXd beta = ldlt.solve(r);
        if (!beta.allFinite()) throw Error(ErrorCode::RegressionSingular, "regression coefficients are not finite");
        parallel_chunks(n, threads, [&](std::size_t lo, std::size_t hi) {
            std::vector<double> phi(d);
            for (std::size_t i = lo; i < hi; ++i) {
                basis(x_[i], phi.data());
                for (std::size_t c = 0; c < nt; ++c) {
                    double s = 0.0;
                    for (std::size_t p = 0; p < d; ++p) s += phi[p] * beta(p, c);
                    fitted[c][i] = s;
                }
            }
        });
    }

private:
    std::span<const double> x_;
    double center_ = 0.0;
    double inv_scale_ = 0.0;
    double ridge_ = 0.0;
    std::size_t dim_ = 1;
};

}  // namespace

void RegressionConfig::validate() const {
    if (degree > 10) throw Error(ErrorCode::InvalidArgument, "regression degree must be <= 10");
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw Error(ErrorCode::InvalidArgument, "ridge must be >= 0");
}

void BackwardConfig::validate() const {
    regression.validate();
    if (!(penalization > 0.0) || !std::isfinite(penalization)) {
        throw Error(ErrorCode::InvalidArgument, "backward penalization level must be positive");
    }
    if (!(truncation > 0.0)) throw Error(ErrorCode::InvalidArgument, "truncation radius must be positive");
    if (picard_sweeps == 0) throw Error(ErrorCode::InvalidArgument, "picard_sweeps must be >= 1");
    if (!(picard_tolerance >= 0.0)) throw Error(ErrorCode::InvalidArgument, "picard tolerance must be >= 0");
}

std::span<const double> BackwardSolution::y_slice(std::size_t step) const {
    return std::span<const double>(Y).subspan(step * particles, particles);
}

double BackwardSolution::mean_violation() const {
    double s = 0.0;
    for (double v : Y) s += domain.distance(v);
    return s / static_cast<double>(Y.size());
}

std::pair<double, double> BackwardSolution::y0_estimate() const {
    double mean = 0.0;
    for (double v : y_slice(0)) mean += v;
    mean /= static_cast<double>(particles);
    const double nn = static_cast<double>(pathwise.size());
    double pm = 0.0;
    for (double v : pathwise) pm += v;
    pm /= nn;
    double ss = 0.0;
    for (double v : pathwise) ss += (v - pm) * (v - pm);
    const double se = pathwise.size() > 1 ? std::sqrt(ss / (nn - 1.0) / nn) : 0.0;
    return {mean, se};
}

std::vector<double> regress(std::span<const double> x, std::span<const double> target, const RegressionConfig& reg,
                            unsigned threads) {
    reg.validate();
    if (x.empty() || x.size() != target.size()) {
        throw Error(ErrorCode::InvalidArgument, "regression needs matching nonempty samples");
    }
    std::vector<double> out(x.size());
    Regression(x, reg).fit({target}, {std::span<double>(out)}, threads);
    return out;
}

BackwardSolution solve_penalized_bsde(const ForwardSolution& fwd, const BackwardCoefficients& bc,
                                      const ConvexPotential& psi2, const BackwardConfig& cfg) {
    cfg.validate();
    validate_exponents(bc);
    if (!fwd.has_paths) throw Error(ErrorCode::InvalidArgument, "backward solver needs a forward solution with paths");

    const std::size_t n = fwd.particles;
    const std::size_t m = fwd.steps;
    const double dt = fwd.dt();
    const double level = cfg.penalization;

    BackwardSolution sol;
    sol.horizon = fwd.horizon;
    sol.steps = m;
    sol.particles = n;
    sol.penalization = level;
    sol.truncation = cfg.truncation;
    sol.domain = psi2.domain();
    sol.times = fwd.times;
    sol.Y.assign((m + 1) * n, 0.0);
    sol.Z.assign(m * n, 0.0);
    sol.phi2.assign(m * n, 0.0);

    for (double v : fwd.states) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteState, "forward solution is not finite");
    }

    // First step index at which the running max of |X| exceeds the radius.
    std::vector<std::size_t> exit_step(n, m + 1);
    if (std::isfinite(cfg.truncation)) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k <= m; ++k) {
                if (std::abs(fwd.x(i, k)) > cfg.truncation) {
                    exit_step[i] = k;
                    break;
                }
            }
        }
    }

    // Terminal condition.
    {
        const auto xm = fwd.slice(m);
        const MeasureStats mu = MeasureStats::of(xm);
        for (std::size_t i = 0; i < n; ++i) sol.Y[m * n + i] = eval_terminal(bc, xm[i], mu);
    }

    const bool picard = driver_depends_on_y(bc);
    const unsigned budget = picard ? cfg.picard_sweeps : 1;
    std::vector<double> prev;  // previous sweep's Y, empty on the first sweep
    std::vector<double> cond(n), zval(n), weighted(n);

    for (unsigned sweep = 0; sweep < budget; ++sweep) {
        sol.pathwise.assign(sol.Y.begin() + static_cast<std::ptrdiff_t>(m * n), sol.Y.end());
        for (std::size_t kk = m; kk-- > 0;) {
            const auto xk = fwd.slice(kk);
            const std::span<const double> ynext(sol.Y.data() + (kk + 1) * n, n);
            for (std::size_t i = 0; i < n; ++i) weighted[i] = ynext[i] * fwd.dB(i, kk) / dt;
            Regression(xk, cfg.regression)
                .fit({ynext, std::span<const double>(weighted)}, {std::span<double>(cond), std::span<double>(zval)},
                     cfg.threads);

            // Lagged y-argument and law of Y_k.
            const std::span<const double> ylag =
                prev.empty() ? std::span<const double>(cond) : std::span<const double>(prev.data() + kk * n, n);
            const MeasureStats mu = MeasureStats::of(xk);
            const MeasureStats nu = MeasureStats::of(ylag);
            const double t = fwd.times[kk];

            parallel_chunks(n, cfg.threads, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t i = lo; i < hi; ++i) {
                    const double f =
                        kk < exit_step[i] ? eval_driver(bc, t, xk[i], ylag[i], zval[i], mu, nu) : 0.0;
                    const double w = cond[i] + dt * f;
                    const double y = implicit_penalization_solve(psi2, level, dt, w);
                    if (!std::isfinite(y)) {
                        throw Error(ErrorCode::NonFiniteState, "backward state is not finite at step " +
                                                                   std::to_string(kk));
                    }
                    sol.Y[kk * n + i] = y;
                    sol.Z[kk * n + i] = zval[i];
                    sol.phi2[kk * n + i] = w - y;
                    sol.pathwise[i] += y - cond[i];
                }
            });
        }
        sol.sweeps = sweep + 1;
        if (!prev.empty()) {
            double gap = 0.0;
            for (std::size_t j = 0; j < m * n; ++j) gap = std::max(gap, std::abs(sol.Y[j] - prev[j]));
            sol.picard_gap = gap;
            if (gap < cfg.picard_tolerance) break;
        }
        if (sweep + 1 < budget) prev = sol.Y;
    }
    sol.picard_converged = !picard || (sol.sweeps >= 2 && sol.picard_gap < cfg.picard_tolerance);
    if (!sol.picard_converged && cfg.strict_picard) {
        throw Error(ErrorCode::PicardNonconvergence,
                    "Picard gap " + std::to_string(sol.picard_gap) + " after " + std::to_string(sol.sweeps) + " sweeps");
    }
    return sol;
}

}  // namespace mvsim
