#include "smpkit/validate.hpp"

#include <cmath>
#include <sstream>

#include "smpkit/rng.hpp"

namespace smpkit {

namespace {

std::string describe(double t, const Vec& x, const Vec& u) {
    std::ostringstream os;
    os << "t=" << t << " x=[" << x.transpose() << "] u=[" << u.transpose() << "]";
    return os.str();
}

std::string vec_str(const Vec& v) {
    std::ostringstream os;
    os << "[" << v.transpose() << "]";
    return os.str();
}

Vec sample_box(const CounterRng& rng, const Vec& center, double halfwidth,
               std::uint64_t key, std::uint64_t stream) {
    Vec x(center.size());
    for (int i = 0; i < x.size(); ++i)
        x[i] = center[i] + halfwidth * (2.0 * rng.uniform(key, stream, i) - 1.0);
    return x;
}

}  // namespace

ValidationReport validate_problem(const ControlProblem& prob, int samples, std::uint64_t seed,
                                  const ValidationOptions& opts) {
    if (samples <= 0) throw std::invalid_argument("validate_problem: samples must be positive");
    CounterRng rng(seed);
    const int n = prob.dim_state;
    const int d = prob.dim_noise;
    const double T = prob.horizon;
    const double alpha = prob.dissipativity_alpha;

    HypothesisCheck pairwise{"dissipativity-pairwise", true, -1e300, ""};
    HypothesisCheck directional{"dissipativity-directional", true, -1e300, ""};
    HypothesisCheck hs{"dissipativity-hilbert-schmidt", true, -1e300, ""};
    HypothesisCheck lip{"diffusion-lipschitz", true, -1e300, ""};
    HypothesisCheck deriv{"derivative-consistency", true, 0.0, ""};
    HypothesisCheck growth{"polynomial-growth-envelope", true, 0.0, ""};

    auto guard_vec = [&](const Vec& v, const char* what, double t, const Vec& x, const Vec& u) {
        if (!v.allFinite())
            throw CallbackFailure(std::string(what) + " returned non-finite value at " + describe(t, x, u));
    };
    auto guard_mat = [&](const Mat& m, const char* what, double t, const Vec& x, const Vec& u) {
        if (!m.allFinite())
            throw CallbackFailure(std::string(what) + " returned non-finite value at " + describe(t, x, u));
    };
    auto guard_scalar = [&](double v, const char* what, double t, const Vec& x, const Vec& u) {
        if (!std::isfinite(v))
            throw CallbackFailure(std::string(what) + " returned non-finite value at " + describe(t, x, u));
        return v;
    };

    for (int s = 0; s < samples; ++s) {
        const auto key = static_cast<std::uint64_t>(s);
        const double t = T * rng.uniform(key, 10, 0);
        const Vec x = sample_box(rng, prob.initial_state, opts.box_halfwidth, key, 11);
        const Vec xp = sample_box(rng, prob.initial_state, opts.box_halfwidth, key, 12);
        const Vec u = prob.control_domain.sample(seed, key);

        const Vec bx = prob.drift(t, x, u);
        const Vec bxp = prob.drift(t, xp, u);
        guard_vec(bx, "drift", t, x, u);
        guard_vec(bxp, "drift", t, xp, u);

        // (2.2): <b(x)-b(x'), x-x'> <= alpha |x-x'|^2
        const Vec dx = x - xp;
        const double d2 = dx.squaredNorm();
        if (d2 > 1e-20) {
            const double margin = (bx - bxp).dot(dx) - alpha * d2;
            if (margin > pairwise.worst) {
                pairwise.worst = margin;
                pairwise.witness = describe(t, x, u) + " x'=" + vec_str(xp);
            }
        }

        // (H3): |sigma(x)-sigma(x')|_F <= C1 |x-x'|
        const Mat sx = prob.diffusion(t, x, u);
        const Mat sxp = prob.diffusion(t, xp, u);
        guard_mat(sx, "diffusion", t, x, u);
        const double lip_margin = (sx - sxp).norm() - prob.diffusion_lipschitz * std::sqrt(d2);
        if (lip_margin > lip.worst) {
            lip.worst = lip_margin;
            lip.witness = describe(t, x, u) + " x'=" + vec_str(xp);
        }

        // (2.4): <D_x b y, y> <= alpha |y|^2
        const Mat A = prob.drift_dx(t, x, u);
        guard_mat(A, "drift_dx", t, x, u);
        const Vec y = sample_box(rng, Vec::Zero(n), 1.0, key, 13);
        if (y.squaredNorm() > 1e-20) {
            const double margin = y.dot(A * y) - alpha * y.squaredNorm();
            if (margin > directional.worst) {
                directional.worst = margin;
                directional.witness = describe(t, x, u) + " y=" + vec_str(y);
            }
        }

        // (2.9) chain: Tr(D_x b P P^T) <= alpha Tr(P P^T) for symmetric P
        Mat P(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
                P(i, j) = P(j, i) = 2.0 * rng.uniform(key, 14, static_cast<std::uint64_t>(i) * n + j) - 1.0;
        const double pn2 = (P * P.transpose()).trace();
        if (pn2 > 1e-20) {
            const double margin = (A * P * P.transpose()).trace() - alpha * pn2;
            if (margin > hs.worst) {
                hs.worst = margin;
                hs.witness = describe(t, x, u);
            }
        }
    }

    pairwise.passed = pairwise.worst <= opts.tol;
    directional.passed = directional.worst <= opts.tol;
    hs.passed = hs.worst <= opts.tol;
    lip.passed = lip.worst <= opts.tol;

    // Analytic derivatives vs central finite differences, relative to the
    // scale of the derivative being checked.
    const int fd_samples = std::min(samples, 64);
    const double eps = opts.fd_step;
    for (int s = 0; s < fd_samples; ++s) {
        const auto key = static_cast<std::uint64_t>(s) + 1000003ULL;
        const double t = T * rng.uniform(key, 20, 0);
        const Vec x = sample_box(rng, prob.initial_state, 0.5 * opts.box_halfwidth, key, 21);
        const Vec u = prob.control_domain.sample(seed, key + 7);

        double worst = 0.0;
        auto rel = [&worst](double err, double scale) {
            worst = std::max(worst, err / std::max(1.0, scale));
        };

        const Mat A = prob.drift_dx(t, x, u);
        const auto Hb = prob.drift_dxx(t, x, u);
        const auto Sdx = prob.diffusion_dx(t, x, u);
        const auto Sdxx = prob.diffusion_dxx(t, x, u);
        const Vec fx = prob.running_cost_dx(t, x, u);
        const Mat fxx = prob.running_cost_dxx(t, x, u);
        const Vec hx = prob.terminal_cost_dx(x);
        const Mat hxx = prob.terminal_cost_dxx(x);

        for (int c = 0; c < n; ++c) {
            Vec xp = x, xm = x;
            xp[c] += eps;
            xm[c] -= eps;

            const Vec db = (prob.drift(t, xp, u) - prob.drift(t, xm, u)) / (2 * eps);
            rel((db - A.col(c)).norm(), A.norm());

            // d/dx_c (D_x b)(i,k) = Hess(b_i)(k,c)
            const Mat dA = (prob.drift_dx(t, xp, u) - prob.drift_dx(t, xm, u)) / (2 * eps);
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k)
                    rel(std::abs(dA(i, k) - Hb[i](k, c)), Hb[i].norm());

            const Mat dS = (prob.diffusion(t, xp, u) - prob.diffusion(t, xm, u)) / (2 * eps);
            for (int j = 0; j < d; ++j)
                rel((dS.col(j) - Sdx[j].col(c)).norm(), Sdx[j].norm() + 1.0);

            const auto Sdx_p = prob.diffusion_dx(t, xp, u);
            const auto Sdx_m = prob.diffusion_dx(t, xm, u);
            for (int j = 0; j < d; ++j) {
                const Mat dSj = (Sdx_p[j] - Sdx_m[j]) / (2 * eps);
                for (int i = 0; i < n; ++i)
                    for (int k = 0; k < n; ++k)
                        rel(std::abs(dSj(i, k) - Sdxx[j][i](k, c)), Sdxx[j][i].norm() + 1.0);
            }

            rel(std::abs((prob.running_cost(t, xp, u) - prob.running_cost(t, xm, u)) / (2 * eps) - fx[c]),
                fx.norm());
            rel(((prob.running_cost_dx(t, xp, u) - prob.running_cost_dx(t, xm, u)) / (2 * eps) - fxx.col(c)).norm(),
                fxx.norm());
            rel(std::abs((prob.terminal_cost(xp) - prob.terminal_cost(xm)) / (2 * eps) - hx[c]), hx.norm());
            rel(((prob.terminal_cost_dx(xp) - prob.terminal_cost_dx(xm)) / (2 * eps) - hxx.col(c)).norm(),
                hxx.norm());
        }

        if (worst > deriv.worst) {
            deriv.worst = worst;
            deriv.witness = describe(t, x, u);
        }
    }
    deriv.passed = deriv.worst <= opts.fd_rel_tol;

    // Growth envelopes: record the worst constant |phi| / (1 + |x|^e); this
    // is a fit, it fails only on non-finite values.
    double worst_ratio = 0.0;
    for (int s = 0; s < samples; ++s) {
        const auto key = static_cast<std::uint64_t>(s) + 2000003ULL;
        const double t = T * rng.uniform(key, 30, 0);
        const Vec x = sample_box(rng, prob.initial_state, opts.box_halfwidth, key, 31);
        const Vec u = prob.control_domain.sample(seed, key + 13);
        const double nx = x.norm();
        worst_ratio = std::max(worst_ratio,
                               prob.drift(t, x, u).norm() / (1.0 + std::pow(nx, prob.growth.drift + 1)));
        worst_ratio = std::max(
            worst_ratio, std::abs(guard_scalar(prob.running_cost(t, x, u), "running_cost", t, x, u)) /
                             (1.0 + std::pow(nx, prob.growth.running)));
        worst_ratio = std::max(
            worst_ratio, std::abs(guard_scalar(prob.terminal_cost(x), "terminal_cost", t, x, u)) /
                             (1.0 + std::pow(nx, prob.growth.terminal)));
    }
    growth.worst = worst_ratio;
    growth.passed = std::isfinite(worst_ratio);
    growth.witness = "worst envelope constant over sample";

    ValidationReport report;
    report.checks = {pairwise, directional, hs, lip, deriv, growth};
    return report;
}

}  // namespace smpkit
