#include "smpkit/variation.hpp"

#include <cmath>

#include "smpkit/parallel.hpp"

namespace smpkit {

namespace {

void check_spike(const PathEnsemble& base, const SpikeSpec& spike) {
    if (spike.start_step < 0 || spike.width_steps < 0 ||
        spike.start_step + spike.width_steps > base.grid.num_steps)
        throw MisalignedSpike("spike window must be a whole-step interval inside [0, T]");
}

// Trace contraction (D^2_x g) y^2 from the variation equations: component i
// is Tr(Hess(g_i) y y^T).
Vec hessian_contract(const std::vector<Mat>& hess, const Vec& y) {
    Vec out(hess.size());
    for (size_t i = 0; i < hess.size(); ++i) out[i] = y.dot(hess[i] * y);
    return out;
}

}  // namespace

std::vector<Mat> spike_perturb(const PathEnsemble& base, const SpikeSpec& spike,
                               const ControlDomain& dom) {
    check_spike(base, spike);
    if (spike.width_steps > 0 && !dom.contains(spike.replacement))
        throw MisalignedSpike("spike replacement control is outside the control domain");
    std::vector<Mat> out = base.controls;
    for (int i = spike.start_step; i < spike.start_step + spike.width_steps; ++i)
        out[i].colwise() = spike.replacement;
    return out;
}

std::vector<Mat> simulate_first_variation(const ControlProblem& prob, const PathEnsemble& base,
                                          const SpikeSpec& spike) {
    check_spike(base, spike);
    const int N = base.grid.num_steps;
    const int M = base.num_paths;
    const int n = prob.dim_state;
    const int d = prob.dim_noise;
    const double h = base.grid.dt();

    std::vector<Mat> y(N + 1, Mat::Zero(n, M));
    parallel_for_chunks(0, M, [&](int lo, int hi, int) {
        for (int m = lo; m < hi; ++m) {
            Vec ym = Vec::Zero(n);
            for (int i = 0; i < N; ++i) {
                const double t = base.grid.node(i);
                const Vec x = base.state(i, m);
                const Vec u = base.control(i, m);
                const Mat A = prob.drift_dx(t, x, u);
                const auto B = prob.diffusion_dx(t, x, u);
                // drift-implicit substep, mirroring the state scheme
                Vec y_star = (Mat::Identity(n, n) - h * A).fullPivLu().solve(ym);
                Vec next = y_star;
                const Vec dW = base.increments[i].col(m);
                for (int j = 0; j < d; ++j) next += dW[j] * (B[j] * ym);
                if (spike.covers(i)) {
                    const Mat dsigma = prob.diffusion(t, x, spike.replacement) - prob.diffusion(t, x, u);
                    next += dsigma * dW;
                }
                ym = next;
                y[i + 1].col(m) = ym;
            }
        }
    });
    return y;
}

std::vector<Mat> simulate_second_variation(const ControlProblem& prob, const PathEnsemble& base,
                                           const SpikeSpec& spike, const std::vector<Mat>& y) {
    check_spike(base, spike);
    const int N = base.grid.num_steps;
    const int M = base.num_paths;
    const int n = prob.dim_state;
    const int d = prob.dim_noise;
    const double h = base.grid.dt();

    std::vector<Mat> z(N + 1, Mat::Zero(n, M));
    parallel_for_chunks(0, M, [&](int lo, int hi, int) {
        for (int m = lo; m < hi; ++m) {
            Vec zm = Vec::Zero(n);
            for (int i = 0; i < N; ++i) {
                const double t = base.grid.node(i);
                const Vec x = base.state(i, m);
                const Vec u = base.control(i, m);
                const Vec ym = y[i].col(m);
                const Mat A = prob.drift_dx(t, x, u);
                const auto B = prob.diffusion_dx(t, x, u);
                const auto Hb = prob.drift_dxx(t, x, u);

                Vec drift_force = 0.5 * hessian_contract(Hb, ym);
                if (spike.covers(i))
                    drift_force += prob.drift(t, x, spike.replacement) - prob.drift(t, x, u);

                Vec z_star = (Mat::Identity(n, n) - h * A).fullPivLu().solve(zm + h * drift_force);
                Vec next = z_star;
                const Vec dW = base.increments[i].col(m);
                const auto Hs = prob.diffusion_dxx(t, x, u);
                for (int j = 0; j < d; ++j) {
                    Vec noise_force = B[j] * zm + 0.5 * hessian_contract(Hs[j], ym);
                    if (spike.covers(i)) {
                        const auto B_spike = prob.diffusion_dx(t, x, spike.replacement);
                        noise_force += (B_spike[j] - B[j]) * ym;
                    }
                    next += dW[j] * noise_force;
                }
                zm = next;
                z[i + 1].col(m) = zm;
            }
        }
    });
    return z;
}

namespace {

struct SupMoment {
    double value = 0.0;
    double stderr_ = 0.0;
};

// sup over nodes of E |column|^{2k} for a per-node difference expression.
SupMoment sup_moment(const std::vector<Mat>& a, int two_k) {
    SupMoment out;
    const int nodes = static_cast<int>(a.size());
    const int M = static_cast<int>(a[0].cols());
    for (int i = 0; i < nodes; ++i) {
        RunningStat stat;
        for (int m = 0; m < M; ++m) stat.add(std::pow(a[i].col(m).squaredNorm(), two_k / 2.0));
        const auto r = stat.result();
        if (r.mean >= out.value) {
            out.value = r.mean;
            out.stderr_ = r.stderr_;
        }
    }
    return out;
}

std::vector<Mat> column_diff(const std::vector<Mat>& a, const std::vector<Mat>& b) {
    std::vector<Mat> out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

}  // namespace

ExpansionReport expansion_orders(const ControlProblem& prob, const PathEnsemble& base,
                                 const std::vector<int>& widths, int start_step, const Vec& w,
                                 int k, const ExpansionOptions& opts) {
    if (widths.size() < 2) throw std::invalid_argument("expansion_orders: need >= 2 spike widths");
    for (size_t i = 1; i < widths.size(); ++i)
        if (widths[i] >= widths[i - 1])
            throw std::invalid_argument("expansion_orders: widths must be strictly decreasing");

    ExpansionReport report;
    report.k = k;
    const int two_k = 2 * k;
    const char* names[5] = {"xi", "y", "z", "eta", "zeta"};
    std::vector<QuantityOrder> q(5);
    for (int i = 0; i < 5; ++i) q[i].name = names[i];

    for (int width : widths) {
        SpikeSpec spike{start_step, width, w};
        const auto controls = spike_perturb(base, spike, prob.control_domain);
        const PathEnsemble perturbed = simulate_with_increments(prob, base, controls, base.scheme);
        const auto y = simulate_first_variation(prob, base, spike);
        const auto z = simulate_second_variation(prob, base, spike, y);

        const auto xi = column_diff(perturbed.states, base.states);
        const auto eta = column_diff(xi, y);
        const auto zeta = column_diff(eta, z);
        const std::vector<const std::vector<Mat>*> quantities = {&xi, &y, &z, &eta, &zeta};

        const double eps = spike.width(base.grid);
        for (int iq = 0; iq < 5; ++iq) {
            const auto sm = sup_moment(*quantities[iq], two_k);
            q[iq].eps.push_back(eps);
            q[iq].sup_moment.push_back(sm.value);
            q[iq].sup_stderr.push_back(sm.stderr_);
        }
    }

    const double bands_lo[5] = {k - opts.band_delta, k - opts.band_delta, two_k - opts.band_delta,
                                two_k - opts.band_delta, two_k + opts.zeta_margin};
    for (int iq = 0; iq < 5; ++iq) {
        q[iq].fit = loglog_fit(q[iq].eps, q[iq].sup_moment, q[iq].sup_stderr);
        q[iq].pass = q[iq].fit.degenerate ? true : q[iq].fit.slope >= bands_lo[iq];
        if (!q[iq].fit.degenerate) {
            // below-noise guard: the smallest moments must clear the MC floor
            for (size_t p = 0; p < q[iq].sup_moment.size(); ++p)
                if (q[iq].sup_moment[p] > 0 && q[iq].sup_stderr[p] > 0.5 * q[iq].sup_moment[p])
                    throw InsufficientDecay("expansion_orders: moment of " + q[iq].name +
                                            " is below the Monte-Carlo noise floor; increase paths");
        }
    }
    report.quantities = std::move(q);
    return report;
}

MeanStderr cost(const ControlProblem& prob, const PathEnsemble& paths) {
    const int N = paths.grid.num_steps;
    const double h = paths.grid.dt();
    RunningStat stat;
    for (int m = 0; m < paths.num_paths; ++m) {
        double acc = 0.0;
        for (int i = 0; i < N; ++i)
            acc += h * prob.running_cost(paths.grid.node(i), paths.state(i, m), paths.control(i, m));
        acc += prob.terminal_cost(paths.state(N, m));
        stat.add(acc);
    }
    return stat.result();
}

CostExpansionReport cost_expansion_check(const ControlProblem& prob, const PathEnsemble& base,
                                         const std::vector<int>& widths, int start_step, const Vec& w) {
    CostExpansionReport report;
    const int N = base.grid.num_steps;
    const int M = base.num_paths;
    const double h = base.grid.dt();

    for (int width : widths) {
        SpikeSpec spike{start_step, width, w};
        const auto controls = spike_perturb(base, spike, prob.control_domain);
        const PathEnsemble perturbed = simulate_with_increments(prob, base, controls, base.scheme);
        const auto y = simulate_first_variation(prob, base, spike);
        const auto z = simulate_second_variation(prob, base, spike, y);

        RunningStat lhs_stat, rhs_stat, res_stat;
        for (int m = 0; m < M; ++m) {
            double lhs = 0.0, rhs = 0.0;
            for (int i = 0; i < N; ++i) {
                const double t = base.grid.node(i);
                const Vec x = base.state(i, m);
                const Vec u = base.control(i, m);
                lhs += h * (prob.running_cost(t, perturbed.state(i, m), perturbed.control(i, m)) -
                            prob.running_cost(t, x, u));
                const Vec fx = prob.running_cost_dx(t, x, u);
                const Mat fxx = prob.running_cost_dxx(t, x, u);
                const Vec ym = y[i].col(m);
                rhs += h * (fx.dot(ym + z[i].col(m)) + 0.5 * ym.dot(fxx * ym));
                if (spike.covers(i))
                    rhs += h * (prob.running_cost(t, x, spike.replacement) - prob.running_cost(t, x, u));
            }
            const Vec xT = base.state(N, m);
            lhs += prob.terminal_cost(perturbed.state(N, m)) - prob.terminal_cost(xT);
            const Vec yT = y[N].col(m);
            rhs += prob.terminal_cost_dx(xT).dot(yT + z[N].col(m)) +
                   0.5 * yT.dot(prob.terminal_cost_dxx(xT) * yT);
            lhs_stat.add(lhs);
            rhs_stat.add(rhs);
            res_stat.add(lhs - rhs);
        }

        CostExpansionPoint pt;
        pt.eps = spike.width(base.grid);
        pt.lhs = lhs_stat.result().mean;
        pt.rhs = rhs_stat.result().mean;
        pt.residual = std::abs(res_stat.result().mean);
        pt.residual_stderr = res_stat.result().stderr_;
        report.points.push_back(pt);
    }

    std::vector<double> eps, res, se;
    for (const auto& pt : report.points) {
        eps.push_back(pt.eps);
        res.push_back(pt.residual);
        se.push_back(pt.residual_stderr);
    }
    report.residual_fit = loglog_fit(eps, res, se);
    report.pass = report.residual_fit.degenerate || report.residual_fit.slope > 1.0;
    return report;
}

}  // namespace smpkit
