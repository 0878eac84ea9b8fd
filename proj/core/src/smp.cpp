#include "smpkit/smp.hpp"

#include <cmath>

#include "smpkit/fit.hpp"

namespace smpkit {

HamiltonianContext HamiltonianContext::at(const ControlProblem& prob, const PathEnsemble& base,
                                          const AdjointSolution& adj, int node, int path) {
    HamiltonianContext ctx;
    ctx.prob = &prob;
    ctx.t = base.grid.node(node);
    ctx.x = base.state(node, path);
    ctx.u_bar = base.control(std::min(node, base.grid.num_steps - 1), path);
    ctx.p = adj.p[node].col(path);
    ctx.q.resize(base.dim_state, base.dim_noise);
    int qnode = std::min(node, base.grid.num_steps - 1);
    for (int j = 0; j < base.dim_noise; ++j) ctx.q.col(j) = adj.q[qnode][j].col(path);
    if (adj.has_second()) ctx.P = adj.P_at(node, path, base.dim_state);
    return ctx;
}

double hamiltonian(const HamiltonianContext& ctx, const Vec& u) {
    const auto& prob = *ctx.prob;
    double H = ctx.p.dot(prob.drift(ctx.t, ctx.x, u));
    Mat sig = prob.diffusion(ctx.t, ctx.x, u);
    H += (ctx.q.transpose() * sig).trace();
    H -= prob.running_cost(ctx.t, ctx.x, u);
    return H;
}

double script_h(const HamiltonianContext& ctx, const Vec& u) {
    const auto& prob = *ctx.prob;
    double val = hamiltonian(ctx, u);
    if (ctx.P.size() == 0) return val;
    Mat sbar = prob.diffusion(ctx.t, ctx.x, ctx.u_bar);
    val -= 0.5 * (sbar.transpose() * ctx.P * sbar).trace();
    Mat ds = prob.diffusion(ctx.t, ctx.x, u) - sbar;
    val += 0.5 * (ds.transpose() * ctx.P * ds).trace();
    return val;
}

SMPReport smp_check(const ControlProblem& prob, const PathEnsemble& base,
                    const AdjointSolution& adj, const std::vector<Vec>& control_sample,
                    const SMPOptions& opts) {
    const int N = base.grid.num_steps;
    const int M = base.num_paths;

    SMPReport rep;
    rep.tol = opts.tol;
    if (rep.tol < 0.0) {
        // Auto tolerance: 3x the mean conditional-expectation residual of the
        // backward regressions — the dominant numerical error in (p, q, P).
        double res = 0.0;
        for (double r : adj.p_residual) res += r;
        res /= std::max<std::size_t>(1, adj.p_residual.size());
        double resP = 0.0;
        for (double r : adj.P_residual) resP += r;
        if (!adj.P_residual.empty()) resP /= adj.P_residual.size();
        rep.tol = 3.0 * (res + resP);
    }

    for (int i = 0; i < N; i += opts.node_stride) {
        for (int m = 0; m < M; m += opts.path_stride) {
            auto ctx = HamiltonianContext::at(prob, base, adj, i, m);
            double ref = script_h(ctx, ctx.u_bar);
            for (const Vec& u : control_sample) {
                double gap = script_h(ctx, u) - ref;
                ++rep.triples;
                if (gap > rep.tol) {
                    ++rep.violations;
                    if (gap > rep.worst.violation) {
                        rep.worst = SMPWitness{ctx.t, i, m, u, gap};
                    }
                }
            }
        }
    }
    rep.violation_fraction =
        rep.triples ? static_cast<double>(rep.violations) / rep.triples : 0.0;
    rep.pass = rep.violation_fraction <= opts.max_fraction;
    return rep;
}

SpikeInequalityReport spike_inequality_check(const ControlProblem& prob, const PathEnsemble& base,
                                             const AdjointSolution& adj,
                                             const std::vector<int>& widths, int start_step,
                                             const Vec& w, double tol) {
    const int M = base.num_paths;
    const double h = base.grid.dt();

    SpikeInequalityReport rep;
    rep.w = w;
    for (int ws : widths) {
        SpikeSpec spike{start_step, ws, w};
        if (start_step + ws > base.grid.num_steps)
            throw MisalignedSpike("spike window leaves the grid");
        double eps = std::max(ws * h, h);  // width 0 scored on one step's scale
        RunningStat stat;
        for (int m = 0; m < M; ++m) {
            double acc = 0.0;
            for (int i = start_step; i < start_step + ws; ++i) {
                auto ctx = HamiltonianContext::at(prob, base, adj, i, m);
                double dH = hamiltonian(ctx, w) - hamiltonian(ctx, ctx.u_bar);
                if (ctx.P.size() != 0) {
                    Mat ds = prob.diffusion(ctx.t, ctx.x, w) -
                             prob.diffusion(ctx.t, ctx.x, ctx.u_bar);
                    dH += 0.5 * (ds.transpose() * ctx.P * ds).trace();
                }
                acc += h * dH;
            }
            stat.add(acc);
        }
        auto ms = stat.result();
        rep.points.push_back({ws * h, ms.mean, ms.mean / eps, ms.stderr_ / eps});
    }

    // PASS when the eps-scaled value is non-positive within noise at the two
    // smallest widths.
    int np = static_cast<int>(rep.points.size());
    rep.pass = true;
    for (int i = std::max(0, np - 2); i < np; ++i) {
        const auto& pt = rep.points[i];
        if (!std::isfinite(pt.value_over_eps))
            throw InsufficientDecay("spike inequality value is non-finite");
        if (pt.value_over_eps > tol + 3.0 * pt.stderr_over_eps) rep.pass = false;
    }
    if (np > 0) {
        const auto& last = rep.points[np - 1];
        if (last.value_over_eps > 0.0 &&
            3.0 * last.stderr_over_eps > 10.0 * std::max(1e-12, std::abs(last.value_over_eps)) &&
            !rep.pass)
            throw InsufficientDecay("spike inequality sign unresolved at the smallest width");
    }
    return rep;
}

}  // namespace smpkit
