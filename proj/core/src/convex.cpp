#include "smpkit/convex.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "smpkit/fit.hpp"
#include "smpkit/parallel.hpp"
#include "smpkit/rng.hpp"
#include "smpkit/variation.hpp"

namespace smpkit {
namespace {

void require_control_derivatives(const ControlProblem& prob) {
    if (!prob.control_domain.has_control_derivatives())
        throw MissingControlDerivatives(
            "control-coefficient derivatives (D_u b, D_u sigma, D_u f) are required here");
}

}  // namespace

DirectionProcess constant_direction(const PathEnsemble& base, const Vec& v) {
    DirectionProcess out(base.grid.num_steps);
    for (auto& blk : out) blk = v.replicate(1, base.num_paths);
    return out;
}

std::vector<Mat> gradient_process(const ControlProblem& prob, const PathEnsemble& base,
                                  const AdjointSolution& adj) {
    require_control_derivatives(prob);
    const auto& dom = prob.control_domain;
    const int N = base.grid.num_steps;
    const int M = base.num_paths;
    std::vector<Mat> G(N, Mat::Zero(dom.dim_u, M));
    parallel_for_chunks(0, M, [&](int lo, int hi, int) {
        for (int m = lo; m < hi; ++m) {
            for (int i = 0; i < N; ++i) {
                double t = base.grid.node(i);
                Vec x = base.state(i, m);
                Vec u = base.control(i, m);
                Vec g = dom.running_cost_du(t, x, u);
                g -= dom.drift_du(t, x, u).transpose() * adj.p[i].col(m);
                auto sdu = dom.diffusion_du(t, x, u);
                for (int j = 0; j < base.dim_noise; ++j)
                    g -= sdu[j].transpose() * adj.q[i][j].col(m);
                G[i].col(m) = g;
                if (!g.allFinite()) throw NonFiniteState("gradient process non-finite");
            }
        }
    });
    return G;
}

std::vector<Mat> simulate_linearized_state(const ControlProblem& prob, const PathEnsemble& base,
                                           const DirectionProcess& v) {
    require_control_derivatives(prob);
    const auto& dom = prob.control_domain;
    const int n = base.dim_state;
    const int d = base.dim_noise;
    const int N = base.grid.num_steps;
    const int M = base.num_paths;
    const double h = base.grid.dt();

    std::vector<Mat> y(N + 1, Mat::Zero(n, M));
    parallel_for_chunks(0, M, [&](int lo, int hi, int) {
        for (int m = lo; m < hi; ++m) {
            for (int i = 0; i < N; ++i) {
                double t = base.grid.node(i);
                Vec x = base.state(i, m);
                Vec u = base.control(i, m);
                Mat A = prob.drift_dx(t, x, u);
                Vec ym = y[i].col(m);
                Vec vm = v[i].col(m);
                // Implicit in the homogeneous drift, explicit forcing/noise at
                // the left endpoint — the linearization of the forward scheme.
                Vec rhs = ym + h * dom.drift_du(t, x, u) * vm;
                auto Bs = prob.diffusion_dx(t, x, u);
                auto sdu = dom.diffusion_du(t, x, u);
                for (int j = 0; j < d; ++j)
                    rhs += (Bs[j] * ym + sdu[j] * vm) * base.increments[i](j, m);
                y[i + 1].col(m) =
                    (Mat::Identity(n, n) - h * A).fullPivLu().solve(rhs);
                if (!y[i + 1].col(m).allFinite())
                    throw NonFiniteState("linearized state non-finite");
            }
        }
    });
    return y;
}

GateauxValue gateaux_derivative(const ControlProblem& prob, const PathEnsemble& base,
                                const DirectionProcess& v, const AdjointSolution* adj,
                                bool adjoint_free) {
    require_control_derivatives(prob);
    const int N = base.grid.num_steps;
    const int M = base.num_paths;
    const double h = base.grid.dt();
    RunningStat stat;

    if (adjoint_free) {
        auto y = simulate_linearized_state(prob, base, v);
        const auto& dom = prob.control_domain;
        for (int m = 0; m < M; ++m) {
            double xi = 0.0;
            for (int i = 0; i < N; ++i) {
                double t = base.grid.node(i);
                Vec x = base.state(i, m);
                Vec u = base.control(i, m);
                xi += h * (prob.running_cost_dx(t, x, u).dot(y[i].col(m)) +
                           dom.running_cost_du(t, x, u).dot(v[i].col(m)));
            }
            double val = prob.terminal_cost_dx(base.state(N, m)).dot(y[N].col(m)) + xi;
            stat.add(val);
        }
    } else {
        if (!adj) throw Error("adjoint-based Gateaux mode needs an adjoint solution");
        auto G = gradient_process(prob, base, *adj);
        for (int m = 0; m < M; ++m) {
            double val = 0.0;
            for (int i = 0; i < N; ++i) val += h * G[i].col(m).dot(v[i].col(m));
            stat.add(val);
        }
    }
    auto ms = stat.result();
    return {ms.mean, ms.stderr_};
}

SMPReport variational_inequality_check(const ControlProblem& prob, const PathEnsemble& base,
                                       const AdjointSolution& adj,
                                       const std::vector<Vec>& control_sample,
                                       const SMPOptions& opts) {
    auto G = gradient_process(prob, base, adj);  // G = -dH/du
    const int N = base.grid.num_steps;
    const int M = base.num_paths;

    SMPReport rep;
    rep.tol = opts.tol;
    if (rep.tol < 0.0) {
        double res = 0.0;
        for (double r : adj.p_residual) res += r;
        res /= std::max<std::size_t>(1, adj.p_residual.size());
        rep.tol = 3.0 * res;
    }
    for (int i = 0; i < N; i += opts.node_stride) {
        for (int m = 0; m < M; m += opts.path_stride) {
            Vec u_bar = base.control(i, m);
            for (const Vec& u : control_sample) {
                // <dH/du, u - u_bar> = -<G, u - u_bar> <= tol
                double gap = -G[i].col(m).dot(u - u_bar);
                ++rep.triples;
                if (gap > rep.tol) {
                    ++rep.violations;
                    if (gap > rep.worst.violation)
                        rep.worst = SMPWitness{base.grid.node(i), i, m, u, gap};
                }
            }
        }
    }
    rep.violation_fraction =
        rep.triples ? static_cast<double>(rep.violations) / rep.triples : 0.0;
    rep.pass = rep.violation_fraction <= opts.max_fraction;
    return rep;
}

OptimizeResult projected_gradient_descent(const ControlProblem& prob,
                                          const ControlProcess& initial,
                                          const OptimizeOptions& opts) {
    require_control_derivatives(prob);
    const auto& dom = prob.control_domain;
    if (!dom.is_convex()) throw NonConvexDomain("gradient optimization needs a convex domain");

    // Materialize the initial control as a pathwise table on the common
    // random numbers, then iterate on the table.
    PathEnsemble paths = simulate(prob, initial, opts.grid, opts.num_paths, opts.seed,
                                  opts.scheme);
    std::vector<Mat> table = paths.controls;

    OptimizeResult res;
    double rho = opts.rho;
    double best = std::numeric_limits<double>::infinity();
    int uphill = 0;
    int halvings = 0;

    for (int it = 0; it <= opts.iters; ++it) {
        paths = simulate_with_increments(prob, paths, table, opts.scheme);
        auto J = cost(prob, paths);
        auto adj = solve_first_adjoint(prob, paths, opts.basis, opts.ridge);
        auto G = gradient_process(prob, paths, adj);

        double gnorm = 0.0;
        for (const auto& blk : G) gnorm += blk.squaredNorm();
        gnorm = std::sqrt(gnorm * paths.grid.dt() / paths.num_paths);
        res.trace.push_back({it, J.mean, J.stderr_, gnorm, rho});

        if (J.mean > best + 2.0 * J.stderr_) {
            if (++uphill >= opts.divergence_patience) {
                if (halvings >= opts.max_halvings)
                    throw Divergence("cost kept increasing after step-size halvings");
                rho *= 0.5;
                ++halvings;
                uphill = 0;
            }
        } else {
            uphill = 0;
            best = std::min(best, J.mean);
        }
        if (it == opts.iters) break;

        for (int i = 0; i < paths.grid.num_steps; ++i) {
            for (int m = 0; m < paths.num_paths; ++m) {
                Vec u = table[i].col(m) - rho * G[i].col(m);
                table[i].col(m) = project_control(dom, u);
            }
        }
    }

    res.control = table;
    res.final_paths = simulate_with_increments(prob, paths, table, opts.scheme);
    auto adj = solve_first_adjoint(prob, res.final_paths, opts.basis, opts.ridge);
    SMPOptions vi_opts;
    vi_opts.path_stride = std::max(1, opts.num_paths / 64);
    res.final_vi = variational_inequality_check(prob, res.final_paths, adj,
                                                dom.sample_grid(5), vi_opts);
    return res;
}

SufficiencyReport sufficiency_check(const ControlProblem& prob, const PathEnsemble& base,
                                    const AdjointSolution& adj, int samples,
                                    std::uint64_t seed, double tol) {
    SufficiencyReport rep;
    CounterRng rng{seed};
    const int n = base.dim_state;
    const int N = base.grid.num_steps;
    const int M = base.num_paths;

    // (i) terminal-cost convexity: Hessian eigenvalues at sampled states.
    rep.terminal_min_eig = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        int m = static_cast<int>(rng.uniform(s, 0, 0) * M) % M;
        Vec x = base.state(N, m);
        for (int c = 0; c < n; ++c) x(c) += rng.normal(s, 1, c);
        Mat Hh = prob.terminal_cost_dxx(x);
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Hh + Hh.transpose()));
        double mineig = es.eigenvalues().minCoeff();
        if (mineig < rep.terminal_min_eig) {
            rep.terminal_min_eig = mineig;
            if (mineig < -tol) rep.witness = "terminal Hessian eigenvalue " +
                                            std::to_string(mineig) + " at sampled state";
        }
    }
    rep.terminal_convex = rep.terminal_min_eig >= -tol;

    // (ii) midpoint concavity of H(t, ., ., p, q) on random segments.
    rep.worst_concavity_gap = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        int i = static_cast<int>(rng.uniform(s, 2, 0) * N) % N;
        int m = static_cast<int>(rng.uniform(s, 3, 0) * M) % M;
        auto ctx = HamiltonianContext::at(prob, base, adj, i, m);
        Vec x1 = ctx.x, x2 = ctx.x;
        for (int c = 0; c < n; ++c) {
            x1(c) += rng.normal(s, 4, c);
            x2(c) += rng.normal(s, 5, c);
        }
        Vec u1 = prob.control_domain.sample(seed, 2 * s);
        Vec u2 = prob.control_domain.sample(seed, 2 * s + 1);
        auto eval = [&](const Vec& x, const Vec& u) {
            HamiltonianContext c2 = ctx;
            c2.x = x;
            return hamiltonian(c2, u);
        };
        double mid = eval(0.5 * (x1 + x2), 0.5 * (u1 + u2));
        double gap = 0.5 * (eval(x1, u1) + eval(x2, u2)) - mid;  // > 0 breaks concavity
        if (gap > rep.worst_concavity_gap) {
            rep.worst_concavity_gap = gap;
            if (gap > tol)
                rep.witness = "midpoint concavity gap " + std::to_string(gap) +
                              " at node " + std::to_string(i);
        }
    }
    rep.hamiltonian_concave = rep.worst_concavity_gap <= tol;

    // (iii) maximality along the candidate pair.
    SMPOptions opts;
    opts.path_stride = std::max(1, M / 64);
    auto smp = smp_check(prob, base, adj, prob.control_domain.sample_grid(5), opts);
    rep.maximality = smp.pass;
    rep.violation_fraction = smp.violation_fraction;

    rep.pass = rep.terminal_convex && rep.hamiltonian_concave && rep.maximality;
    return rep;
}

}  // namespace smpkit
