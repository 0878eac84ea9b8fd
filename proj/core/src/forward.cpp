#include "smpkit/forward.hpp"

#include <cmath>

#include "smpkit/parallel.hpp"
#include "smpkit/rng.hpp"

namespace smpkit {

const char* scheme_name(Scheme s) {
    return s == Scheme::ExplicitEuler ? "explicit" : "implicit";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "explicit") return Scheme::ExplicitEuler;
    if (name == "implicit") return Scheme::SplitStepImplicitDrift;
    throw ConfigError("unknown scheme '" + name + "' (expected explicit|implicit)");
}

ControlProcess ControlProcess::constant(const Vec& u, int num_steps) {
    Mat values(u.size(), num_steps);
    values.colwise() = u;
    return ControlProcess{DeterministicControl{std::move(values)}};
}

ControlProcess ControlProcess::deterministic(Mat values) {
    return ControlProcess{DeterministicControl{std::move(values)}};
}

ControlProcess ControlProcess::feedback(std::function<Vec(double, const Vec&)> policy) {
    return ControlProcess{FeedbackControl{std::move(policy)}};
}

ControlProcess ControlProcess::pathwise(std::vector<Mat> values) {
    return ControlProcess{PathwiseControl{std::move(values)}};
}

Vec ControlProcess::value(int step, double t, const Vec& x, int path) const {
    if (const auto* det = std::get_if<DeterministicControl>(&impl)) return det->values.col(step);
    if (const auto* fb = std::get_if<FeedbackControl>(&impl)) return fb->policy(t, x);
    return std::get<PathwiseControl>(impl).values[step].col(path);
}

Vec implicit_drift_step(const ControlProblem& prob, double t, const Vec& x, const Vec& u, double h) {
    if (h * std::max(prob.dissipativity_alpha, 0.0) >= 1.0)
        throw std::invalid_argument("implicit_drift_step: requires h * max(alpha, 0) < 1");
    const int n = prob.dim_state;
    Vec y = x;  // previous state is the natural initial guess
    auto residual = [&](const Vec& z) -> Vec { return z - x - h * prob.drift(t, z, u); };
    Vec r = residual(y);
    double rn = r.norm();
    for (int it = 0; it < 50; ++it) {
        if (rn <= 1e-12 * (1.0 + y.norm())) return y;
        const Mat J = Mat::Identity(n, n) - h * prob.drift_dx(t, y, u);
        const Vec step = J.fullPivLu().solve(-r);
        // Backtrack along the Newton direction; the residual is monotone in
        // the dissipative case, so a short line search always makes progress.
        double lambda = 1.0;
        bool improved = false;
        for (int ls = 0; ls < 40; ++ls) {
            const Vec y_try = y + lambda * step;
            const Vec r_try = residual(y_try);
            if (r_try.allFinite() && r_try.norm() < rn) {
                y = y_try;
                r = r_try;
                rn = r.norm();
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) throw NewtonDivergence("implicit_drift_step: no descent direction found");
    }
    if (rn <= 1e-10 * (1.0 + y.norm())) return y;
    throw NewtonDivergence("implicit_drift_step: iteration cap exceeded");
}

namespace {

void simulate_paths(const ControlProblem& prob, const ControlProcess& ctrl, Scheme scheme,
                    PathEnsemble& ens, bool generate_noise) {
    const TimeGrid& grid = ens.grid;
    const int N = grid.num_steps;
    const double h = grid.dt();
    const int n = prob.dim_state;
    const int d = prob.dim_noise;
    const double sqrt_h = std::sqrt(h);
    const CounterRng rng(ens.seed);

    if (scheme == Scheme::SplitStepImplicitDrift &&
        grid.dt() * std::max(prob.dissipativity_alpha, 0.0) >= 1.0)
        throw std::invalid_argument("simulate: split-step scheme requires h * max(alpha, 0) < 1");

    std::vector<std::string> chunk_error(64);
    parallel_for_chunks(0, ens.num_paths, [&](int lo, int hi, int chunk) {
        try {
            for (int m = lo; m < hi; ++m) {
                Vec x = prob.initial_state;
                ens.states[0].col(m) = x;
                for (int i = 0; i < N; ++i) {
                    const double t = grid.node(i);
                    if (generate_noise)
                        for (int j = 0; j < d; ++j)
                            ens.increments[i](j, m) = sqrt_h * rng.normal(m, i, j);
                    const Vec u = ctrl.value(i, t, x, m);
                    ens.controls[i].col(m) = u;
                    Vec x_star;
                    if (scheme == Scheme::ExplicitEuler)
                        x_star = x + h * prob.drift(t, x, u);
                    else
                        x_star = implicit_drift_step(prob, t, x, u, h);
                    const Vec x_next = x_star + prob.diffusion(t, x, u) * ens.increments[i].col(m);
                    if (!x_next.allFinite())
                        throw NonFiniteState("simulate: non-finite state at step " + std::to_string(i + 1) +
                                             ", path " + std::to_string(m) +
                                             (scheme == Scheme::ExplicitEuler
                                                  ? " (explicit Euler blew up; try the implicit scheme)"
                                                  : ""));
                    x = x_next;
                    ens.states[i + 1].col(m) = x;
                }
            }
        } catch (const Error& e) {
            chunk_error[chunk] = e.what();
        }
    });
    for (const auto& msg : chunk_error) {
        if (msg.empty()) continue;
        if (msg.find("non-finite") != std::string::npos) throw NonFiniteState(msg);
        throw NewtonDivergence(msg);
    }
}

}  // namespace

PathEnsemble simulate(const ControlProblem& prob, const ControlProcess& ctrl, const TimeGrid& grid,
                      int num_paths, std::uint64_t seed, Scheme scheme) {
    PathEnsemble ens;
    ens.grid = grid;
    ens.num_paths = num_paths;
    ens.dim_state = prob.dim_state;
    ens.dim_noise = prob.dim_noise;
    ens.dim_u = prob.dim_u();
    ens.seed = seed;
    ens.scheme = scheme;
    ens.states.assign(grid.num_steps + 1, Mat::Zero(prob.dim_state, num_paths));
    ens.increments.assign(grid.num_steps, Mat::Zero(prob.dim_noise, num_paths));
    ens.controls.assign(grid.num_steps, Mat::Zero(prob.dim_u(), num_paths));
    simulate_paths(prob, ctrl, scheme, ens, /*generate_noise=*/true);
    return ens;
}

PathEnsemble simulate_with_increments(const ControlProblem& prob, const PathEnsemble& base,
                                      const std::vector<Mat>& controls, Scheme scheme) {
    PathEnsemble ens;
    ens.grid = base.grid;
    ens.num_paths = base.num_paths;
    ens.dim_state = prob.dim_state;
    ens.dim_noise = prob.dim_noise;
    ens.dim_u = prob.dim_u();
    ens.seed = base.seed;
    ens.scheme = scheme;
    ens.states.assign(base.grid.num_steps + 1, Mat::Zero(prob.dim_state, base.num_paths));
    ens.increments = base.increments;
    ens.controls.assign(base.grid.num_steps, Mat::Zero(prob.dim_u(), base.num_paths));
    ControlProcess ctrl = ControlProcess::pathwise(controls);
    simulate_paths(prob, ctrl, scheme, ens, /*generate_noise=*/false);
    return ens;
}

MomentReport moment_estimate(const PathEnsemble& paths, double p) {
    if (p < 1.0) throw std::invalid_argument("moment_estimate: p >= 1 required");
    MomentReport rep;
    rep.order = p;
    const int N = paths.grid.num_steps;
    const int M = paths.num_paths;
    rep.node_estimate.resize(N + 1);
    rep.node_stderr.resize(N + 1);
    for (int i = 0; i <= N; ++i) {
        double mean = 0.0, m2 = 0.0;
        for (int m = 0; m < M; ++m) {
            const double v = std::pow(paths.states[i].col(m).norm(), p);
            if (!std::isfinite(v)) throw NonFiniteState("moment_estimate: non-finite sample");
            const double delta = v - mean;
            mean += delta / (m + 1);
            m2 += delta * (v - mean);
        }
        rep.node_estimate[i] = mean;
        rep.node_stderr[i] = M > 1 ? std::sqrt(m2 / (M - 1) / M) : 0.0;
        if (mean >= rep.sup) {
            rep.sup = mean;
            rep.sup_stderr = rep.node_stderr[i];
            rep.sup_node = i;
        }
    }
    return rep;
}

}  // namespace smpkit
