#include "smpkit/lq.hpp"

#include <cmath>

#include "smpkit/domain.hpp"

namespace smpkit {
namespace {

struct RiccatiState {
    Mat S;
    Vec g;
    double r = 0.0;
};

RiccatiState deriv(const LQSpec& spec, const RiccatiState& X) {
    const int d = spec.d();
    Mat Rt = spec.R;
    for (int j = 0; j < d; ++j) Rt += spec.C[j].transpose() * X.S * spec.C[j];
    Eigen::LLT<Mat> llt(Rt);
    Vec m = spec.B.transpose() * X.g;
    for (int j = 0; j < d; ++j) m += spec.C[j].transpose() * X.S * spec.Sigma0[j];

    RiccatiState D;
    Mat SB = X.S * spec.B;
    D.S = -(spec.A.transpose() * X.S + X.S * spec.A + spec.Q -
            SB * llt.solve(SB.transpose()));
    D.g = -(spec.A.transpose() * X.g - SB * llt.solve(m));
    double diff = 0.0;
    for (int j = 0; j < d; ++j) diff += spec.Sigma0[j].dot(X.S * spec.Sigma0[j]);
    D.r = -(0.5 * diff - 0.5 * m.dot(llt.solve(m)));
    return D;
}

RiccatiState axpy(const RiccatiState& X, double a, const RiccatiState& D) {
    return {X.S + a * D.S, X.g + a * D.g, X.r + a * D.r};
}

RiccatiState rk4_step(const LQSpec& spec, const RiccatiState& X, double h) {
    auto k1 = deriv(spec, X);
    auto k2 = deriv(spec, axpy(X, h / 2, k1));
    auto k3 = deriv(spec, axpy(X, h / 2, k2));
    auto k4 = deriv(spec, axpy(X, h, k3));
    RiccatiState out = X;
    out.S += (h / 6) * (k1.S + 2 * k2.S + 2 * k3.S + k4.S);
    out.g += (h / 6) * (k1.g + 2 * k2.g + 2 * k3.g + k4.g);
    out.r += (h / 6) * (k1.r + 2 * k2.r + 2 * k3.r + k4.r);
    return out;
}

RiccatiSolution integrate(const LQSpec& spec, const TimeGrid& grid, int refine) {
    const int N = grid.num_steps;
    const int n = spec.n();
    const double hf = -grid.dt() / refine;  // backward in time

    RiccatiSolution sol;
    sol.grid = grid;
    sol.S.assign(N + 1, Mat::Zero(n, n));
    sol.g.assign(N + 1, Vec::Zero(n));
    sol.r.assign(N + 1, 0.0);
    sol.K.resize(N + 1);
    sol.k.resize(N + 1);

    RiccatiState X{spec.G, Vec::Zero(n), 0.0};
    for (int i = N; i >= 0; --i) {
        sol.S[i] = 0.5 * (X.S + X.S.transpose());
        sol.g[i] = X.g;
        sol.r[i] = X.r;
        Mat Rt = spec.R;
        for (int j = 0; j < spec.d(); ++j)
            Rt += spec.C[j].transpose() * sol.S[i] * spec.C[j];
        Eigen::LLT<Mat> llt(Rt);
        Vec m = spec.B.transpose() * sol.g[i];
        for (int j = 0; j < spec.d(); ++j)
            m += spec.C[j].transpose() * sol.S[i] * spec.Sigma0[j];
        sol.K[i] = llt.solve(spec.B.transpose() * sol.S[i]);
        sol.k[i] = llt.solve(m);
        if (i > 0)
            for (int s = 0; s < refine; ++s) X = rk4_step(spec, X, hf);
    }
    return sol;
}

}  // namespace

ControlProcess RiccatiSolution::feedback() const {
    auto g2 = grid;
    auto K2 = K;
    auto k2 = k;
    return ControlProcess::feedback([g2, K2, k2](double t, const Vec& x) -> Vec {
        int i = static_cast<int>(std::lround(t / g2.dt()));
        i = std::min(std::max(i, 0), g2.num_steps);
        return -K2[i] * x - k2[i];
    });
}

RiccatiSolution riccati_solve(const LQSpec& spec, const TimeGrid& grid, int refine) {
    refine = std::max(refine, 4);
    RiccatiSolution coarse = integrate(spec, grid, refine);
    RiccatiSolution fine = integrate(spec, grid, 2 * refine);
    double diff = 0.0;
    for (int i = 0; i <= grid.num_steps; ++i)
        diff = std::max(diff, (coarse.S[i] - fine.S[i]).cwiseAbs().maxCoeff());
    if (diff > 1e-6)
        throw StiffnessWarning("Riccati refinement still moves S by " + std::to_string(diff));
    return fine;
}

ControlProblem make_lq_problem(const LQSpec& spec) {
    const int n = spec.n();
    const int d = spec.d();
    const int du = spec.dim_u();

    ControlProblem prob;
    prob.dim_state = n;
    prob.dim_noise = d;
    prob.initial_state = spec.x0;
    prob.horizon = spec.T;

    prob.drift = [spec](double, const Vec& x, const Vec& u) -> Vec {
        return spec.A * x + spec.B * u;
    };
    prob.drift_dx = [spec](double, const Vec&, const Vec&) -> Mat { return spec.A; };
    prob.drift_dxx = [n](double, const Vec&, const Vec&) {
        return std::vector<Mat>(n, Mat::Zero(n, n));
    };
    prob.diffusion = [spec, n, d](double, const Vec&, const Vec& u) -> Mat {
        Mat s(n, d);
        for (int j = 0; j < d; ++j) s.col(j) = spec.Sigma0[j] + spec.C[j] * u;
        return s;
    };
    prob.diffusion_dx = [n, d](double, const Vec&, const Vec&) {
        return std::vector<Mat>(d, Mat::Zero(n, n));
    };
    prob.diffusion_dxx = [n, d](double, const Vec&, const Vec&) {
        return std::vector<std::vector<Mat>>(d, std::vector<Mat>(n, Mat::Zero(n, n)));
    };
    prob.running_cost = [spec](double, const Vec& x, const Vec& u) {
        return 0.5 * x.dot(spec.Q * x) + 0.5 * u.dot(spec.R * u);
    };
    prob.running_cost_dx = [spec](double, const Vec& x, const Vec&) -> Vec {
        return spec.Q * x;
    };
    prob.running_cost_dxx = [spec](double, const Vec&, const Vec&) -> Mat { return spec.Q; };
    prob.terminal_cost = [spec](const Vec& x) { return 0.5 * x.dot(spec.G * x); };
    prob.terminal_cost_dx = [spec](const Vec& x) -> Vec { return spec.G * x; };
    prob.terminal_cost_dxx = [spec](const Vec&) -> Mat { return spec.G; };

    // One-sided Lipschitz constant of the linear drift.
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (spec.A + spec.A.transpose()));
    prob.dissipativity_alpha = es.eigenvalues().maxCoeff();
    prob.diffusion_lipschitz = 0.0;
    prob.growth = GrowthExponents{1, 0, 2, 2};

    ControlDomain dom;
    dom.dim_u = du;
    dom.geometry = Box{spec.u_lo, spec.u_hi};
    dom.drift_du = [spec](double, const Vec&, const Vec&) -> Mat { return spec.B; };
    dom.diffusion_du = [spec](double, const Vec&, const Vec&) { return spec.C; };
    dom.running_cost_du = [spec](double, const Vec&, const Vec& u) -> Vec {
        return spec.R * u;
    };
    prob.control_domain = dom;
    return prob;
}

}  // namespace smpkit
