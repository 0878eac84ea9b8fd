#include "smpkit/domain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "smpkit/rng.hpp"

namespace smpkit {

namespace {

// min || sum_i w_i v_i - u ||^2 over the probability simplex, by projected
// gradient on the weights. The hulls we handle have a handful of vertices,
// so a fixed iteration budget is plenty.
Vec project_hull(const ConvexHull& hull, const Vec& u) {
    const int k = static_cast<int>(hull.vertices.size());
    if (k == 0) throw NonConvexDomain("project_control: empty ConvexHull");
    const int n = static_cast<int>(hull.vertices[0].size());
    Mat V(n, k);
    for (int i = 0; i < k; ++i) V.col(i) = hull.vertices[i];

    Vec w = Vec::Constant(k, 1.0 / k);
    const Mat G = V.transpose() * V;
    const Vec c = V.transpose() * u;
    const double lip = G.operatorNorm() + 1e-12;
    const double step = 1.0 / lip;

    auto simplex_project = [](Vec y) {
        // Euclidean projection onto the simplex (sort-based).
        const int m = static_cast<int>(y.size());
        std::vector<double> s(y.data(), y.data() + m);
        std::sort(s.begin(), s.end(), std::greater<double>());
        double cum = 0.0, theta = 0.0;
        int rho = 0;
        for (int i = 0; i < m; ++i) {
            cum += s[i];
            const double t = (cum - 1.0) / (i + 1);
            if (s[i] - t > 0.0) { rho = i + 1; theta = t; }
        }
        (void)rho;
        for (int i = 0; i < m; ++i) y[i] = std::max(0.0, y[i] - theta);
        return y;
    };

    for (int it = 0; it < 2000; ++it) {
        const Vec grad = G * w - c;
        const Vec w_next = simplex_project(w - step * grad);
        if ((w_next - w).lpNorm<Eigen::Infinity>() < 1e-14) { w = w_next; break; }
        w = w_next;
    }
    return V * w;
}

}  // namespace

bool ControlDomain::contains(const Vec& u, double tol) const {
    if (u.size() != dim_u) return false;
    if (const auto* fs = std::get_if<FiniteSet>(&geometry)) {
        for (const auto& p : fs->points)
            if ((p - u).lpNorm<Eigen::Infinity>() <= tol) return true;
        return false;
    }
    if (const auto* box = std::get_if<Box>(&geometry)) {
        for (int i = 0; i < dim_u; ++i)
            if (u[i] < box->lower[i] - tol || u[i] > box->upper[i] + tol) return false;
        return true;
    }
    const auto& hull = std::get<ConvexHull>(geometry);
    return (project_hull(hull, u) - u).norm() <= tol * (1.0 + u.norm());
}

Vec ControlDomain::sample(std::uint64_t seed, std::uint64_t key) const {
    CounterRng rng(seed ^ 0x5eedc0ffeeULL);
    if (const auto* fs = std::get_if<FiniteSet>(&geometry)) {
        if (fs->points.empty()) throw NonConvexDomain("FiniteSet is empty");
        const auto idx = static_cast<size_t>(rng.uniform(key, 0, 0) * fs->points.size());
        return fs->points[std::min(idx, fs->points.size() - 1)];
    }
    if (const auto* box = std::get_if<Box>(&geometry)) {
        Vec u(dim_u);
        for (int i = 0; i < dim_u; ++i)
            u[i] = box->lower[i] + rng.uniform(key, 1, i) * (box->upper[i] - box->lower[i]);
        return u;
    }
    const auto& hull = std::get<ConvexHull>(geometry);
    const int k = static_cast<int>(hull.vertices.size());
    Vec w(k);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        w[i] = -std::log(1.0 - rng.uniform(key, 2, i) + 1e-300);
        total += w[i];
    }
    Vec u = Vec::Zero(dim_u);
    for (int i = 0; i < k; ++i) u += (w[i] / total) * hull.vertices[i];
    return u;
}

std::vector<Vec> ControlDomain::sample_grid(int per_coordinate) const {
    std::vector<Vec> out;
    if (const auto* fs = std::get_if<FiniteSet>(&geometry)) {
        out = fs->points;
        return out;
    }
    if (const auto* box = std::get_if<Box>(&geometry)) {
        const int m = std::max(2, per_coordinate);
        std::vector<Vec> acc{Vec(dim_u)};
        for (int c = 0; c < dim_u; ++c) {
            std::vector<Vec> next;
            for (const auto& partial : acc) {
                for (int g = 0; g < m; ++g) {
                    Vec v = partial;
                    v[c] = box->lower[c] + (box->upper[c] - box->lower[c]) * g / (m - 1);
                    next.push_back(v);
                }
            }
            acc.swap(next);
        }
        return acc;
    }
    const auto& hull = std::get<ConvexHull>(geometry);
    out = hull.vertices;
    for (size_t i = 0; i < hull.vertices.size(); ++i)
        for (size_t j = i + 1; j < hull.vertices.size(); ++j)
            out.push_back(0.5 * (hull.vertices[i] + hull.vertices[j]));
    return out;
}

Vec project_control(const ControlDomain& dom, const Vec& u) {
    if (u.size() != dom.dim_u)
        throw std::invalid_argument("project_control: control dimension mismatch");
    if (const auto* box = std::get_if<Box>(&dom.geometry)) {
        Vec out(u.size());
        for (int i = 0; i < u.size(); ++i)
            out[i] = std::min(box->upper[i], std::max(box->lower[i], u[i]));
        return out;
    }
    if (const auto* hull = std::get_if<ConvexHull>(&dom.geometry))
        return project_hull(*hull, u);
    throw NonConvexDomain("project_control: FiniteSet has no Euclidean projection");
}

}  // namespace smpkit
