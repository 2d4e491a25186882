#include "oracle.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hipbot::oracle {
namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

}  // namespace

double transportation_lp_optimum(const Eigen::MatrixXd& cost, const Eigen::VectorXd& a,
                                 const Eigen::VectorXd& b) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    if (n < 1 || m < 1 || a.size() != n || b.size() != m)
        throw std::invalid_argument("transportation_lp_optimum: bad shapes");
    if (n * m > 25)
        throw std::invalid_argument("transportation_lp_optimum: instance too large to enumerate");
    if ((a.array() < 0).any() || (b.array() < 0).any())
        throw std::invalid_argument("transportation_lp_optimum: negative marginals");
    if (std::abs(a.sum() - b.sum()) > 1e-9 * std::max(1.0, a.sum()))
        throw std::invalid_argument("transportation_lp_optimum: unequal total mass");

    const int cells = n * m;
    const int basis = n + m - 1;
    std::vector<int> pick(basis);
    std::iota(pick.begin(), pick.end(), 0);
    double best = std::numeric_limits<double>::infinity();

    std::vector<std::vector<std::pair<int, int>>> adjacency(n + m);  // node -> (edge id, other node)
    std::vector<double> need(n + m), flow(basis);
    std::vector<int> degree(n + m), stack;

    auto evaluate = [&]() {
        UnionFind uf(n + m);
        for (int e = 0; e < basis; ++e) {
            const int i = pick[e] / m;
            const int j = n + pick[e] % m;
            if (!uf.unite(i, j)) return;  // cycle: not a basis
        }
        for (auto& adj : adjacency) adj.clear();
        for (int e = 0; e < basis; ++e) {
            const int i = pick[e] / m;
            const int j = n + pick[e] % m;
            adjacency[i].push_back({e, j});
            adjacency[j].push_back({e, i});
        }
        for (int v = 0; v < n + m; ++v) {
            need[v] = v < n ? a[v] : b[v - n];
            degree[v] = static_cast<int>(adjacency[v].size());
        }
        std::vector<char> edge_done(basis, 0);
        stack.clear();
        for (int v = 0; v < n + m; ++v)
            if (degree[v] == 1) stack.push_back(v);
        int assigned = 0;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            if (degree[v] != 1) continue;
            for (const auto& [e, other] : adjacency[v]) {
                if (edge_done[e]) continue;
                flow[e] = need[v];
                edge_done[e] = 1;
                ++assigned;
                need[v] = 0;
                need[other] -= flow[e];
                --degree[v];
                --degree[other];
                if (degree[other] == 1) stack.push_back(other);
                break;
            }
        }
        if (assigned != basis) return;  // should not happen for a tree
        double total = 0;
        for (int e = 0; e < basis; ++e) {
            if (flow[e] < -1e-9) return;  // infeasible vertex
            total += std::max(flow[e], 0.0) * cost(pick[e] / m, pick[e] % m);
        }
        best = std::min(best, total);
    };

    // Iterate over all cell subsets of size n+m-1 in lexicographic order.
    while (true) {
        evaluate();
        int k = basis - 1;
        while (k >= 0 && pick[k] == cells - basis + k) --k;
        if (k < 0) break;
        ++pick[k];
        for (int t = k + 1; t < basis; ++t) pick[t] = pick[t - 1] + 1;
    }
    if (!std::isfinite(best))
        throw std::runtime_error("transportation_lp_optimum: no feasible vertex found");
    return best;
}

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double tol) {
    if (!(lo < hi)) throw std::invalid_argument("golden_section_minimize: empty interval");
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

Eigen::VectorXd minimize_weighted_quadratics(const std::vector<Eigen::MatrixXd>& metrics,
                                             const std::vector<Eigen::VectorXd>& forces,
                                             const std::vector<double>& weights, double grad_tol,
                                             int max_iterations) {
    if (metrics.empty() || metrics.size() != forces.size() || metrics.size() != weights.size())
        throw std::invalid_argument("minimize_weighted_quadratics: bad inputs");
    const Eigen::Index dim = forces[0].size();
    Eigen::MatrixXd a_total = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd b_total = Eigen::VectorXd::Zero(dim);
    for (size_t i = 0; i < metrics.size(); ++i) {
        a_total += weights[i] * metrics[i];
        b_total += weights[i] * forces[i];
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
    const double scale = std::max(1.0, b_total.norm());
    for (int it = 0; it < max_iterations; ++it) {
        const Eigen::VectorXd g = a_total * x - b_total;
        if (g.norm() <= grad_tol * scale) break;
        const double curvature = g.dot(a_total * g);
        if (curvature <= 0) break;  // flat direction: already at the minimum over the range
        x -= (g.squaredNorm() / curvature) * g;
    }
    return x;
}

Eigen::MatrixXd finite_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn, const Eigen::VectorXd& q,
    double h) {
    const Eigen::VectorXd f0 = fn(q);
    Eigen::MatrixXd jac(f0.size(), q.size());
    for (Eigen::Index k = 0; k < q.size(); ++k) {
        Eigen::VectorXd hi = q, lo = q;
        hi[k] += h;
        lo[k] -= h;
        jac.col(k) = (fn(hi) - fn(lo)) / (2.0 * h);
    }
    return jac;
}

double sampled_circle_sdf(const Eigen::Vector2d& p, const Eigen::Vector2d& center, double radius,
                          int samples) {
    double nearest = std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
        const double theta = 2.0 * M_PI * k / samples;
        const Eigen::Vector2d s = center + radius * Eigen::Vector2d(std::cos(theta), std::sin(theta));
        nearest = std::min(nearest, (p - s).norm());
    }
    const bool inside = (p - center).norm() < radius;
    return inside ? -nearest : nearest;
}

double sampled_box_sdf(const Eigen::Vector2d& p, const Eigen::Vector2d& center,
                       const Eigen::Vector2d& half_extents, double max_spacing) {
    double nearest = std::numeric_limits<double>::infinity();
    auto walk_edge = [&](const Eigen::Vector2d& from, const Eigen::Vector2d& to) {
        const double len = (to - from).norm();
        const int steps = std::max(1, static_cast<int>(std::ceil(len / max_spacing)));
        for (int k = 0; k <= steps; ++k) {
            const Eigen::Vector2d s = from + (static_cast<double>(k) / steps) * (to - from);
            nearest = std::min(nearest, (p - s).norm());
        }
    };
    const Eigen::Vector2d he = half_extents;
    const Eigen::Vector2d c00 = center + Eigen::Vector2d(-he.x(), -he.y());
    const Eigen::Vector2d c10 = center + Eigen::Vector2d(he.x(), -he.y());
    const Eigen::Vector2d c11 = center + Eigen::Vector2d(he.x(), he.y());
    const Eigen::Vector2d c01 = center + Eigen::Vector2d(-he.x(), he.y());
    walk_edge(c00, c10);
    walk_edge(c10, c11);
    walk_edge(c11, c01);
    walk_edge(c01, c00);
    const Eigen::Vector2d d = (p - center).cwiseAbs() - he;
    const bool inside = d.x() < 0 && d.y() < 0;
    return inside ? -nearest : nearest;
}

}  // namespace hipbot::oracle
