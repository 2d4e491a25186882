#include "hipbot/rmp_geometry.hpp"

#include <stdexcept>
#include <string>

namespace hipbot::rmp {

TaskMap identity_map(int dim) {
    TaskMap tm;
    tm.map = [](const Eigen::VectorXd& q) { return q; };
    tm.jacobian = [dim](const Eigen::VectorXd&) {
        return Eigen::MatrixXd(Eigen::MatrixXd::Identity(dim, dim));
    };
    return tm;
}

PulledRmp pullback(const TaskRmp& rmp, const TaskMap& task_map, const State& state,
                   std::string_view label) {
    const Eigen::VectorXd x = task_map.map(state.q);
    const Eigen::MatrixXd jac = task_map.jacobian(state.q);
    if (jac.rows() != x.size() || jac.cols() != state.q.size())
        throw std::runtime_error(std::string(label) + ": jacobian shape disagrees with task map");
    const Eigen::VectorXd x_dot = jac * state.q_dot;
    const Eigen::VectorXd f_task = rmp.force(x, x_dot, state.context);
    const Eigen::MatrixXd m_task = rmp.metric(x, x_dot, state.context);
    PulledRmp out;
    out.f = jac.transpose() * f_task;
    Eigen::MatrixXd m = jac.transpose() * m_task * jac;
    out.M = 0.5 * (m + m.transpose());  // keep symmetry exact under roundoff
    if (!out.f.allFinite() || !out.M.allFinite())
        throw std::runtime_error(std::string(label) + ": non-finite pullback");
    return out;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& sym, double eigen_floor) {
    if (sym.rows() != sym.cols())
        throw std::invalid_argument("pseudo_inverse needs a square matrix");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("pseudo_inverse: eigendecomposition failed");
    Eigen::VectorXd inv = eig.eigenvalues();
    for (Eigen::Index i = 0; i < inv.size(); ++i)
        inv[i] = inv[i] > eigen_floor ? 1.0 / inv[i] : 0.0;
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::VectorXd blend(std::span<const PulledRmp> pulled, std::span<const double> weights) {
    if (pulled.size() != weights.size())
        throw std::invalid_argument("blend: one weight per policy required");
    if (pulled.empty())
        throw std::invalid_argument("blend: at least one policy required");
    const Eigen::Index dim = pulled[0].f.size();
    double w_max = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0))
            throw std::invalid_argument("blend: weights must be nonnegative");
        w_max = std::max(w_max, w);
    }
    if (w_max == 0.0) return Eigen::VectorXd::Zero(dim);

    Eigen::MatrixXd m_total = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd f_total = Eigen::VectorXd::Zero(dim);
    for (size_t i = 0; i < pulled.size(); ++i) {
        if (pulled[i].f.size() != dim || pulled[i].M.rows() != dim || pulled[i].M.cols() != dim)
            throw std::invalid_argument("blend: policies live in different spaces");
        const double w = weights[i] / w_max;
        if (w == 0.0) continue;
        m_total.noalias() += w * pulled[i].M;
        f_total.noalias() += w * pulled[i].f;
    }
    return pseudo_inverse(m_total) * f_total;
}

double energy(const PulledRmp& rmp, const Eigen::VectorXd& acceleration) {
    const Eigen::VectorXd preferred = pseudo_inverse(rmp.M) * rmp.f;
    const Eigen::VectorXd d = acceleration - preferred;
    return 0.5 * d.dot(rmp.M * d);
}

}  // namespace hipbot::rmp
