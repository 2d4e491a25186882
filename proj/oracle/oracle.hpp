#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

// Slow, independent reference computations used to check the fast paths.
// Nothing in here may call into the main library.
namespace hipbot::oracle {

// Exact optimum of the discrete transportation problem
//   min <P, cost>  s.t.  P >= 0, row sums = a, column sums = b
// by enumerating every spanning-tree basis of the transportation polytope
// and keeping the cheapest nonnegative vertex.  Exponential on purpose;
// guarded to small instances (rows*cols <= 25).
double transportation_lp_optimum(const Eigen::MatrixXd& cost, const Eigen::VectorXd& a,
                                 const Eigen::VectorXd& b);

// Golden-section search for the minimizer of a unimodal function on [lo, hi].
double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double tol = 1e-12);

// Minimizer of G(x) = sum_i w_i (1/2 x'M_i x - x'f_i) by steepest descent
// with exact line search from x = 0 (stays in the range of the summed
// metric, hence matches the minimum-norm solution on singular problems).
Eigen::VectorXd minimize_weighted_quadratics(const std::vector<Eigen::MatrixXd>& metrics,
                                             const std::vector<Eigen::VectorXd>& forces,
                                             const std::vector<double>& weights,
                                             double grad_tol = 1e-11, int max_iterations = 500000);

// Central finite-difference Jacobian of a vector map.
Eigen::MatrixXd finite_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn, const Eigen::VectorXd& q,
    double h = 1e-6);

// Signed distances recovered by brute-force sampling of the shape boundary
// plus an inside test.
double sampled_circle_sdf(const Eigen::Vector2d& p, const Eigen::Vector2d& center, double radius,
                          int samples = 4096);
double sampled_box_sdf(const Eigen::Vector2d& p, const Eigen::Vector2d& center,
                       const Eigen::Vector2d& half_extents, double max_spacing = 0.25);

}  // namespace hipbot::oracle
