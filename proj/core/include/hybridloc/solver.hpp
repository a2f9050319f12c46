#pragma once

#include <Eigen/Core>

#include "hybridloc/cost.hpp"
#include "hybridloc/types.hpp"

namespace hybridloc {

enum class InitStrategy { Zeros, AnchorCentroid, Given };

struct SolverConfig {
  /// Projected-gradient-norm stopping threshold, scaled internally by
  /// max(1, max measured range) so semantics survive unit changes.
  double tol_pg = 1e-9;
  int max_iters = 100000;
  /// FISTA momentum with function-value adaptive restart; plain projected
  /// gradient when off.
  bool use_acceleration = true;
  InitStrategy init = InitStrategy::AnchorCentroid;
  Eigen::MatrixXd x0;  // used when init == Given
};

/// Euclidean projection onto the ball of the given radius.
Eigen::VectorXd project_ball(const Eigen::VectorXd& v, double radius);

/// Exact minimizer over ||y|| <= d of  w_q ||z - y||^2 - utilde.y :
/// the unconstrained minimizer z + utilde/(2 w_q) projected onto the ball.
Eigen::VectorXd y_update(const Eigen::VectorXd& z,
                         const Eigen::VectorXd& utilde, double d,
                         double w_q = 1.0);
Eigen::VectorXd y_update(const Eigen::VectorXd& x_i, const Eigen::VectorXd& x_j,
                         const Eigen::VectorXd& utilde, double d,
                         double w_q);

/// Exact block minimization over x given fixed (y, w): solves L x = b per
/// coordinate, where L is the weighted graph Laplacian plus the diagonal of
/// anchor-link weights (positive definite when every component has an
/// anchor path). Dense Cholesky; the sparsity is not worth exploiting at
/// these sizes. Throws std::runtime_error("component with no anchor path")
/// otherwise.
Eigen::MatrixXd x_update(const Eigen::MatrixXd& y, const Eigen::MatrixXd& w,
                         const ProblemInstance& inst, WeightMode mode);

/// Largest Hessian eigenvalue of the relaxed quadratic, by power iteration
/// on the constant Hessian operator (relative tolerance 1e-6). Zero for an
/// empty measurement set.
double hessian_max_eigenvalue(const ProblemInstance& inst, WeightMode mode);

/// Step-size bound: hessian_max_eigenvalue * 1.01.
double lipschitz_estimate(const ProblemInstance& inst, WeightMode mode);

/// Accelerated projected gradient on (x, y, w) with step 1/L, ball
/// projections on y/w, and function-value adaptive restart (a restart
/// replaces the offending iterate by a plain descent step, so the objective
/// sequence is monotone non-increasing). Terminates when the projected
/// gradient mapping norm L*||z - Proj(z - grad/L)|| falls below the scaled
/// tolerance, or at max_iters (converged=false).
Solution solve_convex(const ProblemInstance& inst, const SolverConfig& cfg,
                      WeightMode mode = WeightMode::UnitQuadratic);

/// Exact alternating minimization: closed-form y/w updates and the x_update
/// linear solve, until the relative objective change drops below 1e-12.
/// Same fixed points as solve_convex; serves as an independent oracle.
Solution solve_alternating(const ProblemInstance& inst, const SolverConfig& cfg,
                           WeightMode mode = WeightMode::UnitQuadratic);

struct RefineOptions {
  double tol = 1e-8;  // gradient norm threshold, scaled by problem scale
  int max_iters = 10000;
  WeightMode mode = WeightMode::FullML;
};

struct RefineResult {
  Eigen::MatrixXd x;
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
  double grad_norm = 0.0;
};

/// Local minimization of ml_cost by gradient descent with Armijo
/// backtracking, starting from x0 (which must avoid coincident measured
/// pairs). Used to produce the nonconvex reference estimate from ground
/// truth and as an optional polish of the convex solution.
RefineResult refine_nonconvex(const Eigen::MatrixXd& x0,
                              const ProblemInstance& inst,
                              const RefineOptions& opts = {});

}  // namespace hybridloc
