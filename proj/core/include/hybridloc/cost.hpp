#pragma once

#include <Eigen/Core>

#include "hybridloc/types.hpp"

namespace hybridloc {

/// Weighting of the quadratic terms in both cost families.
///   UnitQuadratic: unit quadratic weights, bearing terms scaled as kappa/range.
///   FullML:   quadratic terms carry 1/sigma^2; linear coefficients stay
///             kappa/range so both families share minimizer structure.
enum class WeightMode { UnitQuadratic, FullML };

/// Thrown when a cost/gradient evaluation hits a coincident measured pair
/// (distance below eps_div = 1e-12); the message names the pair.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double quad_weight(double sigma, WeightMode mode);

/// kappa/d * u for the edge's bearing; zero vector when absent.
Eigen::VectorXd scaled_bearing(const EdgeMeasurement& e, int p);
Eigen::VectorXd scaled_bearing(const AnchorMeasurement& a, int p);

/// Nonconvex ML objective: weighted squared range residuals minus the
/// bearing alignment terms
///   sum w_q (||x_i-x_j|| - d)^2 - sum kappa u.(x_i-x_j)/||x_i-x_j||
/// plus the anchor analogues. x is n x p.
double ml_cost(const Eigen::MatrixXd& x, const ProblemInstance& inst,
               WeightMode mode = WeightMode::FullML);

/// Exact gradient of ml_cost (closed form; the bearing term uses the
/// projector identity d/dz [u.z/||z||] = (I - zz^T/||z||^2) u / ||z||).
Eigen::MatrixXd ml_gradient(const Eigen::MatrixXd& x,
                            const ProblemInstance& inst,
                            WeightMode mode = WeightMode::FullML);

/// Relaxed convex objective over (x, y, w):
///   sum w_q ||x_i-x_j-y_e||^2 - utilde_e.y_e  + anchor analogues.
/// Defined everywhere; the ball constraints live in the solver.
double relaxed_cost(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                    const Eigen::MatrixXd& w, const ProblemInstance& inst,
                    WeightMode mode);

struct RelaxedGradient {
  Eigen::MatrixXd x;  // n x p
  Eigen::MatrixXd y;  // |E| x p
  Eigen::MatrixXd w;  // |L| x p
};

/// Gradient of relaxed_cost; affine in (x, y, w).
RelaxedGradient relaxed_gradient(const Eigen::MatrixXd& x,
                                 const Eigen::MatrixXd& y,
                                 const Eigen::MatrixXd& w,
                                 const ProblemInstance& inst, WeightMode mode);

/// min over ||y|| = d of ||z - y||^2, i.e. (||z|| - d)^2. Test oracle for
/// the variational identity behind the relaxation.
double eval_variational(const Eigen::VectorXd& z, double d);

}  // namespace hybridloc
