#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sprid/error.hpp"

namespace sprid {

/// minimize 1/2 x'Px + q'x + constant  subject to  Cx <= d.
struct QpProblem {
  Eigen::MatrixXd hessian;      ///< P, symmetric positive semidefinite
  Eigen::VectorXd linear;       ///< q
  Eigen::MatrixXd ineq_matrix;  ///< C, one row per constraint (may have zero rows)
  Eigen::VectorXd ineq_rhs;     ///< d
  double constant = 0.0;

  Eigen::Index variables() const { return hessian.rows(); }
  Eigen::Index constraints() const { return ineq_matrix.rows(); }
  double objective(const Eigen::VectorXd& x) const;

  /// Dimension, symmetry and PSD checks; throws ConfigError.
  void validate() const;
};

struct KktReport {
  double stationarity = 0.0;         ///< ||Px + q + C'lambda||_inf
  double primal_feasibility = 0.0;   ///< max(0, max(Cx - d))
  double dual_feasibility = 0.0;     ///< max(0, max(-lambda))
  double complementarity = 0.0;      ///< max |lambda_i (Cx - d)_i|

  double worst() const;
};

KktReport check_kkt(const QpProblem& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& multipliers);

struct QpOptions {
  double tolerance = 1e-9;
  /// 0 picks 20 * (variables + constraints) + 100.
  int max_iterations = 0;
};

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;
  std::vector<int> active_set;
  KktReport kkt;
  double objective = 0.0;
  double ridge = 0.0;  ///< diagonal shift applied when P was singular
  int iterations = 0;
};

/// No x satisfies Cx <= d. Carries the maximizer of the minimum slack.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, Eigen::VectorXd evidence, double max_min_slack)
      : Error(ExitCode::kInfeasible, what), evidence_(std::move(evidence)), max_min_slack_(max_min_slack) {}
  const Eigen::VectorXd& evidence() const noexcept { return evidence_; }
  double max_min_slack() const noexcept { return max_min_slack_; }

 private:
  Eigen::VectorXd evidence_;
  double max_min_slack_;
};

class NonConvergenceError : public NumericalError {
 public:
  NonConvergenceError(const std::string& what, Eigen::VectorXd best) : NumericalError(what), best_(std::move(best)) {}
  const Eigen::VectorXd& best_iterate() const noexcept { return best_; }

 private:
  Eigen::VectorXd best_;
};

/// Primal active-set method for convex QPs. A feasibility phase (maximize the
/// minimum constraint slack) supplies the starting point; singular P receives a
/// ridge of 1e-10 * trace(P) / n.
QpSolution solve_qp(const QpProblem& qp, const QpOptions& options = {});

}  // namespace sprid
