#include "sprid/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace sprid {

double QpProblem::objective(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(hessian * x) + linear.dot(x) + constant;
}

void QpProblem::validate() const {
  const Eigen::Index n = hessian.rows();
  if (hessian.cols() != n) throw ConfigError("QP: Hessian must be square");
  if (linear.size() != n) throw ConfigError("QP: linear term length mismatch");
  if (ineq_matrix.rows() > 0 && ineq_matrix.cols() != n) throw ConfigError("QP: constraint matrix width mismatch");
  if (ineq_rhs.size() != ineq_matrix.rows()) throw ConfigError("QP: constraint rhs length mismatch");
  const double norm = hessian.cwiseAbs().maxCoeff();
  if ((hessian - hessian.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, norm)) {
    throw ConfigError("QP: Hessian is not symmetric");
  }
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, norm)) {
      throw ConfigError("QP: Hessian is not positive semidefinite");
    }
  }
}

double KktReport::worst() const {
  return std::max({stationarity, primal_feasibility, dual_feasibility, complementarity});
}

KktReport check_kkt(const QpProblem& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& multipliers) {
  KktReport out;
  Eigen::VectorXd grad = qp.hessian * x + qp.linear;
  if (qp.constraints() > 0) {
    if (multipliers.size() != qp.constraints()) throw ConfigError("check_kkt: multiplier count mismatch");
    grad += qp.ineq_matrix.transpose() * multipliers;
    const Eigen::VectorXd residual = qp.ineq_matrix * x - qp.ineq_rhs;
    out.primal_feasibility = std::max(0.0, residual.maxCoeff());
    out.dual_feasibility = std::max(0.0, (-multipliers).maxCoeff());
    out.complementarity = multipliers.cwiseProduct(residual).cwiseAbs().maxCoeff();
  }
  out.stationarity = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  return out;
}

namespace {

struct NullSpace {
  Eigen::MatrixXd y;  // range of A'
  Eigen::MatrixXd z;  // null space of A
  Eigen::MatrixXd r;  // A' = Y R
};

NullSpace factor_constraints(const Eigen::MatrixXd& a, Eigen::Index n) {
  const Eigen::Index k = a.rows();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a.transpose());
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  return {q.leftCols(k), q.rightCols(n - k), qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>()};
}

/// Minimizes 1/2 x'Px + q'x on { x : A x = b }. Returns x and the multipliers of
/// P x + q + A' lambda = 0.
std::pair<Eigen::VectorXd, Eigen::VectorXd> solve_equality_qp(const Eigen::MatrixXd& p, const Eigen::VectorXd& q,
                                                               const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = p.rows();
  if (a.rows() == 0) return {p.ldlt().solve(-q), Eigen::VectorXd()};
  const NullSpace ns = factor_constraints(a, n);
  const Eigen::MatrixXd rt = ns.r.transpose();
  Eigen::VectorXd x = ns.y * rt.triangularView<Eigen::Lower>().solve(b);
  if (ns.z.cols() > 0) {
    const Eigen::MatrixXd reduced = ns.z.transpose() * p * ns.z;
    x += ns.z * reduced.ldlt().solve(-ns.z.transpose() * (p * x + q));
  }
  const Eigen::VectorXd lambda = ns.r.triangularView<Eigen::Upper>().solve(-ns.y.transpose() * (p * x + q));
  return {x, lambda};
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& c, const std::vector<int>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), c.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = c.row(idx[i]);
  return out;
}

Eigen::VectorXd entries_of(const Eigen::VectorXd& d, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = d(idx[i]);
  return out;
}

struct ActiveSetOutcome {
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;  // full length
  std::vector<int> working;
  int iterations = 0;
};

/// Primal active-set iterations from a (nearly) feasible start; P must be
/// positive definite.
ActiveSetOutcome active_set(const Eigen::MatrixXd& p, const Eigen::VectorXd& q, const Eigen::MatrixXd& c,
                            const Eigen::VectorXd& d, Eigen::VectorXd x, double tol, int max_iterations) {
  const Eigen::Index m = c.rows();
  std::vector<int> working;
  std::vector<char> in_working(static_cast<std::size_t>(m), 0);

  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    const Eigen::VectorXd grad = p * x + q;
    const Eigen::MatrixXd a = rows_of(c, working);
    auto [step, lambda] = solve_equality_qp(p, grad, a, Eigen::VectorXd::Zero(a.rows()));

    if (step.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + x.cwiseAbs().maxCoeff())) {
      if (working.empty()) break;
      Eigen::Index worst = 0;
      const double most_negative = lambda.minCoeff(&worst);
      if (most_negative >= -tol * std::max(1.0, lambda.cwiseAbs().maxCoeff())) break;
      in_working[static_cast<std::size_t>(working[static_cast<std::size_t>(worst)])] = 0;
      working.erase(working.begin() + worst);
      continue;
    }

    double alpha = 1.0;
    int blocking = -1;
    const double step_norm = step.norm();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (in_working[static_cast<std::size_t>(i)]) continue;
      const double rate = c.row(i).dot(step);
      if (rate <= 1e-14 * c.row(i).norm() * step_norm) continue;
      const double slack = std::max(0.0, d(i) - c.row(i).dot(x));
      const double limit = slack / rate;
      if (limit < alpha) {
        alpha = limit;
        blocking = static_cast<int>(i);
      }
    }
    x += alpha * step;
    if (blocking >= 0) {
      working.push_back(blocking);
      in_working[static_cast<std::size_t>(blocking)] = 1;
    }
  }
  if (iter >= max_iterations) {
    throw NonConvergenceError(fmt::format("QP active-set method did not converge in {} iterations", max_iterations), x);
  }

  // Re-solve on the final working set so active constraints hold to rounding.
  ActiveSetOutcome out;
  auto [xs, lambda] = solve_equality_qp(p, q, rows_of(c, working), entries_of(d, working));
  out.x = std::move(xs);
  out.multipliers = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < working.size(); ++i) out.multipliers(working[i]) = lambda(static_cast<Eigen::Index>(i));
  out.working = std::move(working);
  out.iterations = iter;
  return out;
}

}  // namespace

QpSolution solve_qp(const QpProblem& qp, const QpOptions& options) {
  qp.validate();
  const Eigen::Index n = qp.variables();
  const Eigen::Index m = qp.constraints();
  if (n == 0) throw ConfigError("QP: no variables");
  const int max_iter = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(20 * (n + m) + 100);
  const double tol = options.tolerance;

  QpSolution out;
  Eigen::MatrixXd p = qp.hessian;
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p, Eigen::EigenvaluesOnly);
    const double hi = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (eig.eigenvalues().minCoeff() <= 1e-12 * hi || hi == 0.0) {
      out.ridge = std::max(1e-10 * p.trace() / static_cast<double>(n), 1e-300);
      if (p.trace() == 0.0) out.ridge = 1e-10;
      p.diagonal().array() += out.ridge;
    }
  }

  Eigen::VectorXd start = Eigen::VectorXd::Zero(n);
  if (m > 0) {
    // Feasibility phase over (x, t): maximize t subject to C x + t <= d, t <= 1,
    // with a small ridge so the subproblem is strictly convex.
    const double delta = 1e-10;
    Eigen::MatrixXd p1 = delta * Eigen::MatrixXd::Identity(n + 1, n + 1);
    Eigen::VectorXd q1 = Eigen::VectorXd::Zero(n + 1);
    q1(n) = -1.0;
    Eigen::MatrixXd c1 = Eigen::MatrixXd::Zero(m + 1, n + 1);
    c1.topLeftCorner(m, n) = qp.ineq_matrix;
    c1.col(n).setOnes();
    Eigen::VectorXd d1(m + 1);
    d1 << qp.ineq_rhs, 1.0;
    Eigen::VectorXd z0 = Eigen::VectorXd::Zero(n + 1);
    z0(n) = std::min(1.0, qp.ineq_rhs.minCoeff());

    const ActiveSetOutcome phase1 = active_set(p1, q1, c1, d1, z0, tol, max_iter);
    out.iterations += phase1.iterations;
    const Eigen::VectorXd x1 = phase1.x.head(n);
    const double min_slack = (qp.ineq_rhs - qp.ineq_matrix * x1).minCoeff();
    const double feas_tol = tol * (1.0 + qp.ineq_rhs.cwiseAbs().maxCoeff());
    if (min_slack < -feas_tol) {
      throw InfeasibleError(
          fmt::format("QP infeasible: the best achievable minimum constraint slack is {:.6g} < 0", min_slack), x1,
          min_slack);
    }
    start = x1;
  }

  const ActiveSetOutcome main = active_set(p, qp.linear, qp.ineq_matrix, qp.ineq_rhs, start, tol, max_iter);
  out.iterations += main.iterations;
  out.x = main.x;
  out.multipliers = main.multipliers;
  out.active_set = main.working;
  std::sort(out.active_set.begin(), out.active_set.end());
  out.kkt = check_kkt(qp, out.x, out.multipliers);
  out.objective = qp.objective(out.x);

  const double scale = 1.0 + qp.hessian.cwiseAbs().maxCoeff() * out.x.cwiseAbs().maxCoeff() +
                       qp.linear.cwiseAbs().maxCoeff();
  if (out.kkt.primal_feasibility > 1e-6 * (1.0 + (m > 0 ? qp.ineq_rhs.cwiseAbs().maxCoeff() : 0.0)) ||
      out.kkt.stationarity > 1e-6 * scale) {
    throw NonConvergenceError(
        fmt::format("QP solution fails KKT check (stationarity {:.3g}, feasibility {:.3g})", out.kkt.stationarity,
                    out.kkt.primal_feasibility),
        out.x);
  }
  return out;
}

}  // namespace sprid
