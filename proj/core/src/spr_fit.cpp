#include "sprid/spr_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "sprid/error.hpp"

namespace sprid {

double SprFitConfig::resolve_epsilon(const FrequencyResponse& data) const {
  if (epsilon) {
    if (!(*epsilon > 0.0) || !std::isfinite(*epsilon)) throw ConfigError("SPR tolerance epsilon must be > 0");
    return *epsilon;
  }
  std::vector<double> mags;
  mags.reserve(data.size());
  for (const Complex& g : data.values()) mags.push_back(std::abs(g));
  const auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
  std::nth_element(mags.begin(), mid, mags.end());
  double median = *mid;
  if (mags.size() % 2 == 0) median = 0.5 * (median + *std::max_element(mags.begin(), mid));
  if (!(median > 0.0)) throw ConfigError("cannot derive a default epsilon: median |G| is zero");
  return 1e-3 * median;
}

namespace {

void check_weights(const FrequencyResponse& data, const SprFitConfig& cfg) {
  if (cfg.weights.empty()) return;
  if (cfg.weights.size() != data.size()) {
    throw ConfigError(fmt::format("weights: {} entries for {} frequencies", cfg.weights.size(), data.size()));
  }
  for (double w : cfg.weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("weights must be finite and non-negative");
  }
}

QpProblem assemble_objective(const FrequencyResponse& data, const Eigen::MatrixXcd& basis_matrix,
                             const SprFitConfig& cfg) {
  const Eigen::Index nf = static_cast<Eigen::Index>(data.size());
  if (basis_matrix.cols() != nf) {
    throw ConfigError(fmt::format("basis matrix has {} columns for {} frequencies", basis_matrix.cols(), nf));
  }
  check_weights(data, cfg);
  const Eigen::Index n = basis_matrix.rows();
  Eigen::MatrixXd stacked(2 * nf, n);
  Eigen::VectorXd target(2 * nf);
  for (Eigen::Index k = 0; k < nf; ++k) {
    const double s = cfg.weights.empty() ? 1.0 : std::sqrt(cfg.weights[static_cast<std::size_t>(k)]);
    stacked.row(k) = s * basis_matrix.col(k).real().transpose();
    stacked.row(nf + k) = s * basis_matrix.col(k).imag().transpose();
    const Complex g = data.values()[static_cast<std::size_t>(k)];
    target(k) = s * g.real();
    target(nf + k) = s * g.imag();
  }
  QpProblem qp;
  const Eigen::MatrixXd gram = stacked.transpose() * stacked;
  qp.hessian = gram + gram.transpose();
  qp.linear = -2.0 * stacked.transpose() * target;
  qp.constant = target.squaredNorm();
  qp.ineq_matrix.resize(0, n);
  qp.ineq_rhs.resize(0);
  return qp;
}

void set_constraints(QpProblem& qp, const Eigen::MatrixXd& constraint_rows_t, double epsilon) {
  qp.ineq_matrix = -constraint_rows_t.transpose();
  qp.ineq_rhs = Eigen::VectorXd::Constant(constraint_rows_t.cols(), -epsilon);
}

/// Columns Re(Phi_n / G_n).
Eigen::MatrixXd ratio_columns(const FrequencyResponse& data, const Eigen::MatrixXcd& basis_matrix) {
  double gmax = 0.0;
  for (const Complex& g : data.values()) gmax = std::max(gmax, std::abs(g));
  Eigen::MatrixXd out(basis_matrix.rows(), basis_matrix.cols());
  for (Eigen::Index k = 0; k < basis_matrix.cols(); ++k) {
    const Complex g = data.values()[static_cast<std::size_t>(k)];
    if (!(std::abs(g) > 1e-12 * gmax)) {
      throw NumericalError(fmt::format("ratio constraint: |G| vanishes at omega={} rad/s (division hazard)",
                                       data.omegas()[static_cast<std::size_t>(k)]));
    }
    out.col(k) = (basis_matrix.col(k) / g).real();
  }
  return out;
}

void check_grid(std::span<const double> omegas, double ts) {
  const double nyquist = std::numbers::pi / ts;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!(omegas[i] >= 0.0) || omegas[i] > nyquist * (1.0 + 1e-12)) {
      throw ConfigError(fmt::format("constraint grid: omega={} outside [0, {}]", omegas[i], nyquist));
    }
    if (i > 0 && !(omegas[i] > omegas[i - 1])) throw ConfigError("constraint grid must be strictly increasing");
  }
}

}  // namespace

QpProblem assemble_qp(const FrequencyResponse& data, const Eigen::MatrixXcd& basis_matrix, const SprFitConfig& cfg) {
  QpProblem qp = assemble_objective(data, basis_matrix, cfg);
  const double eps = cfg.resolve_epsilon(data);
  if (cfg.mode == ConstraintMode::kRatio) {
    set_constraints(qp, ratio_columns(data, basis_matrix), eps);
  } else {
    set_constraints(qp, basis_matrix.real(), eps);
  }
  return qp;
}

QpProblem assemble_qp(const FrequencyResponse& data, const Eigen::MatrixXcd& basis_matrix, const SprFitConfig& cfg,
                      const Eigen::MatrixXcd& constraint_basis) {
  if (cfg.mode == ConstraintMode::kRatio) {
    throw ConfigError("ratio mode needs plant values at every constraint frequency; use the data grid");
  }
  if (constraint_basis.rows() != basis_matrix.rows()) throw ConfigError("constraint basis row count mismatch");
  QpProblem qp = assemble_objective(data, basis_matrix, cfg);
  set_constraints(qp, constraint_basis.real(), cfg.resolve_epsilon(data));
  return qp;
}

SprFitResult fit_spr(const FrequencyResponse& data, const GobfBasis& basis, const SprFitConfig& cfg) {
  if (std::abs(data.ts() - basis.ts()) > 1e-12 * data.ts()) {
    throw ConfigError("basis and data use different sampling periods");
  }
  if (cfg.verify_mult < 1) throw ConfigError("verify_mult must be >= 1");
  if (cfg.refine_rounds < 0) throw ConfigError("refine_rounds must be >= 0");
  const double eps = cfg.resolve_epsilon(data);
  const bool ratio = cfg.mode == ConstraintMode::kRatio;

  std::vector<double> base(cfg.constraint_grid.empty() ? data.omegas() : cfg.constraint_grid);
  check_grid(base, data.ts());
  if (ratio && base != data.omegas()) {
    throw ConfigError("ratio mode requires the constraint grid to equal the data grid");
  }

  const Eigen::MatrixXcd phi = eval_basis(basis, data.omegas());
  QpProblem qp = assemble_objective(data, phi, cfg);

  // Re(Phi) at the constraint frequencies; in ratio mode the rows that enter the
  // QP are Re(Phi / G) instead.
  std::vector<double> cons = base;
  Eigen::MatrixXd re_cons = eval_basis(basis, cons).real();
  Eigen::MatrixXd qp_cons = ratio ? ratio_columns(data, phi) : re_cons;

  const std::vector<double> dense = refine_grid(base, cfg.verify_mult);
  const Eigen::MatrixXd re_dense = eval_basis(basis, dense).real();

  SprFitResult out;
  out.epsilon = eps;
  out.mode = cfg.mode;

  QpSolution sol;
  const double viol_tol = 1e-10 * std::max(1.0, eps);
  for (int round = 0;; ++round) {
    set_constraints(qp, qp_cons, eps);
    sol = solve_qp(qp, cfg.qp);
    out.qp_iterations += sol.iterations;
    if (ratio || round >= cfg.refine_rounds) break;

    const Eigen::VectorXd dense_re = re_dense.transpose() * sol.x;
    std::vector<double> added;
    for (Eigen::Index j = 0; j < dense_re.size(); ++j) {
      const double w = dense[static_cast<std::size_t>(j)];
      if (dense_re(j) < eps - viol_tol && !std::binary_search(cons.begin(), cons.end(), w)) added.push_back(w);
    }
    if (added.empty()) break;
    ++out.refinement_rounds;
    std::vector<double> merged;
    merged.reserve(cons.size() + added.size());
    std::merge(cons.begin(), cons.end(), added.begin(), added.end(), std::back_inserter(merged));
    cons = std::move(merged);
    re_cons = eval_basis(basis, cons).real();
    qp_cons = re_cons;
  }

  out.theta.assign(sol.x.data(), sol.x.data() + sol.x.size());
  out.fitted_tf = combine(out.theta, basis);
  out.kkt = sol.kkt;
  out.active_set = sol.active_set;
  out.constraint_omegas = cons;
  out.ridge = sol.ridge;

  const Eigen::VectorXcd fitted = phi.transpose() * sol.x.cast<Complex>();
  double gmax = 0.0;
  out.objective = 0.0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const Complex err = data.values()[k] - fitted(static_cast<Eigen::Index>(k));
    const double w = cfg.weights.empty() ? 1.0 : cfg.weights[k];
    out.objective += w * std::norm(err);
    out.worst_case_error = std::max(out.worst_case_error, std::abs(err));
    gmax = std::max(gmax, std::abs(data.values()[k]));
  }
  out.relative_error = gmax > 0.0 ? out.worst_case_error / gmax : std::numeric_limits<double>::infinity();

  const Eigen::VectorXd re_c = re_cons.transpose() * sol.x;
  Eigen::Index arg = 0;
  out.min_real_part = re_c.minCoeff(&arg);
  out.min_real_omega = cons[static_cast<std::size_t>(arg)];
  if (ratio) out.min_ratio_real_part = (qp_cons.transpose() * sol.x).minCoeff();

  const Eigen::VectorXd dense_re = re_dense.transpose() * sol.x;
  out.dense_omegas = dense;
  out.dense_min_real_part = dense_re.minCoeff(&arg);
  out.dense_min_omega = dense[static_cast<std::size_t>(arg)];
  if (!ratio && out.dense_min_real_part < eps - viol_tol) {
    out.warnings.push_back(fmt::format("SPR constraint violated between samples: Re(G_hat)={:.6g} < epsilon at omega={:.6g}",
                                       out.dense_min_real_part, out.dense_min_omega));
  }
  if (out.dense_min_real_part <= 0.0) {
    out.warnings.push_back(fmt::format("fitted model is not SPR on the verification grid: Re(G_hat)={:.6g} at omega={:.6g}",
                                       out.dense_min_real_part, out.dense_min_omega));
  }
  if (out.fitted_tf.relative_degree() != 0) {
    out.warnings.push_back(fmt::format("fitted model has relative degree {}; discrete-time SPR needs 0",
                                       out.fitted_tf.relative_degree()));
  }
  return out;
}

}  // namespace sprid
