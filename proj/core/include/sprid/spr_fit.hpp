#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sprid/gobf.hpp"
#include "sprid/lti.hpp"
#include "sprid/qp.hpp"

namespace sprid {

enum class ConstraintMode {
  kAbsolute,  ///< Re(G_hat) >= epsilon
  kRatio,     ///< Re(G_hat / G) >= epsilon
};

struct SprFitConfig {
  /// Unset: 1e-3 times the median |G| over the data grid.
  std::optional<double> epsilon;
  /// Per-frequency non-negative weights; empty means all ones.
  std::vector<double> weights;
  ConstraintMode mode = ConstraintMode::kAbsolute;
  /// Frequencies at which the constraint is imposed; empty means the data grid.
  std::vector<double> constraint_grid;
  /// Verification grid = constraint grid refined by this factor.
  int verify_mult = 4;
  /// Rounds in which verification-grid violations are added as constraints
  /// (absolute mode only). 0 keeps the sampled constraint set fixed.
  int refine_rounds = 3;
  QpOptions qp;

  double resolve_epsilon(const FrequencyResponse& data) const;
};

/// Objective sum_n w_n |G_n - theta' Phi_n|^2 with one SPR row per constraint frequency.
///
/// Residual rows are stacked as [Re; Im] and scaled by sqrt(w_n): P = 2 M'M,
/// q = -2 M'v, constant = v'v. Constraints use the data grid.
QpProblem assemble_qp(const FrequencyResponse& data, const Eigen::MatrixXcd& basis_matrix, const SprFitConfig& cfg);

/// Same objective, absolute-mode constraints at the columns of constraint_basis.
QpProblem assemble_qp(const FrequencyResponse& data, const Eigen::MatrixXcd& basis_matrix, const SprFitConfig& cfg,
                      const Eigen::MatrixXcd& constraint_basis);

struct SprFitResult {
  std::vector<double> theta;
  RationalTf fitted_tf{{0.0}, {1.0}, 1.0};
  double epsilon = 0.0;
  ConstraintMode mode = ConstraintMode::kAbsolute;
  double objective = 0.0;  ///< weighted sum of squared errors on the data grid

  /// min Re(G_hat) over the constraint grid (Re(G_hat / G) in ratio mode is min_ratio_real_part).
  double min_real_part = 0.0;
  double min_real_omega = 0.0;
  std::optional<double> min_ratio_real_part;

  /// max_n |G_n - G_hat_n| and that divided by max_n |G_n|.
  double worst_case_error = 0.0;
  double relative_error = 0.0;

  KktReport kkt;
  std::vector<int> active_set;          ///< indices into constraint_omegas
  std::vector<double> constraint_omegas;
  double ridge = 0.0;
  int qp_iterations = 0;
  int refinement_rounds = 0;

  /// Verification on the refined grid.
  std::vector<double> dense_omegas;
  double dense_min_real_part = 0.0;
  double dense_min_omega = 0.0;

  std::vector<std::string> warnings;
};

/// Fits theta' Phi(q) to the data under the sampled SPR constraint.
SprFitResult fit_spr(const FrequencyResponse& data, const GobfBasis& basis, const SprFitConfig& cfg);

}  // namespace sprid
