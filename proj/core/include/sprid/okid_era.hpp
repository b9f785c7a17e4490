#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sprid/lti.hpp"

namespace sprid {

/// How many singular values of H(0) ERA keeps: everything with sigma_k / sigma_1 at
/// or above a relative threshold, or an explicit model order.
class OrderRule {
 public:
  static OrderRule relative(double threshold);
  static OrderRule fixed(int order);

  bool is_fixed() const noexcept { return order_.has_value(); }
  double threshold() const noexcept { return threshold_; }
  std::optional<int> order() const noexcept { return order_; }

  /// Number of singular values retained by this rule (may be zero).
  int retained(const Eigen::VectorXd& singular_values) const;

 private:
  OrderRule(double threshold, std::optional<int> order) : threshold_(threshold), order_(order) {}
  double threshold_;
  std::optional<int> order_;
};

/// Which Markov sequence ERA factorizes in the end-to-end pipeline.
enum class RealizationRoute {
  /// Input-output Markov parameters D, CB, CAB, ... recovered from the observer
  /// parameters; K is then fitted to the observer-gain sequence CA^{k-1}K.
  kSystemMarkov,
  /// Observer parameters C F^k L directly, then A = F + GC, B = H + GD, K = G.
  kObserverMarkov,
};

struct OkidConfig {
  int p_window = 20;
  /// Block rows/columns of the Hankel matrices; 0 selects floor(p_window / 2).
  int hankel_rows = 0;
  int hankel_cols = 0;
  OrderRule order_rule = OrderRule::relative(1e-6);
  RealizationRoute route = RealizationRoute::kSystemMarkov;

  /// max(20, 5 * expected_order).
  static int default_window(int expected_order);
};

/// Stacked least-squares data Y = Phi V + E.
struct Regression {
  Eigen::MatrixXd y;  ///< outputs x (l - p)
  Eigen::MatrixXd v;  ///< (m + p (m + r)) x (l - p)
};

/// Columns k = p..l-1. Column of V is [u(k); u(k-1); y(k-1); ...; u(k-p); y(k-p)].
/// u and y hold one time step per column.
Regression build_regression(const Eigen::MatrixXd& u, const Eigen::MatrixXd& y, int p_window);

/// Observer Markov parameters [D, CL, CFL, ..., CF^{p-1}L] with L = [H G].
struct ObserverMarkov {
  Eigen::MatrixXd d_block;                 ///< r x m
  std::vector<Eigen::MatrixXd> cfl_blocks; ///< p blocks, each r x (m + r)

  Eigen::Index outputs() const { return d_block.rows(); }
  Eigen::Index inputs() const { return d_block.cols(); }
  int window() const { return static_cast<int>(cfl_blocks.size()); }

  // least-squares diagnostics
  Eigen::Index regression_rank = 0;
  bool rank_deficient = false;
  double residual_norm = 0.0;
};

/// Phi = Y V^+ by a complete orthogonal decomposition (relative rank tolerance
/// 1e-10), i.e. the minimum-norm least-squares solution. Rank deficiency is
/// flagged in the result, never thrown.
ObserverMarkov estimate_markov(const Eigen::MatrixXd& y, const Eigen::MatrixXd& v, Eigen::Index inputs);

/// Input-output Markov parameters [D, CB, CAB, ...] from observer parameters,
/// count <= p + 1.
std::vector<Eigen::MatrixXd> system_markov(const ObserverMarkov& markov, int count);

/// Observer-gain Markov parameters [CK, CAK, CA^2K, ...], count <= p.
std::vector<Eigen::MatrixXd> observer_gain_markov(const ObserverMarkov& markov, int count);

struct HankelPair {
  Eigen::MatrixXd h0;
  Eigen::MatrixXd h1;
};

/// Block (i, j) of h0 is blocks[i + j], of h1 is blocks[i + j + 1]. Needs
/// rows + cols <= blocks.size().
HankelPair build_hankels(std::span<const Eigen::MatrixXd> blocks, int rows, int cols);
HankelPair build_hankels(const ObserverMarkov& markov, int rows, int cols);

struct EraRealization {
  Eigen::MatrixXd f;
  Eigen::MatrixXd c;
  Eigen::MatrixXd l;
  Eigen::VectorXd singular_values;
  int retained_order = 0;

  /// Leading `inputs` columns of L (the H block) and the rest (the G block).
  Eigen::MatrixXd h(Eigen::Index inputs) const { return l.leftCols(inputs); }
  Eigen::MatrixXd g(Eigen::Index inputs) const { return l.rightCols(l.cols() - inputs); }
};

/// Eigensystem realization: SVD of H(0), balanced split O = U S^{1/2},
/// Ctrb = S^{1/2} V^T, F = S^{-1/2} U^T H(1) V S^{-1/2}.
EraRealization era(const HankelPair& hankels, const OrderRule& rule, Eigen::Index outputs,
                   Eigen::Index block_width);

struct RecoveredSystem {
  StateSpaceModel model;
  bool observer_schur = false;  ///< A - KC Schur
  std::vector<std::string> warnings;
};

/// A = F + GC, B = H + GD, K = G.
RecoveredSystem recover_system(const EraRealization& realization, const Eigen::MatrixXd& d_block, double ts);

struct OkidResult {
  StateSpaceModel model;
  std::vector<Complex> poles;
  Eigen::VectorXd singular_values;
  int retained_order = 0;
  double ls_residual = 0.0;
  Eigen::Index regression_rank = 0;
  bool rank_deficient = false;
  std::vector<std::string> warnings;
};

/// OKID least squares followed by ERA, u and y with one time step per column.
OkidResult okid_era(const Eigen::MatrixXd& u, const Eigen::MatrixXd& y, const OkidConfig& cfg, double ts);

/// SISO convenience overload.
OkidResult okid_era(std::span<const double> u, std::span<const double> y, const OkidConfig& cfg, double ts);

}  // namespace sprid
