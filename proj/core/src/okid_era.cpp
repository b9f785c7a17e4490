#include "sprid/okid_era.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sprid/error.hpp"

namespace sprid {

OrderRule OrderRule::relative(double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("singular-value threshold must lie in (0, 1)");
  return OrderRule(threshold, std::nullopt);
}

OrderRule OrderRule::fixed(int order) {
  if (order < 1) throw ConfigError("explicit model order must be >= 1");
  return OrderRule(0.0, order);
}

int OrderRule::retained(const Eigen::VectorXd& singular_values) const {
  if (order_) return std::min<int>(*order_, static_cast<int>(singular_values.size()));
  if (singular_values.size() == 0 || !(singular_values(0) > 0.0)) return 0;
  int n = 0;
  while (n < singular_values.size() && singular_values(n) / singular_values(0) >= threshold_) ++n;
  return n;
}

int OkidConfig::default_window(int expected_order) { return std::max(20, 5 * expected_order); }

Regression build_regression(const Eigen::MatrixXd& u, const Eigen::MatrixXd& y, int p) {
  if (p < 1) throw ConfigError("OKID window p must be >= 1");
  if (u.cols() != y.cols()) throw ConfigError("OKID: input and output sequences differ in length");
  const Eigen::Index l = u.cols();
  if (l <= p) {
    throw ConfigError(fmt::format("OKID: insufficient data, {} samples for window p={} (need more than p)", l, p));
  }
  const Eigen::Index m = u.rows();
  const Eigen::Index r = y.rows();
  const Eigen::Index cols = l - p;

  Regression out;
  out.y = y.rightCols(cols);
  out.v.resize(m + p * (m + r), cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    const Eigen::Index k = p + c;
    out.v.block(0, c, m, 1) = u.col(k);
    for (int j = 1; j <= p; ++j) {
      const Eigen::Index row = m + (j - 1) * (m + r);
      out.v.block(row, c, m, 1) = u.col(k - j);
      out.v.block(row + m, c, r, 1) = y.col(k - j);
    }
  }
  return out;
}

ObserverMarkov estimate_markov(const Eigen::MatrixXd& y, const Eigen::MatrixXd& v, Eigen::Index inputs) {
  if (y.cols() != v.cols()) throw ConfigError("estimate_markov: Y and V column counts differ");
  const Eigen::Index r = y.rows();
  const Eigen::Index m = inputs;
  const Eigen::Index rest = v.rows() - m;
  if (m < 1 || rest < 0 || rest % (m + r) != 0) {
    throw ConfigError("estimate_markov: V row count is not m + p (m + r)");
  }
  const int p = static_cast<int>(rest / (m + r));

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(1e-10);
  cod.compute(v.transpose());
  const Eigen::MatrixXd phi = cod.solve(y.transpose()).transpose();

  ObserverMarkov out;
  out.d_block = phi.leftCols(m);
  out.cfl_blocks.reserve(p);
  for (int k = 0; k < p; ++k) out.cfl_blocks.push_back(phi.middleCols(m + k * (m + r), m + r));
  out.regression_rank = cod.rank();
  out.rank_deficient = cod.rank() < v.rows();
  out.residual_norm = (y - phi * v).norm();
  return out;
}

std::vector<Eigen::MatrixXd> system_markov(const ObserverMarkov& markov, int count) {
  const int p = markov.window();
  if (count < 1 || count > p + 1) throw ConfigError(fmt::format("system_markov: count must lie in [1, {}]", p + 1));
  const Eigen::Index m = markov.inputs();
  std::vector<Eigen::MatrixXd> out{markov.d_block};
  for (int k = 1; k < count; ++k) {
    Eigen::MatrixXd yk = markov.cfl_blocks[k - 1].leftCols(m);
    for (int i = 1; i <= k; ++i) yk += markov.cfl_blocks[i - 1].rightCols(markov.outputs()) * out[k - i];
    out.push_back(std::move(yk));
  }
  return out;
}

std::vector<Eigen::MatrixXd> observer_gain_markov(const ObserverMarkov& markov, int count) {
  const int p = markov.window();
  if (count < 1 || count > p) throw ConfigError(fmt::format("observer_gain_markov: count must lie in [1, {}]", p));
  const Eigen::Index r = markov.outputs();
  std::vector<Eigen::MatrixXd> out;
  for (int k = 1; k <= count; ++k) {
    Eigen::MatrixXd yk = markov.cfl_blocks[k - 1].rightCols(r);
    for (int i = 1; i < k; ++i) yk += markov.cfl_blocks[i - 1].rightCols(r) * out[k - i - 1];
    out.push_back(std::move(yk));
  }
  return out;
}

HankelPair build_hankels(std::span<const Eigen::MatrixXd> blocks, int rows, int cols) {
  if (rows < 1 || cols < 1) throw ConfigError("Hankel shape must be at least 1 x 1 blocks");
  const std::size_t needed = static_cast<std::size_t>(rows + cols);
  if (blocks.size() < needed) {
    throw ConfigError(fmt::format("Hankel {}x{} needs {} Markov blocks but only {} are available (raise p to {})",
                                  rows, cols, needed, blocks.size(), needed));
  }
  const Eigen::Index br = blocks.front().rows();
  const Eigen::Index bc = blocks.front().cols();
  HankelPair out;
  out.h0.resize(rows * br, cols * bc);
  out.h1.resize(rows * br, cols * bc);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      out.h0.block(i * br, j * bc, br, bc) = blocks[i + j];
      out.h1.block(i * br, j * bc, br, bc) = blocks[i + j + 1];
    }
  }
  return out;
}

HankelPair build_hankels(const ObserverMarkov& markov, int rows, int cols) {
  return build_hankels(std::span<const Eigen::MatrixXd>(markov.cfl_blocks), rows, cols);
}

EraRealization era(const HankelPair& hankels, const OrderRule& rule, Eigen::Index outputs, Eigen::Index block_width) {
  if (hankels.h0.rows() != hankels.h1.rows() || hankels.h0.cols() != hankels.h1.cols()) {
    throw ConfigError("era: H(0) and H(1) differ in shape");
  }
  if (outputs > hankels.h0.rows() || block_width > hankels.h0.cols()) {
    throw ConfigError("era: block size exceeds Hankel size");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(hankels.h0, Eigen::ComputeThinU | Eigen::ComputeThinV);

  EraRealization out;
  out.singular_values = svd.singularValues();
  const int n = rule.retained(out.singular_values);
  if (n == 0) throw NumericalError("era: no singular value of H(0) passes the order rule (retained order 0)");
  if (!(out.singular_values(n - 1) > 0.0)) {
    throw NumericalError(fmt::format("era: requested order {} exceeds the numerical rank of H(0)", n));
  }
  out.retained_order = n;

  const Eigen::MatrixXd u = svd.matrixU().leftCols(n);
  const Eigen::MatrixXd v = svd.matrixV().leftCols(n);
  const Eigen::ArrayXd root = out.singular_values.head(n).array().sqrt();
  const Eigen::ArrayXd inv_root = root.inverse();

  out.f = inv_root.matrix().asDiagonal() * (u.transpose() * hankels.h1 * v) * inv_root.matrix().asDiagonal();
  const Eigen::MatrixXd observability = u * root.matrix().asDiagonal();
  const Eigen::MatrixXd controllability = root.matrix().asDiagonal() * v.transpose();
  out.c = observability.topRows(outputs);
  out.l = controllability.leftCols(block_width);
  return out;
}

RecoveredSystem recover_system(const EraRealization& realization, const Eigen::MatrixXd& d_block, double ts) {
  const Eigen::Index m = d_block.cols();
  const Eigen::Index r = d_block.rows();
  if (realization.c.rows() != r || realization.l.cols() != m + r) {
    throw ConfigError("recover_system: realization does not match D dimensions (L must be n x (m + r))");
  }
  const Eigen::MatrixXd h = realization.h(m);
  const Eigen::MatrixXd g = realization.g(m);
  Eigen::MatrixXd a = realization.f + g * realization.c;
  Eigen::MatrixXd b = h + g * d_block;

  const Eigen::MatrixXd observer = a - g * realization.c;
  const bool schur = is_schur(observer);
  RecoveredSystem out{StateSpaceModel(std::move(a), std::move(b), realization.c, d_block, ts, g), schur, {}};
  if (!schur) out.warnings.emplace_back("recovered observer A - KC is not Schur");
  return out;
}

namespace {

Eigen::MatrixXd fit_observer_gain(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c,
                                  const std::vector<Eigen::MatrixXd>& gain_markov) {
  const Eigen::Index r = c.rows();
  const Eigen::Index steps = static_cast<Eigen::Index>(gain_markov.size());
  Eigen::MatrixXd obs(steps * r, a.rows());
  Eigen::MatrixXd rhs(steps * r, r);
  Eigen::MatrixXd cak = c;
  for (Eigen::Index k = 0; k < steps; ++k) {
    obs.middleRows(k * r, r) = cak;
    rhs.middleRows(k * r, r) = gain_markov[static_cast<std::size_t>(k)];
    cak = cak * a;
  }
  return obs.completeOrthogonalDecomposition().solve(rhs);
}

}  // namespace

OkidResult okid_era(const Eigen::MatrixXd& u, const Eigen::MatrixXd& y, const OkidConfig& cfg, double ts) {
  const int p = cfg.p_window;
  const int rows = cfg.hankel_rows > 0 ? cfg.hankel_rows : p / 2;
  const int cols = cfg.hankel_cols > 0 ? cfg.hankel_cols : p / 2;
  if (rows + cols > p) {
    throw ConfigError(fmt::format("Hankel shape {}x{} needs p >= {}, got p={}", rows, cols, rows + cols, p));
  }

  const Regression reg = build_regression(u, y, p);
  const ObserverMarkov markov = estimate_markov(reg.y, reg.v, u.rows());
  const Eigen::Index m = markov.inputs();
  const Eigen::Index r = markov.outputs();

  std::vector<std::string> warnings;
  if (markov.rank_deficient) {
    warnings.push_back(fmt::format("OKID regression matrix is rank deficient (rank {} of {}); using the minimum-norm solution",
                                   markov.regression_rank, reg.v.rows()));
  }

  std::optional<StateSpaceModel> model;
  EraRealization realization;
  if (cfg.route == RealizationRoute::kObserverMarkov) {
    realization = era(build_hankels(markov, rows, cols), cfg.order_rule, r, m + r);
    RecoveredSystem rec = recover_system(realization, markov.d_block, ts);
    warnings.insert(warnings.end(), rec.warnings.begin(), rec.warnings.end());
    model.emplace(std::move(rec.model));
  } else {
    const std::vector<Eigen::MatrixXd> markov_io = system_markov(markov, p + 1);
    const std::span<const Eigen::MatrixXd> tail(markov_io.data() + 1, markov_io.size() - 1);
    realization = era(build_hankels(tail, rows, cols), cfg.order_rule, r, m);
    const Eigen::MatrixXd k = fit_observer_gain(realization.f, realization.c, observer_gain_markov(markov, p));
    if (!is_schur(Eigen::MatrixXd(realization.f - k * realization.c))) {
      warnings.emplace_back("fitted observer gain does not make A - KC Schur");
    }
    model.emplace(realization.f, realization.l, realization.c, markov.d_block, ts, k);
  }

  OkidResult out{*model, ss_poles(*model), realization.singular_values, realization.retained_order,
                 markov.residual_norm, markov.regression_rank, markov.rank_deficient, std::move(warnings)};
  return out;
}

OkidResult okid_era(std::span<const double> u, std::span<const double> y, const OkidConfig& cfg, double ts) {
  const Eigen::Map<const Eigen::RowVectorXd> um(u.data(), static_cast<Eigen::Index>(u.size()));
  const Eigen::Map<const Eigen::RowVectorXd> ym(y.data(), static_cast<Eigen::Index>(y.size()));
  return okid_era(Eigen::MatrixXd(um), Eigen::MatrixXd(ym), cfg, ts);
}

}  // namespace sprid
