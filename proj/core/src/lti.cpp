#include "sprid/lti.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include <fmt/format.h>

#include "sprid/error.hpp"

namespace sprid {

RationalTf::RationalTf(Poly num, Poly den, double ts) : num_(poly::trim(num)), den_(std::move(den)), ts_(ts) {
  if (den_.empty()) throw ConfigError("transfer function: empty denominator");
  if (den_.front() == 0.0) throw ConfigError("transfer function: leading denominator coefficient is zero");
  if (!(ts_ > 0.0) || !std::isfinite(ts_)) throw ConfigError("transfer function: sampling period must be positive");
  if (num_.size() > den_.size()) throw ConfigError("transfer function: improper (deg num > deg den)");
  for (double c : num_) {
    if (!std::isfinite(c)) throw ConfigError("transfer function: non-finite numerator coefficient");
  }
  for (double c : den_) {
    if (!std::isfinite(c)) throw ConfigError("transfer function: non-finite denominator coefficient");
  }
}

int RationalTf::relative_degree() const { return poly::degree(den_) - poly::degree(num_); }

StateSpaceModel::StateSpaceModel(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c, Eigen::MatrixXd d,
                                 double ts, std::optional<Eigen::MatrixXd> gain)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)), ts_(ts), gain_(std::move(gain)) {
  const auto n = a_.rows();
  if (a_.cols() != n) throw ConfigError("state-space: A must be square");
  if (b_.rows() != n) throw ConfigError("state-space: B row count must match A");
  if (c_.cols() != n) throw ConfigError("state-space: C column count must match A");
  if (d_.rows() != c_.rows() || d_.cols() != b_.cols()) throw ConfigError("state-space: D must be outputs x inputs");
  if (gain_ && (gain_->rows() != n || gain_->cols() != c_.rows())) {
    throw ConfigError("state-space: K must be states x outputs");
  }
  if (!(ts_ > 0.0)) throw ConfigError("state-space: sampling period must be positive");
}

FrequencyResponse::FrequencyResponse(std::vector<double> omegas, std::vector<Complex> values, double ts)
    : omegas_(std::move(omegas)), values_(std::move(values)), ts_(ts) {
  if (!(ts_ > 0.0)) throw ConfigError("frequency response: sampling period must be positive");
  if (omegas_.size() != values_.size()) throw ConfigError("frequency response: omegas/values length mismatch");
  if (omegas_.empty()) throw ConfigError("frequency response: no samples");
  const double nyquist = std::numbers::pi / ts_;
  for (std::size_t i = 0; i < omegas_.size(); ++i) {
    const double w = omegas_[i];
    if (!(w >= 0.0) || w > nyquist * (1.0 + 1e-12)) {
      throw ConfigError(fmt::format("frequency response: omega={} outside [0, pi/ts={}]", w, nyquist));
    }
    if (i > 0 && !(w > omegas_[i - 1])) throw ConfigError("frequency response: omegas must be strictly increasing");
  }
}

namespace {

void check_omega(double omega, double ts) {
  const double nyquist = std::numbers::pi / ts;
  if (!(omega >= 0.0) || omega > nyquist * (1.0 + 1e-12)) {
    throw ConfigError(fmt::format("frequency {} rad/s outside [0, {}]", omega, nyquist));
  }
}

}  // namespace

Complex eval_freq(const RationalTf& tf, double omega) {
  check_omega(omega, tf.ts());
  const Complex z = std::polar(1.0, omega * tf.ts());
  const Complex den = poly::evaluate(tf.den(), z);
  double scale = 0.0;
  for (double c : tf.den()) scale += std::abs(c);
  if (std::abs(den) <= 64.0 * std::numeric_limits<double>::epsilon() * scale) {
    throw EvaluationError(fmt::format("pole on the unit circle at omega={} rad/s", omega), omega);
  }
  return poly::evaluate(tf.num(), z) / den;
}

std::vector<Complex> eval_freq(const RationalTf& tf, std::span<const double> omegas) {
  std::vector<Complex> out;
  out.reserve(omegas.size());
  for (double w : omegas) out.push_back(eval_freq(tf, w));
  return out;
}

SchurCheck is_schur(const RationalTf& tf, double tolerance) {
  SchurCheck out;
  out.poles = poly::roots(tf.den());
  sort_poles(out.poles);
  out.schur = std::all_of(out.poles.begin(), out.poles.end(),
                          [&](const Complex& p) { return std::abs(p) < 1.0 - tolerance; });
  return out;
}

bool is_schur(const Eigen::MatrixXd& a, double tolerance) {
  if (a.rows() == 0) return true;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue iteration did not converge");
  return (solver.eigenvalues().array().abs() < 1.0 - tolerance).all();
}

SprMargin spr_margin(const RationalTf& tf, std::span<const double> omegas) {
  SprMargin out;
  out.real_parts.reserve(omegas.size());
  out.minimum = std::numeric_limits<double>::infinity();
  for (double w : omegas) {
    const double re = eval_freq(tf, w).real();
    if (re < out.minimum) {
      out.minimum = re;
      out.argmin_omega = w;
    }
    out.real_parts.push_back(re);
  }
  return out;
}

std::vector<Eigen::MatrixXd> ss_to_markov(const StateSpaceModel& ss, int count) {
  if (count < 1) throw ConfigError("ss_to_markov: count must be >= 1");
  std::vector<Eigen::MatrixXd> out;
  out.reserve(count);
  out.push_back(ss.d());
  Eigen::MatrixXd ak_b = ss.b();
  for (int k = 1; k < count; ++k) {
    out.push_back(ss.c() * ak_b);
    ak_b = ss.a() * ak_b;
  }
  return out;
}

Eigen::MatrixXd simulate(const StateSpaceModel& ss, const Eigen::MatrixXd& u, const SimulationNoise& noise,
                         const Eigen::VectorXd& x0) {
  const auto steps = u.cols();
  if (u.rows() != ss.inputs()) throw ConfigError("simulate: input dimension mismatch");
  const bool has_wp = noise.process.size() > 0;
  const bool has_wm = noise.measurement.size() > 0;
  if (has_wp && (noise.process.rows() != ss.states() || noise.process.cols() != steps)) {
    throw ConfigError("simulate: process noise must be states x steps");
  }
  if (has_wm && (noise.measurement.rows() != ss.outputs() || noise.measurement.cols() != steps)) {
    throw ConfigError("simulate: measurement noise must be outputs x steps");
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(ss.states());
  if (x0.size() > 0) {
    if (x0.size() != ss.states()) throw ConfigError("simulate: initial state dimension mismatch");
    x = x0;
  }
  Eigen::MatrixXd y(ss.outputs(), steps);
  for (Eigen::Index k = 0; k < steps; ++k) {
    y.col(k) = ss.c() * x + ss.d() * u.col(k);
    if (has_wm) y.col(k) += noise.measurement.col(k);
    Eigen::VectorXd next = ss.a() * x + ss.b() * u.col(k);
    if (has_wp) next += noise.process.col(k);
    x = std::move(next);
  }
  return y;
}

std::vector<double> simulate(const StateSpaceModel& ss, std::span<const double> u) {
  if (ss.inputs() != 1 || ss.outputs() != 1) throw ConfigError("simulate: SISO overload needs a SISO model");
  const Eigen::Map<const Eigen::RowVectorXd> um(u.data(), static_cast<Eigen::Index>(u.size()));
  const Eigen::MatrixXd y = simulate(ss, Eigen::MatrixXd(um));
  return {y.data(), y.data() + y.size()};
}

void sort_poles(std::vector<Complex>& poles) {
  std::sort(poles.begin(), poles.end(), [](const Complex& a, const Complex& b) {
    const double ma = std::abs(a);
    const double mb = std::abs(b);
    if (std::abs(ma - mb) > 1e-9 * std::max(1.0, std::max(ma, mb))) return ma < mb;
    return std::arg(a) < std::arg(b);
  });
}

std::vector<Complex> ss_poles(const StateSpaceModel& ss) {
  if (ss.states() == 0) return {};
  Eigen::EigenSolver<Eigen::MatrixXd> solver(ss.a(), false);
  if (solver.info() != Eigen::Success) throw NumericalError("ss_poles: eigenvalue iteration did not converge");
  const Eigen::VectorXcd ev = solver.eigenvalues();
  std::vector<Complex> out(ev.data(), ev.data() + ev.size());
  sort_poles(out);
  return out;
}

namespace {

Poly characteristic_polynomial(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return {1.0};
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue iteration did not converge");
  const Eigen::VectorXcd ev = solver.eigenvalues();
  return poly::from_roots(std::span<const Complex>(ev.data(), static_cast<std::size_t>(ev.size())));
}

}  // namespace

RationalTf ss_to_tf(const StateSpaceModel& ss) {
  if (ss.inputs() != 1 || ss.outputs() != 1) throw ConfigError("ss_to_tf: SISO models only");
  const Poly den = characteristic_polynomial(ss.a());
  // C adj(zI-A) B = det(zI - A + BC) - det(zI - A)
  const Poly closed = characteristic_polynomial(ss.a() - ss.b() * ss.c());
  Poly num = poly::add(closed, poly::scale(den, -1.0));
  num = poly::add(num, poly::scale(den, ss.d()(0, 0)));
  return RationalTf(num, den, ss.ts());
}

std::vector<Complex> ss_eval_freq(const StateSpaceModel& ss, std::span<const double> omegas) {
  if (ss.inputs() != 1 || ss.outputs() != 1) throw ConfigError("ss_eval_freq: SISO models only");
  const auto n = ss.states();
  const Eigen::MatrixXcd a = ss.a().cast<Complex>();
  const Eigen::VectorXcd b = ss.b().cast<Complex>();
  const Eigen::RowVectorXcd c = ss.c().cast<Complex>();
  std::vector<Complex> out;
  out.reserve(omegas.size());
  for (double w : omegas) {
    check_omega(w, ss.ts());
    const Complex z = std::polar(1.0, w * ss.ts());
    const Eigen::MatrixXcd m = z * Eigen::MatrixXcd::Identity(n, n) - a;
    const Eigen::VectorXcd x = m.partialPivLu().solve(b);
    out.push_back((c * x)(0) + ss.d()(0, 0));
  }
  return out;
}

std::vector<double> uniform_grid(double ts, std::size_t count) {
  if (!(ts > 0.0)) throw ConfigError("uniform_grid: sampling period must be positive");
  if (count < 2) throw ConfigError("uniform_grid: need at least two points");
  const double nyquist = std::numbers::pi / ts;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = nyquist * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  out.back() = nyquist;
  return out;
}

std::vector<double> refine_grid(std::span<const double> omegas, int factor) {
  if (factor < 1) throw ConfigError("refine_grid: factor must be >= 1");
  if (omegas.empty()) return {};
  std::vector<double> out;
  out.reserve((omegas.size() - 1) * static_cast<std::size_t>(factor) + 1);
  for (std::size_t i = 0; i + 1 < omegas.size(); ++i) {
    const double lo = omegas[i];
    const double hi = omegas[i + 1];
    for (int j = 0; j < factor; ++j) out.push_back(lo + (hi - lo) * j / factor);
  }
  out.push_back(omegas.back());
  return out;
}

std::vector<double> gaussian_sequence(std::size_t count, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  std::vector<double> out(count);
  for (double& v : out) v = dist(rng);
  return out;
}

}  // namespace sprid
