#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sprid/polynomial.hpp"

namespace sprid {

using Complex = std::complex<double>;

/// SISO discrete-time transfer function num(q)/den(q) with sampling period ts.
///
/// Coefficients are stored in descending powers of q. Leading zeros of the
/// numerator are trimmed on construction; the denominator must have a nonzero
/// leading coefficient and the function must be proper.
class RationalTf {
 public:
  RationalTf(Poly num, Poly den, double ts = 1.0);

  const Poly& num() const noexcept { return num_; }
  const Poly& den() const noexcept { return den_; }
  double ts() const noexcept { return ts_; }

  /// deg(den) - deg(num). Zero is necessary (not sufficient) for discrete-time SPR.
  int relative_degree() const;

 private:
  Poly num_;
  Poly den_;
  double ts_;
};

/// x(k+1) = A x(k) + B u(k),  y(k) = C x(k) + D u(k), optionally with a
/// steady-state observer gain K.
class StateSpaceModel {
 public:
  StateSpaceModel(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c, Eigen::MatrixXd d,
                  double ts = 1.0, std::optional<Eigen::MatrixXd> gain = std::nullopt);

  const Eigen::MatrixXd& a() const noexcept { return a_; }
  const Eigen::MatrixXd& b() const noexcept { return b_; }
  const Eigen::MatrixXd& c() const noexcept { return c_; }
  const Eigen::MatrixXd& d() const noexcept { return d_; }
  const std::optional<Eigen::MatrixXd>& gain() const noexcept { return gain_; }
  double ts() const noexcept { return ts_; }

  Eigen::Index states() const noexcept { return a_.rows(); }
  Eigen::Index inputs() const noexcept { return b_.cols(); }
  Eigen::Index outputs() const noexcept { return c_.rows(); }

 private:
  Eigen::MatrixXd a_, b_, c_, d_;
  double ts_;
  std::optional<Eigen::MatrixXd> gain_;
};

/// Complex frequency response samples on a grid of angular frequencies in [0, pi/ts].
class FrequencyResponse {
 public:
  FrequencyResponse(std::vector<double> omegas, std::vector<Complex> values, double ts);

  const std::vector<double>& omegas() const noexcept { return omegas_; }
  const std::vector<Complex>& values() const noexcept { return values_; }
  double ts() const noexcept { return ts_; }
  std::size_t size() const noexcept { return omegas_.size(); }

 private:
  std::vector<double> omegas_;
  std::vector<Complex> values_;
  double ts_;
};

/// tf(e^{j omega ts}) for each omega. Throws EvaluationError naming omega when
/// the denominator vanishes there, ConfigError when omega lies outside [0, pi/ts].
std::vector<Complex> eval_freq(const RationalTf& tf, std::span<const double> omegas);
Complex eval_freq(const RationalTf& tf, double omega);

struct SchurCheck {
  bool schur = false;
  std::vector<Complex> poles;
};

/// Default margin for the strict |pole| < 1 test.
inline constexpr double kSchurTolerance = 1e-9;

/// Poles via companion-matrix eigenvalues; schur iff every |pole| < 1 - tolerance.
SchurCheck is_schur(const RationalTf& tf, double tolerance = kSchurTolerance);

/// Same test on the eigenvalues of a square matrix.
bool is_schur(const Eigen::MatrixXd& a, double tolerance = kSchurTolerance);

struct SprMargin {
  std::vector<double> real_parts;
  double minimum = 0.0;
  double argmin_omega = 0.0;
};

/// Re tf(e^{j omega ts}) on the grid. Real coefficients make Re even in omega,
/// so [0, pi/ts] covers the whole circle.
SprMargin spr_margin(const RationalTf& tf, std::span<const double> omegas);

/// [D, CB, CAB, ..., CA^{count-2}B].
std::vector<Eigen::MatrixXd> ss_to_markov(const StateSpaceModel& ss, int count);

/// Noise sequences, one column per time step. Empty matrices mean "no noise".
struct SimulationNoise {
  Eigen::MatrixXd process;
  Eigen::MatrixXd measurement;
};

/// Runs the state recursion. u is inputs x steps; returns outputs x steps.
Eigen::MatrixXd simulate(const StateSpaceModel& ss, const Eigen::MatrixXd& u,
                         const SimulationNoise& noise = {},
                         const Eigen::VectorXd& x0 = Eigen::VectorXd());

/// SISO convenience overload.
std::vector<double> simulate(const StateSpaceModel& ss, std::span<const double> u);

/// Eigenvalues of A sorted by (modulus, angle).
std::vector<Complex> ss_poles(const StateSpaceModel& ss);

/// Sorts a pole set by (modulus, angle) with a small tie tolerance on the modulus.
void sort_poles(std::vector<Complex>& poles);

/// SISO transfer function of a state-space model.
RationalTf ss_to_tf(const StateSpaceModel& ss);

/// C (zI - A)^{-1} B + D at z = e^{j omega ts}, SISO only.
std::vector<Complex> ss_eval_freq(const StateSpaceModel& ss, std::span<const double> omegas);

/// count points uniformly spaced over [0, pi/ts], both ends included.
std::vector<double> uniform_grid(double ts, std::size_t count);

/// Inserts factor-1 equally spaced points inside every interval of a grid, so the
/// result contains the original points.
std::vector<double> refine_grid(std::span<const double> omegas, int factor);

/// Seeded zero-mean Gaussian sequence for building noisy test data.
std::vector<double> gaussian_sequence(std::size_t count, double sigma, std::uint64_t seed);

}  // namespace sprid
