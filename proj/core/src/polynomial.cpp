#include "sprid/polynomial.hpp"

#include <Eigen/Dense>
#include <algorithm>

#include "sprid/error.hpp"

namespace sprid::poly {

Poly multiply(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {0.0};
  Poly out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Poly add(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::max(a.size(), b.size());
  Poly out(n, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[n - a.size() + i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[n - b.size() + i] += b[i];
  return out;
}

Poly scale(std::span<const double> a, double s) {
  Poly out(a.begin(), a.end());
  for (double& c : out) c *= s;
  return out;
}

Poly power(std::span<const double> a, int exponent) {
  if (exponent < 0) throw ConfigError("poly::power: negative exponent");
  Poly out{1.0};
  for (int i = 0; i < exponent; ++i) out = multiply(out, a);
  return out;
}

Poly trim(std::span<const double> a) {
  auto first = std::find_if(a.begin(), a.end(), [](double c) { return c != 0.0; });
  if (first == a.end()) return {0.0};
  return Poly(first, a.end());
}

int degree(std::span<const double> a) {
  auto first = std::find_if(a.begin(), a.end(), [](double c) { return c != 0.0; });
  if (first == a.end()) return 0;
  return static_cast<int>(std::distance(first, a.end())) - 1;
}

std::complex<double> evaluate(std::span<const double> a, std::complex<double> z) {
  std::complex<double> acc{0.0, 0.0};
  for (double c : a) acc = acc * z + c;
  return acc;
}

Poly reciprocal(std::span<const double> a) { return Poly(a.rbegin(), a.rend()); }

Poly from_roots(std::span<const std::complex<double>> roots) {
  std::vector<std::complex<double>> acc{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(acc.size() + 1, 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      next[i] += acc[i];
      next[i + 1] -= acc[i] * r;
    }
    acc = std::move(next);
  }
  Poly out(acc.size());
  std::transform(acc.begin(), acc.end(), out.begin(), [](auto c) { return c.real(); });
  return out;
}

std::vector<std::complex<double>> roots(std::span<const double> a) {
  const Poly p = trim(a);
  const int n = static_cast<int>(p.size()) - 1;
  if (n <= 0) return {};
  if (n == 1) return {std::complex<double>(-p[1] / p[0], 0.0)};

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) companion(0, j) = -p[j + 1] / p[0];
  companion.block(1, 0, n - 1, n - 1).setIdentity();

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("polynomial root finding: companion eigenvalue iteration did not converge");
  }
  const Eigen::VectorXcd ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace sprid::poly
