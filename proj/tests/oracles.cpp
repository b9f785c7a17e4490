#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace oracle {

QpAnswer enumerate_qp(const sprid::QpProblem& qp, double tol) {
  const Eigen::Index n = qp.variables();
  const Eigen::Index m = qp.constraints();
  QpAnswer best;
  best.objective = std::numeric_limits<double>::infinity();
  const double scale = 1.0 + qp.hessian.cwiseAbs().maxCoeff() + qp.linear.cwiseAbs().maxCoeff();
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> w;
    for (int i = 0; i < m; ++i) {
      if (mask & (1u << i)) w.push_back(i);
    }
    const Eigen::Index k = static_cast<Eigen::Index>(w.size());
    if (k > n) continue;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd rhs(n + k);
    kkt.topLeftCorner(n, n) = qp.hessian;
    rhs.head(n) = -qp.linear;
    for (Eigen::Index j = 0; j < k; ++j) {
      kkt.block(0, n + j, n, 1) = qp.ineq_matrix.row(w[j]).transpose();
      kkt.block(n + j, 0, 1, n) = qp.ineq_matrix.row(w[j]);
      rhs(n + j) = qp.ineq_rhs(w[j]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (lu.rank() < n + k) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd x = sol.head(n);
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
    for (Eigen::Index j = 0; j < k; ++j) lambda(w[j]) = sol(n + j);
    if (m > 0 && (qp.ineq_matrix * x - qp.ineq_rhs).maxCoeff() > tol * scale) continue;
    if (m > 0 && lambda.minCoeff() < -tol * scale) continue;
    const double obj = 0.5 * x.dot(qp.hessian * x) + qp.linear.dot(x) + qp.constant;
    if (obj < best.objective) {
      best.feasible = true;
      best.x = x;
      best.multipliers = lambda;
      best.objective = obj;
      best.active = w;
    }
  }
  return best;
}

bool jury_schur(std::vector<double> c) {
  while (c.size() > 1 && c.front() == 0.0) c.erase(c.begin());
  while (c.size() > 1) {
    const std::size_t n = c.size() - 1;
    const double k = c[n] / c[0];
    if (!(std::abs(k) < 1.0)) return false;
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = c[i] - k * c[n - i];
    c = std::move(next);
  }
  return true;
}

Complex direct_eval(const std::vector<double>& num, const std::vector<double>& den, double omega, double ts) {
  const Complex z = std::polar(1.0, omega * ts);
  const auto sum = [&](const std::vector<double>& p) {
    Complex s = 0.0;
    const int deg = static_cast<int>(p.size()) - 1;
    for (int i = 0; i <= deg; ++i) s += p[static_cast<std::size_t>(i)] * std::pow(z, deg - i);
    return s;
  };
  return sum(num) / sum(den);
}

Complex laguerre_formula(double a, int k, Complex z) {
  return std::sqrt(1.0 - a * a) / (z - a) * std::pow((1.0 - a * z) / (z - a), k - 1);
}

Complex kautz_formula(double b, double c, int k, Complex z) {
  const Complex den = z * z + b * (c - 1.0) * z - c;
  const Complex bracket = (-c * z * z + b * (c - 1.0) * z + 1.0) / den;
  if (k % 2 == 1) return std::sqrt(1.0 - c * c) * (z - b) / den * std::pow(bracket, (k - 1) / 2);
  return std::sqrt((1.0 - c * c) * (1.0 - b * b)) / den * std::pow(bracket, (k - 2) / 2);
}

Eigen::MatrixXd gram_midpoint(const std::vector<sprid::RationalTf>& filters, int points) {
  const std::size_t nf = filters.size();
  const double ts = filters.front().ts();
  Eigen::MatrixXcd values(static_cast<Eigen::Index>(nf), points);
  for (int j = 0; j < points; ++j) {
    const double w = (-std::numbers::pi + (j + 0.5) * 2.0 * std::numbers::pi / points) / ts;
    for (std::size_t i = 0; i < nf; ++i) {
      values(static_cast<Eigen::Index>(i), j) = direct_eval(filters[i].num(), filters[i].den(), w, ts);
    }
  }
  // (ts / 2 pi) * sum * (2 pi / (ts * points)) = sum / points
  const Eigen::MatrixXcd g = values * values.adjoint() / static_cast<double>(points);
  return g.real();
}

std::vector<Eigen::MatrixXd> markov_by_powers(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                              const Eigen::MatrixXd& c, const Eigen::MatrixXd& d, int count) {
  std::vector<Eigen::MatrixXd> out{d};
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  for (int k = 1; k < count; ++k) {
    out.push_back(c * power * b);
    power = power * a;
  }
  return out;
}

RandomSystem random_siso(std::mt19937_64& rng, int order, double ts) {
  std::uniform_real_distribution<double> mod(0.2, 0.9);
  std::uniform_real_distribution<double> ang(0.15, std::numbers::pi - 0.15);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (;;) {
    std::vector<Complex> poles;
    while (static_cast<int>(poles.size()) < order) {
      if (order - static_cast<int>(poles.size()) >= 2 && coin(rng)) {
        const Complex p = std::polar(mod(rng), ang(rng));
        poles.push_back(p);
        poles.push_back(std::conj(p));
      } else {
        poles.emplace_back((coin(rng) ? 1.0 : -1.0) * mod(rng), 0.0);
      }
    }
    double spacing = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poles.size(); ++i) {
      for (std::size_t j = i + 1; j < poles.size(); ++j) spacing = std::min(spacing, std::abs(poles[i] - poles[j]));
    }
    if (spacing < 0.1) continue;
    // Distinct (non-conjugate) poles also differ in modulus, so sorting by
    // (modulus, angle) pairs recovered and true poles unambiguously.
    bool moduli_ok = true;
    for (std::size_t i = 0; i < poles.size(); ++i) {
      for (std::size_t j = i + 1; j < poles.size(); ++j) {
        const bool conjugates = std::abs(poles[i] - std::conj(poles[j])) < 1e-12;
        if (!conjugates && std::abs(std::abs(poles[i]) - std::abs(poles[j])) < 0.02) moduli_ok = false;
      }
    }
    if (!moduli_ok) continue;

    // Real modal form: 1x1 blocks for real poles, rotation blocks for pairs.
    const Eigen::Index n = order;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd b(n, 1);
    Eigen::MatrixXd c(1, n);
    std::vector<double> residue;
    for (Eigen::Index i = 0; i < n;) {
      const Complex p = poles[static_cast<std::size_t>(i)];
      if (p.imag() == 0.0) {
        a(i, i) = p.real();
        b(i, 0) = unit(rng);
        c(0, i) = unit(rng);
        residue.push_back(std::abs(b(i, 0) * c(0, i)));
        i += 1;
      } else {
        a(i, i) = p.real();
        a(i, i + 1) = p.imag();
        a(i + 1, i) = -p.imag();
        a(i + 1, i + 1) = p.real();
        b(i, 0) = unit(rng);
        b(i + 1, 0) = unit(rng);
        c(0, i) = unit(rng);
        c(0, i + 1) = unit(rng);
        // |residue| of the pair: |c_blk (v)| |w' b_blk| with v, w the complex eigenvectors.
        const Complex cv = Complex(c(0, i), 0.0) + Complex(0.0, 1.0) * c(0, i + 1);
        const Complex wb = Complex(b(i, 0), 0.0) - Complex(0.0, 1.0) * b(i + 1, 0);
        residue.push_back(0.5 * std::abs(cv * wb));
        i += 2;
      }
    }
    const double rmax = *std::max_element(residue.begin(), residue.end());
    const double rmin = *std::min_element(residue.begin(), residue.end());
    if (rmin < 0.1 * rmax) continue;
    Eigen::MatrixXd d(1, 1);
    d(0, 0) = unit(rng);
    std::vector<Complex> sorted = poles;
    sprid::sort_poles(sorted);
    return {sprid::StateSpaceModel(a, b, c, d, ts), sorted};
  }
}

double sorted_pole_distance(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  sprid::sort_poles(a);
  sprid::sort_poles(b);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double pole_distance(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const Complex& p : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [&](const Complex& x, const Complex& y) { return std::abs(x - p) < std::abs(y - p); });
    worst = std::max(worst, std::abs(*it - p));
    b.erase(it);
  }
  return worst;
}

}  // namespace oracle
