#include "sprid/gobf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "sprid/error.hpp"

namespace sprid {

BasisAtom BasisAtom::laguerre(double a) {
  BasisAtom atom;
  atom.kind = Kind::kLaguerre;
  atom.a = a;
  return atom;
}

BasisAtom BasisAtom::kautz(double b, double c) {
  BasisAtom atom;
  atom.kind = Kind::kKautz;
  atom.b = b;
  atom.c = c;
  return atom;
}

Poly BasisAtom::denominator() const {
  if (kind == Kind::kLaguerre) return {1.0, -a};
  return {1.0, b * (c - 1.0), -c};
}

Poly BasisAtom::allpass_numerator() const { return poly::reciprocal(denominator()); }

std::string BasisAtom::to_string() const {
  if (kind == Kind::kLaguerre) return fmt::format("laguerre:{}", a);
  return fmt::format("kautz:{}:{}", b, c);
}

namespace {

double parse_number(const std::string& text, const std::string& context) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("basis atom '{}': '{}' is not a number", context, text));
  }
  if (used != text.size()) throw ConfigError(fmt::format("basis atom '{}': '{}' is not a number", context, text));
  return value;
}

}  // namespace

BasisAtom BasisAtom::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() == 2 && parts[0] == "laguerre") return laguerre(parse_number(parts[1], text));
  if (parts.size() == 3 && parts[0] == "kautz") return kautz(parse_number(parts[1], text), parse_number(parts[2], text));
  throw ConfigError(fmt::format("basis atom '{}': expected laguerre:<a> or kautz:<b>:<c>", text));
}

void BasisSpec::validate() const {
  if (atoms.empty()) throw ConfigError("basis: no atoms given");
  if (n_funcs < 1 || n_funcs > kMaxBasisFunctions) {
    throw ConfigError(fmt::format("basis: n_funcs must lie in [1, {}], got {}", kMaxBasisFunctions, n_funcs));
  }
  for (const BasisAtom& atom : atoms) {
    const bool ok = atom.kind == BasisAtom::Kind::kLaguerre
                        ? std::abs(atom.a) < 1.0
                        : std::abs(atom.b) < 1.0 && std::abs(atom.c) < 1.0;
    if (!ok) throw ConfigError(fmt::format("basis: parameters of {} must have modulus < 1", atom.to_string()));
  }
}

GobfBasis::GobfBasis(const BasisSpec& spec, double ts) : spec_(spec), ts_(ts) {
  spec_.validate();

  // Each atom pass appends one denominator factor; filter i uses the first
  // factor_count[i] of them.
  std::vector<Poly> factors;
  std::vector<Poly> numerators;
  std::vector<std::size_t> factor_count;

  if (spec_.include_feedthrough) {
    numerators.push_back({1.0});
    factor_count.push_back(0);
  }

  Poly prefix_num{1.0};
  int produced = 0;
  while (produced < spec_.n_funcs) {
    for (const BasisAtom& atom : spec_.atoms) {
      if (produced >= spec_.n_funcs) break;
      factors.push_back(atom.denominator());
      std::vector<Poly> section;
      if (atom.kind == BasisAtom::Kind::kLaguerre) {
        section.push_back({std::sqrt(1.0 - atom.a * atom.a)});
      } else {
        const double s = std::sqrt(1.0 - atom.c * atom.c);
        section.push_back({s, -s * atom.b});
        section.push_back({s * std::sqrt(1.0 - atom.b * atom.b)});
      }
      for (const Poly& num : section) {
        if (produced >= spec_.n_funcs) break;
        numerators.push_back(poly::multiply(prefix_num, num));
        factor_count.push_back(factors.size());
        ++produced;
      }
      prefix_num = poly::multiply(prefix_num, atom.allpass_numerator());
    }
  }

  lcd_ = {1.0};
  for (const Poly& f : factors) lcd_ = poly::multiply(lcd_, f);

  for (std::size_t i = 0; i < numerators.size(); ++i) {
    Poly den{1.0};
    for (std::size_t j = 0; j < factor_count[i]; ++j) den = poly::multiply(den, factors[j]);
    Poly cof{1.0};
    for (std::size_t j = factor_count[i]; j < factors.size(); ++j) cof = poly::multiply(cof, factors[j]);
    filters_.emplace_back(numerators[i], std::move(den), ts_);
    cofactors_.push_back(std::move(cof));
  }

  for (const RationalTf& f : filters_) {
    if (!is_schur(f).schur) throw NumericalError("basis: generated filter is not Schur");
  }
}

GobfBasis laguerre_basis(double a, int n_funcs, double ts, bool include_feedthrough) {
  return GobfBasis(BasisSpec{{BasisAtom::laguerre(a)}, n_funcs, include_feedthrough}, ts);
}

GobfBasis kautz_basis(double b, double c, int n_funcs, double ts, bool include_feedthrough) {
  return GobfBasis(BasisSpec{{BasisAtom::kautz(b, c)}, n_funcs, include_feedthrough}, ts);
}

Eigen::MatrixXcd eval_basis(const GobfBasis& basis, std::span<const double> omegas) {
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(basis.size()), static_cast<Eigen::Index>(omegas.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const std::vector<Complex> row = eval_freq(basis.filters()[i], omegas);
    for (std::size_t n = 0; n < row.size(); ++n) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = row[n];
  }
  return out;
}

Eigen::MatrixXd gram_matrix(const GobfBasis& basis, int n_quad) {
  if (n_quad < 4) throw ConfigError("gram_matrix: n_quad must be >= 4");
  // Integrand is even in omega for real filters: trapezoid on [0, pi/ts] with
  // halved end weights equals the full-circle rule with n_quad points.
  const int half = n_quad / 2;
  const std::vector<double> grid = uniform_grid(basis.ts(), static_cast<std::size_t>(half) + 1);
  Eigen::MatrixXcd phi = eval_basis(basis, grid);
  phi.col(0) *= std::sqrt(0.5);
  phi.col(half) *= std::sqrt(0.5);
  return (phi * phi.adjoint()).real() / static_cast<double>(half);
}

RationalTf combine(std::span<const double> theta, const GobfBasis& basis) {
  if (theta.size() != basis.size()) {
    throw ConfigError(fmt::format("combine: theta has {} entries, basis has {} filters", theta.size(), basis.size()));
  }
  Poly num{0.0};
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (theta[i] == 0.0) continue;
    const Poly term = poly::multiply(basis.filters()[i].num(), basis.cofactors()[i]);
    num = poly::add(num, poly::scale(term, theta[i]));
  }
  return RationalTf(num, basis.common_denominator(), basis.ts());
}

std::vector<BasisAtom> atoms_from_poles(std::span<const Complex> poles, double imag_tolerance) {
  struct Entry {
    double modulus;
    BasisAtom atom;
  };
  std::vector<Entry> entries;
  for (const Complex& p : poles) {
    if (!(std::abs(p) < 1.0)) {
      throw ConfigError(fmt::format("cannot build an orthonormal basis from pole {}{:+}j (|p| >= 1)", p.real(), p.imag()));
    }
    if (std::abs(p.imag()) <= imag_tolerance * std::max(1.0, std::abs(p))) {
      entries.push_back({std::abs(p), BasisAtom::laguerre(p.real())});
    } else if (p.imag() > 0.0) {
      const double alpha = -2.0 * p.real();
      const double beta = std::norm(p);
      const double c = -beta;
      entries.push_back({std::abs(p), BasisAtom::kautz(alpha / (c - 1.0), c)});
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) { return x.modulus > y.modulus; });
  std::vector<BasisAtom> out;
  out.reserve(entries.size());
  for (const Entry& e : entries) out.push_back(e.atom);
  return out;
}

}  // namespace sprid
