#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "sprid/lti.hpp"

namespace sprid {

/// One pole group of an orthonormal basis: a real pole (Laguerre) or a complex
/// pair (Kautz) with denominator q^2 + b(c-1) q - c.
struct BasisAtom {
  enum class Kind { kLaguerre, kKautz };

  Kind kind = Kind::kLaguerre;
  double a = 0.0;  ///< Laguerre pole
  double b = 0.0;  ///< Kautz
  double c = 0.0;  ///< Kautz

  static BasisAtom laguerre(double a);
  static BasisAtom kautz(double b, double c);

  /// Number of basis functions one pass over this atom contributes (1 or 2).
  int section_size() const { return kind == Kind::kKautz ? 2 : 1; }
  /// Section denominator: q - a, or q^2 + b(c-1) q - c.
  Poly denominator() const;
  /// Reciprocal of the denominator; numerator of the atom's all-pass factor.
  Poly allpass_numerator() const;

  /// "laguerre:<a>" or "kautz:<b>:<c>".
  std::string to_string() const;
  static BasisAtom parse(const std::string& text);
};

inline constexpr int kMaxBasisFunctions = 16;

struct BasisSpec {
  std::vector<BasisAtom> atoms;
  int n_funcs = 8;
  /// Prepend the constant function f0(q) = 1.
  bool include_feedthrough = true;

  /// Throws ConfigError on |a|, |b|, |c| >= 1, n_funcs outside [1, 16] or no atoms.
  void validate() const;
};

/// Ordered orthonormal filters over a shared nested denominator.
///
/// Filters are generated by cycling through the atoms: each atom contributes its
/// first section multiplied by the all-pass factors of every section before it.
/// A single Laguerre atom yields L_k(q, a) and a single Kautz atom yields the
/// Kautz functions Psi_k(q) for k = 1..N.
class GobfBasis {
 public:
  GobfBasis(const BasisSpec& spec, double ts);

  const BasisSpec& spec() const noexcept { return spec_; }
  const std::vector<RationalTf>& filters() const noexcept { return filters_; }
  std::size_t size() const noexcept { return filters_.size(); }
  double ts() const noexcept { return ts_; }

  /// Least common denominator of all filters (the last filter's denominator).
  const Poly& common_denominator() const noexcept { return lcd_; }
  /// cofactors()[i] * filters()[i].den() == common_denominator().
  const std::vector<Poly>& cofactors() const noexcept { return cofactors_; }

 private:
  BasisSpec spec_;
  double ts_;
  std::vector<RationalTf> filters_;
  Poly lcd_;
  std::vector<Poly> cofactors_;
};

GobfBasis laguerre_basis(double a, int n_funcs, double ts, bool include_feedthrough = true);
GobfBasis kautz_basis(double b, double c, int n_funcs, double ts, bool include_feedthrough = true);

/// Entry (i, n) = f_i(e^{j omega_n ts}).
Eigen::MatrixXcd eval_basis(const GobfBasis& basis, std::span<const double> omegas);

/// (ts / 2 pi) * integral over [-pi/ts, pi/ts] of f_l(e^{jwts}) f_m(e^{-jwts}) dw by the
/// trapezoid rule with n_quad points around the full circle.
Eigen::MatrixXd gram_matrix(const GobfBasis& basis, int n_quad = 4096);

/// theta^T Phi(q) as one rational function over the common denominator.
RationalTf combine(std::span<const double> theta, const GobfBasis& basis);

/// Maps identified poles to basis atoms: a real pole rho gives Laguerre(rho), a
/// complex pair with quadratic q^2 + alpha q + beta gives Kautz(c = -beta,
/// b = alpha / (c - 1)). Atoms are ordered by pole modulus, largest first.
std::vector<BasisAtom> atoms_from_poles(std::span<const Complex> poles, double imag_tolerance = 1e-8);

}  // namespace sprid
