#pragma once

#include <complex>
#include <span>
#include <vector>

namespace sprid {

/// Real polynomial in q, coefficients in descending powers: {1, 0.4, 0.5} is q^2 + 0.4q + 0.5.
using Poly = std::vector<double>;

namespace poly {

Poly multiply(std::span<const double> a, std::span<const double> b);

/// Sum with the constant terms aligned.
Poly add(std::span<const double> a, std::span<const double> b);

Poly scale(std::span<const double> a, double s);

Poly power(std::span<const double> a, int exponent);

/// Drops leading zero coefficients; keeps at least one entry.
Poly trim(std::span<const double> a);

/// Degree after trimming; the zero polynomial reports degree 0.
int degree(std::span<const double> a);

std::complex<double> evaluate(std::span<const double> a, std::complex<double> z);

/// Coefficient reversal q^n p(1/q).
Poly reciprocal(std::span<const double> a);

/// Monic real polynomial with the given roots; complex roots must come in conjugate pairs.
Poly from_roots(std::span<const std::complex<double>> roots);

/// Roots as eigenvalues of the companion matrix. Throws NumericalError when the
/// eigenvalue iteration fails.
std::vector<std::complex<double>> roots(std::span<const double> a);

}  // namespace poly
}  // namespace sprid
