#pragma once

#include <complex>
#include <span>
#include <vector>

namespace batchq {

using cplx = std::complex<double>;

/// Real polynomial, coefficients in ascending degree order.
using Poly = std::vector<double>;

/// z^k by repeated squaring (exact at z = 0, unlike std::pow).
cplx ipow(cplx z, int k);

cplx poly_eval(std::span<const double> p, cplx z);
double poly_eval(std::span<const double> p, double x);

/// Value and first derivative in one Horner pass.
struct ValueAndSlope {
    cplx value;
    cplx slope;
};
ValueAndSlope poly_eval_d(std::span<const double> p, cplx z);

Poly poly_add(std::span<const double> a, std::span<const double> b);
Poly poly_sub(std::span<const double> a, std::span<const double> b);
Poly poly_mul(std::span<const double> a, std::span<const double> b);
Poly poly_scale(std::span<const double> a, double k);
Poly poly_derivative(std::span<const double> p);

/// Degree after ignoring exact trailing zeros; -1 for the zero polynomial.
int poly_degree(std::span<const double> p);

/// Drops leading coefficients whose magnitude is below rel_tol * max|c|.
Poly poly_trim(std::span<const double> p, double rel_tol = 0.0);

struct AberthOptions {
    int max_iterations = 1000;
};

/// All complex roots of p via Aberth-Ehrlich simultaneous iteration, started
/// from the upper convex hull of (k, log|p_k|). Roots at the origin (zero
/// low-order coefficients) are returned exactly.
std::vector<cplx> polynomial_roots(std::span<const double> p,
                                   const AberthOptions& opts = {});

}  // namespace batchq
