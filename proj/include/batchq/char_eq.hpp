#pragma once

#include <functional>
#include <span>
#include <vector>

#include "batchq/model.hpp"
#include "batchq/polynomial.hpp"

namespace batchq {

/// Roots of the characteristic equation
///     A(1 - mu + mu Y(s)) * sum_i g_i s^(b-i) - s^b = 0.
struct CharSystem {
    /// char_fn times the cleared denominators, ascending, unscaled.
    Poly cleared_poly;
    /// Every root of cleared_poly as returned by the polynomial solver.
    std::vector<cplx> all_roots;
    /// The b roots strictly inside the unit circle after Newton polishing on
    /// char_fn, conjugate-closed, sorted by (|r| desc, Re desc, Im desc).
    std::vector<cplx> interior_roots;
};

/// Evaluates the characteristic function of one model, with its derivative.
class CharFunction {
public:
    explicit CharFunction(const QueueModel& model);

    cplx operator()(cplx s) const { return eval_d(s).value; }
    ValueAndSlope eval_d(cplx s) const;

private:
    RationalPgf arrival_;
    RationalPgf capacity_;
    double mu_;
    int b_;
    Poly batch_rev_;  // sum_i g_i s^(b-i)
};

cplx char_fn(const QueueModel& model, cplx s);

/// Throws Error{DegreeOverflow} above kMaxClearedDegree.
Poly build_cleared_poly(const RationalPgf& arrival, const FinitePmf& batch, double mu,
                        const RationalPgf& capacity);
Poly build_cleared_poly(const QueueModel& model);

inline constexpr int kMaxClearedDegree = 10000;

/// Cleared numerator of 1 - mu + mu Y(s), the second factor of the full
/// characteristic product.
Poly service_factor_poly(const QueueModel& model);

/// Throws Error{InvalidModel} for mu = 1, Error{RootCountMismatch} if the
/// number of interior roots differs from b, Error{RepeatedRoot} if two
/// interior roots are within 1e-6.
/// Every root of the cleared characteristic equation, in s. For geometric
/// capacity the roots are found in a transformed variable that avoids
/// expanding powers of the capacity denominator.
std::vector<cplx> characteristic_candidates(const RationalPgf& arrival, const FinitePmf& batch,
                                            double mu, const CapacityDist& capacity);

CharSystem find_interior_roots(const QueueModel& model);

/// Root selection shared with the continuous-time solver.
struct RootSelection {
    /// Candidates farther than this from the origin are not polished.
    double candidate_radius = 1.01;
    /// A Newton polish that moves a candidate farther than this is discarded.
    double max_polish_move = 1e-4;
    double interior_margin = 1e-7;
    int newton_iterations = 100;
    double newton_tolerance = 1e-13;
};

using AnalyticFunction = std::function<ValueAndSlope(cplx)>;

/// Polishes candidates on f, keeps those with |r| < 1 - margin, enforces
/// conjugate symmetry and sorts. Same errors as find_interior_roots.
std::vector<cplx> select_interior_roots(std::span<const cplx> candidates, int b,
                                        const AnalyticFunction& f, const RootSelection& opts = {});

/// Newton iteration on f from start; returns the last iterate.
cplx newton_polish(const AnalyticFunction& f, cplx start, int max_iterations = 100,
                   double tolerance = 1e-13);

void sort_roots(std::vector<cplx>& roots);

}  // namespace batchq
