#pragma once

#include <complex>
#include <utility>
#include <variant>
#include <vector>

#include "batchq/polynomial.hpp"

namespace batchq {

/// Mass assigned to a positive integer support point.
struct PmfPoint {
    int point;
    double mass;

    friend bool operator==(const PmfPoint&, const PmfPoint&) = default;
};

/// Probability mass function on a finite subset of {1, 2, ...}.
///
/// Zero masses are dropped on construction (so the largest support point
/// always carries positive mass). Masses must sum to 1 within 1e-12; inputs
/// that are off by more are rejected rather than renormalized.
class FinitePmf {
public:
    static constexpr double kSumTolerance = 1e-12;

    /// Throws Error{InvalidPmf}.
    explicit FinitePmf(std::vector<PmfPoint> points);

    /// Single-point pmf, P(X = k) = 1.
    static FinitePmf point(int k);

    const std::vector<PmfPoint>& points() const noexcept { return points_; }
    int max_support() const noexcept { return points_.back().point; }
    int min_support() const noexcept { return points_.front().point; }
    double mean() const noexcept;
    /// P(X = k), zero off the support.
    double mass_at(int k) const noexcept;
    /// Dense ascending coefficient list, index 0 .. max_support.
    Poly coefficients() const;

    friend bool operator==(const FinitePmf&, const FinitePmf&) = default;

private:
    std::vector<PmfPoint> points_;
};

/// Geometric law on {1, 2, ...}: P(X = n) = p (1 - p)^(n - 1), pgf p z / (1 - (1 - p) z).
struct Geometric {
    double p;

    friend bool operator==(const Geometric&, const Geometric&) = default;
};

/// Ratio of two real polynomials, used as the pgf of a law on the integers.
class RationalPgf {
public:
    /// Throws Error{InvalidPmf} if the value at 1 is not 1, or if the
    /// denominator vanishes somewhere in the closed unit disk.
    RationalPgf(Poly numerator, Poly denominator);

    static RationalPgf from(const FinitePmf& pmf);
    static RationalPgf from(const Geometric& g);

    const Poly& numerator() const noexcept { return num_; }
    const Poly& denominator() const noexcept { return den_; }

    /// Throws Error{PoleAtArgument} if |denominator(z)| < 1e-14.
    cplx operator()(cplx z) const;
    /// f(z) and f'(z).
    ValueAndSlope eval_d(cplx z) const;
    /// f'(1).
    double mean() const;

private:
    Poly num_;
    Poly den_;
};

cplx pgf_eval(const RationalPgf& f, cplx z);
double pgf_mean(const RationalPgf& f);

/// Random serving capacity Y.
class CapacityDist {
public:
    CapacityDist(FinitePmf pmf);   // NOLINT(google-explicit-constructor)
    CapacityDist(Geometric geo);   // NOLINT(google-explicit-constructor)

    const std::variant<FinitePmf, Geometric>& law() const noexcept { return law_; }
    const RationalPgf& pgf() const noexcept { return pgf_; }
    double mean() const noexcept { return mean_; }
    /// True when Y(z) = z.
    bool is_unit() const noexcept;

    friend bool operator==(const CapacityDist& a, const CapacityDist& b) { return a.law_ == b.law_; }

private:
    std::variant<FinitePmf, Geometric> law_;
    RationalPgf pgf_;
    double mean_;
};

/// Slot count between successive batch arrivals (a_0 = 0). Deterministic
/// inter-arrival time d is the single-point pmf at d.
class InterArrivalDist {
public:
    InterArrivalDist(FinitePmf pmf);  // NOLINT(google-explicit-constructor)
    InterArrivalDist(Geometric geo);  // NOLINT(google-explicit-constructor)

    static InterArrivalDist deterministic(int slots) { return {FinitePmf::point(slots)}; }

    const std::variant<FinitePmf, Geometric>& law() const noexcept { return law_; }
    const RationalPgf& pgf() const noexcept { return pgf_; }
    double mean() const noexcept { return mean_; }
    bool is_geometric() const noexcept { return std::holds_alternative<Geometric>(law_); }

    friend bool operator==(const InterArrivalDist& a, const InterArrivalDist& b) {
        return a.law_ == b.law_;
    }

private:
    std::variant<FinitePmf, Geometric> law_;
    RationalPgf pgf_;
    double mean_;
};

}  // namespace batchq
