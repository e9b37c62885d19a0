#pragma once

#include <utility>
#include <variant>
#include <vector>

#include "batchq/model.hpp"
#include "batchq/steady_state.hpp"

namespace batchq {

struct Exponential {
    double rate;
    friend bool operator==(const Exponential&, const Exponential&) = default;
};

struct DeterministicTime {
    double duration;
    friend bool operator==(const DeterministicTime&, const DeterministicTime&) = default;
};

struct Erlang {
    int stages;
    double rate;  // per stage
    friend bool operator==(const Erlang&, const Erlang&) = default;
};

/// Continuous inter-arrival law, described by its Laplace-Stieltjes transform.
class CtInterArrival {
public:
    using Law = std::variant<Exponential, DeterministicTime, Erlang>;

    CtInterArrival(Law law);  // NOLINT(google-explicit-constructor)

    const Law& law() const noexcept { return law_; }
    double mean() const noexcept;
    bool is_exponential() const noexcept { return std::holds_alternative<Exponential>(law_); }

    cplx lst(cplx theta) const { return lst_d(theta).value; }
    ValueAndSlope lst_d(cplx theta) const;

    /// Slot-count law a_n = P((n-1) delta < A <= n delta). Exponential maps
    /// exactly onto a geometric law; Erlang is truncated where the remaining
    /// tail mass drops below 1e-12 (the remainder goes to the last point).
    InterArrivalDist discretize(double delta) const;

    friend bool operator==(const CtInterArrival&, const CtInterArrival&) = default;

private:
    Law law_;
};

/// GI^X/M^Y/1: exponential batch service times with rate mu_hat.
class CtModel {
public:
    const CtInterArrival& arrival() const noexcept { return arrival_; }
    const FinitePmf& batch() const noexcept { return batch_; }
    const CapacityDist& capacity() const noexcept { return capacity_; }
    double mu_hat() const noexcept { return mu_hat_; }
    double lambda_hat() const noexcept { return 1.0 / arrival_.mean(); }
    double rho() const noexcept { return rho_; }
    int b() const noexcept { return batch_.max_support(); }

private:
    friend CtModel build_ct_model(CtInterArrival, FinitePmf, double, CapacityDist);
    CtModel(CtInterArrival a, FinitePmf g, double mu_hat, CapacityDist y);

    CtInterArrival arrival_;
    FinitePmf batch_;
    CapacityDist capacity_;
    double mu_hat_;
    double rho_;
};

/// Throws Error{InvalidModel} for a non-positive rate, Error{Unstable} for rho >= 1.
CtModel build_ct_model(CtInterArrival arrival, FinitePmf batch, double mu_hat, CapacityDist capacity);

/// Discrete-time model on slots of width delta: a_n from the inter-arrival
/// law, mu = mu_hat delta.
QueueModel discretize(const CtModel& model, double delta);

/// A*(mu_hat (1 - Y(s))) sum_i g_i s^(b-i) - s^b.
class CtCharFunction {
public:
    explicit CtCharFunction(const CtModel& model);
    cplx operator()(cplx s) const { return eval_d(s).value; }
    ValueAndSlope eval_d(cplx s) const;

private:
    CtInterArrival arrival_;
    RationalPgf capacity_;
    double mu_hat_;
    int b_;
    Poly batch_rev_;
};

struct CtRoots {
    std::vector<cplx> roots;
    /// Slot width of the discretization that produced the starting points;
    /// 0 for Erlang arrivals, whose cleared equation is already polynomial.
    double delta;
};

/// The b roots inside the unit circle: roots of a discretized model (or of the
/// exact cleared polynomial for Erlang arrivals) serve as starting points for
/// Newton's method on the exact transform equation.
CtRoots ct_char_roots(const CtModel& model);

struct CtSolution {
    std::vector<cplx> roots;
    std::vector<cplx> constants;
    double lambda_hat;
    std::vector<cplx> coeffs_K;
    double p0;
    /// p_0 .. p_{b-1}, evaluated without negative powers of r_j.
    std::vector<double> head;
    std::vector<double> residuals;
    double delta;
};

CtSolution solve_ct(const CtModel& model);

EpochDist ct_pre_arrival_dist(const CtSolution& sol);
EpochDist ct_arbitrary_dist(const CtSolution& sol);

/// (pre-arrival, arbitrary)
std::pair<EpochDist, EpochDist> ct_distributions(const CtModel& model);

}  // namespace batchq
